#include "riscf/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "riscf/rate_model.hpp"
#include "riscf/rng.hpp"

namespace riscf {

std::string algorithm_name(Algorithm alg) {
    switch (alg) {
        case Algorithm::ide: return "ide";
        case Algorithm::de: return "de";
        case Algorithm::ga: return "ga";
        case Algorithm::random_draw: return "random";
    }
    throw std::logic_error("algorithm_name: unknown algorithm");
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "ide") return Algorithm::ide;
    if (name == "de") return Algorithm::de;
    if (name == "ga") return Algorithm::ga;
    if (name == "random") return Algorithm::random_draw;
    throw std::invalid_argument("unknown algorithm: " + name);
}

void OptimizerConfig::validate() const {
    auto fail = [](const std::string& msg) {
        throw std::invalid_argument("OptimizerConfig: " + msg);
    };
    if (pop_size < 4) fail("pop_size must be >= 4 (mutation needs four distinct members)");
    if (max_generations < 0) fail("max_generations must be >= 0");
    if (!(lambda_init >= 0.0 && lambda_init <= 1.0)) fail("lambda_init must be in [0,1]");
    if (lambda_window < 1) fail("lambda_window must be >= 1");
    if (!(pbest_fraction > 0.0 && pbest_fraction <= 1.0)) fail("pbest_fraction must be in (0,1]");
    if (shade_memory_size < 1) fail("shade_memory_size must be >= 1");
    if (!(de_fixed_f > 0.0)) fail("de_fixed_f must be positive");
    if (!(de_fixed_cr >= 0.0 && de_fixed_cr <= 1.0)) fail("de_fixed_cr must be in [0,1]");
}

// --- adaptation state -------------------------------------------------------

StrategyStats update_lambda(StrategyStats stats) {
    double rate0 = stats.trials[0] > 0 ? stats.improvement[0] / stats.trials[0] : 0.0;
    double rate1 = stats.trials[1] > 0 ? stats.improvement[1] / stats.trials[1] : 0.0;
    if (stats.trials[0] > 0 || stats.trials[1] > 0) stats.lambda = rate0 < rate1 ? 0.2 : 0.8;
    stats.improvement[0] = stats.improvement[1] = 0.0;
    stats.trials[0] = stats.trials[1] = 0;
    return stats;
}

ShadeMemory::ShadeMemory(int h) {
    if (h < 1) throw std::invalid_argument("ShadeMemory: size must be >= 1");
    for (Slots& s : strategy) {
        s.f_mem = Eigen::ArrayXd::Constant(h, 0.5);
        s.cr_mem = Eigen::ArrayXd::Constant(h, 0.5);
        s.write_index = 0;
    }
}

double clip_cr(double raw) { return std::clamp(raw, 0.0, 1.0); }
double clip_f(double raw) { return std::min(raw, 1.0); }

ShadeSample shade_sample(const ShadeMemory& mem, int strategy, std::mt19937_64& rng) {
    const ShadeMemory::Slots& s = mem.strategy[strategy];
    std::uniform_int_distribution<int> pick(0, static_cast<int>(s.f_mem.size()) - 1);
    int r = pick(rng);
    std::normal_distribution<double> cr_draw(s.cr_mem[r], 0.1);
    double cr = clip_cr(cr_draw(rng));
    std::cauchy_distribution<double> f_draw(s.f_mem[r], 0.1);
    double f = f_draw(rng);
    while (f <= 0.0) f = f_draw(rng);
    return {clip_f(f), cr};
}

void shade_update(ShadeMemory& mem, int strategy, const std::vector<ShadeSuccess>& successes) {
    if (successes.empty()) return;
    ShadeMemory::Slots& s = mem.strategy[strategy];
    double wsum = 0.0;
    for (const ShadeSuccess& e : successes) wsum += e.improvement;
    double cr_acc = 0.0, f_sq = 0.0, f_lin = 0.0;
    for (const ShadeSuccess& e : successes) {
        double w = e.improvement / wsum;
        cr_acc += w * e.cr;
        f_sq += w * e.f * e.f;
        f_lin += w * e.f;
    }
    s.cr_mem[s.write_index] = cr_acc;
    s.f_mem[s.write_index] = f_sq / f_lin;  // Lehmer mean; f > 0 keeps it well defined
    s.write_index = (s.write_index + 1) % static_cast<int>(s.f_mem.size());
}

// --- variation operators ----------------------------------------------------

namespace {

Eigen::ArrayXd wrapped(Eigen::ArrayXd theta) {
    wrap_phases(theta);
    return theta;
}

}  // namespace

Eigen::ArrayXd mutant_pbest(const Eigen::ArrayXd& pbest, const Eigen::ArrayXd& r1,
                            const Eigen::ArrayXd& r2, double f) {
    return wrapped(pbest + f * (r1 - r2));
}

Eigen::ArrayXd mutant_current_to_pbest(const Eigen::ArrayXd& parent, const Eigen::ArrayXd& pbest,
                                       const Eigen::ArrayXd& r1, const Eigen::ArrayXd& r2,
                                       double f) {
    return wrapped(parent + f * (pbest - parent) + f * (r1 - r2));
}

Eigen::ArrayXd crossover_core(const Eigen::ArrayXd& parent, const Eigen::ArrayXd& mutant,
                              double cr, int forced_index, const Eigen::ArrayXd& unit_draws) {
    Eigen::ArrayXd trial(parent.size());
    for (Eigen::Index n = 0; n < parent.size(); ++n)
        trial[n] = (unit_draws[n] <= cr || n == forced_index) ? mutant[n] : parent[n];
    return trial;
}

Eigen::ArrayXd crossover(const Eigen::ArrayXd& parent, const Eigen::ArrayXd& mutant, double cr,
                         std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(parent.size()) - 1);
    int forced = pick(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::ArrayXd draws(parent.size());
    for (Eigen::Index n = 0; n < parent.size(); ++n) draws[n] = unit(rng);
    return crossover_core(parent, mutant, cr, forced, draws);
}

bool admit_trial(double trial_fitness, double parent_fitness) {
    return trial_fitness >= parent_fitness;
}

std::vector<int> fitness_order(const std::vector<Individual>& pop) {
    std::vector<int> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (pop[a].fitness != pop[b].fitness) return pop[a].fitness > pop[b].fitness;
        return a < b;
    });
    return order;
}

int pbest_pool_size(double fraction, int pop_size) {
    int pool = static_cast<int>(std::ceil(fraction * pop_size));
    return std::min(std::max(pool, 2), pop_size);
}

// --- runs -------------------------------------------------------------------

namespace {

double fitness_of(const PhaseVector& phase, const NetworkRealization& net,
                  const SystemConfig& cfg) {
    return evaluate_objective(phase, net, cfg).objective_mbps;
}

std::vector<Individual> initial_population(int count, int dim, std::uint64_t seed,
                                           const NetworkRealization& net,
                                           const SystemConfig& cfg) {
    std::vector<Individual> pop(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        auto rng = make_rng(derive_seed(seed, stream::init_population, i));
        pop[static_cast<std::size_t>(i)].phase = random_phase(dim, rng);
    }
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i)
        pop[static_cast<std::size_t>(i)].fitness = fitness_of(pop[static_cast<std::size_t>(i)].phase, net, cfg);
    return pop;
}

int best_index(const std::vector<Individual>& pop) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(pop.size()); ++i)
        if (pop[static_cast<std::size_t>(i)].fitness > pop[static_cast<std::size_t>(best)].fitness) best = i;
    return best;
}

TraceRow make_row(int gen, const std::vector<Individual>& pop, double lambda, long evals,
                  long w0 = 0, long w1 = 0) {
    TraceRow row;
    row.generation = gen;
    row.best_fitness = pop[static_cast<std::size_t>(best_index(pop))].fitness;
    double sum = 0.0;
    for (const Individual& ind : pop) sum += ind.fitness;
    row.mean_fitness = sum / static_cast<double>(pop.size());
    row.lambda = lambda;
    row.evals = evals;
    row.window_trials[0] = w0;
    row.window_trials[1] = w1;
    return row;
}

int draw_distinct(std::mt19937_64& rng, int upper, std::initializer_list<int> taken) {
    std::uniform_int_distribution<int> pick(0, upper - 1);
    for (;;) {
        int v = pick(rng);
        bool clash = false;
        for (int t : taken)
            if (v == t) clash = true;
        if (!clash) return v;
    }
}

struct PendingTrial {
    Eigen::ArrayXd theta;
    int strategy = 0;
    double f = 0.0;
    double cr = 0.0;
    double fitness = 0.0;
};

}  // namespace

OptimizationTrace run_ide(const NetworkRealization& net, const SystemConfig& cfg,
                          const OptimizerConfig& opt) {
    opt.validate();
    const int pop_size = opt.pop_size;
    const int dim = net.ris_elements();

    OptimizationTrace trace;
    trace.algorithm = algorithm_name(Algorithm::ide);

    std::vector<Individual> pop = initial_population(pop_size, dim, opt.seed, net, cfg);
    long evals = pop_size;
    trace.rows.push_back(make_row(0, pop, opt.lambda_init, evals));

    ShadeMemory mem(opt.shade_memory_size);
    StrategyStats stats;
    stats.lambda = opt.lambda_init;

    std::vector<PendingTrial> pending(static_cast<std::size_t>(pop_size));
    for (int g = 1; g <= opt.max_generations; ++g) {
        std::vector<int> order = fitness_order(pop);
        const int pool = pbest_pool_size(opt.pbest_fraction, pop_size);

        // All random decisions come from per-individual streams drawn before
        // the parallel evaluation below.
        for (int p = 0; p < pop_size; ++p) {
            auto rng = make_rng(derive_seed(opt.seed, stream::trial, g, p));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            PendingTrial& t = pending[static_cast<std::size_t>(p)];
            t.strategy = unit(rng) <= stats.lambda ? 0 : 1;
            ShadeSample sample = shade_sample(mem, t.strategy, rng);
            t.f = sample.f;
            t.cr = sample.cr;
            std::uniform_int_distribution<int> pick_pool(0, pool - 1);
            int pbest = order[static_cast<std::size_t>(pick_pool(rng))];
            int r1 = draw_distinct(rng, pop_size, {p});
            int r2 = draw_distinct(rng, pop_size, {p, r1});
            const Eigen::ArrayXd& pb = pop[static_cast<std::size_t>(pbest)].phase.theta;
            const Eigen::ArrayXd& t1 = pop[static_cast<std::size_t>(r1)].phase.theta;
            const Eigen::ArrayXd& t2 = pop[static_cast<std::size_t>(r2)].phase.theta;
            const Eigen::ArrayXd& par = pop[static_cast<std::size_t>(p)].phase.theta;
            Eigen::ArrayXd mutant = t.strategy == 0
                                        ? mutant_pbest(pb, t1, t2, t.f)
                                        : mutant_current_to_pbest(par, pb, t1, t2, t.f);
            t.theta = crossover(par, mutant, t.cr, rng);
        }

#pragma omp parallel for schedule(dynamic)
        for (int p = 0; p < pop_size; ++p) {
            PendingTrial& t = pending[static_cast<std::size_t>(p)];
            t.fitness = fitness_of(PhaseVector(t.theta), net, cfg);
        }
        evals += pop_size;

        std::vector<ShadeSuccess> successes[2];
        for (int p = 0; p < pop_size; ++p) {
            PendingTrial& t = pending[static_cast<std::size_t>(p)];
            Individual& parent = pop[static_cast<std::size_t>(p)];
            stats.trials[t.strategy] += 1;
            if (admit_trial(t.fitness, parent.fitness)) {
                double gain = t.fitness - parent.fitness;
                stats.improvement[t.strategy] += gain;
                if (gain > 0.0)
                    successes[t.strategy].push_back({t.f, t.cr, gain});
                parent.phase.theta = std::move(t.theta);
                parent.fitness = t.fitness;
            }
        }
        shade_update(mem, 0, successes[0]);
        shade_update(mem, 1, successes[1]);

        long w0 = stats.trials[0], w1 = stats.trials[1];
        if (g % opt.lambda_window == 0) stats = update_lambda(stats);
        trace.rows.push_back(make_row(g, pop, stats.lambda, evals, w0, w1));
    }

    trace.best = pop[static_cast<std::size_t>(best_index(pop))];
    trace.total_evals = evals;
    return trace;
}

OptimizationTrace run_de(const NetworkRealization& net, const SystemConfig& cfg,
                         const OptimizerConfig& opt) {
    opt.validate();
    const int pop_size = opt.pop_size;
    const int dim = net.ris_elements();

    OptimizationTrace trace;
    trace.algorithm = algorithm_name(Algorithm::de);

    std::vector<Individual> pop = initial_population(pop_size, dim, opt.seed, net, cfg);
    long evals = pop_size;
    trace.rows.push_back(make_row(0, pop, 0.0, evals));

    std::vector<PendingTrial> pending(static_cast<std::size_t>(pop_size));
    for (int g = 1; g <= opt.max_generations; ++g) {
        for (int p = 0; p < pop_size; ++p) {
            auto rng = make_rng(derive_seed(opt.seed, stream::trial, g, p));
            int r0 = draw_distinct(rng, pop_size, {p});
            int r1 = draw_distinct(rng, pop_size, {p, r0});
            int r2 = draw_distinct(rng, pop_size, {p, r0, r1});
            Eigen::ArrayXd mutant =
                wrapped(pop[static_cast<std::size_t>(r0)].phase.theta +
                        opt.de_fixed_f * (pop[static_cast<std::size_t>(r1)].phase.theta -
                                          pop[static_cast<std::size_t>(r2)].phase.theta));
            pending[static_cast<std::size_t>(p)].theta = crossover(
                pop[static_cast<std::size_t>(p)].phase.theta, mutant, opt.de_fixed_cr, rng);
        }

#pragma omp parallel for schedule(dynamic)
        for (int p = 0; p < pop_size; ++p) {
            PendingTrial& t = pending[static_cast<std::size_t>(p)];
            t.fitness = fitness_of(PhaseVector(t.theta), net, cfg);
        }
        evals += pop_size;

        for (int p = 0; p < pop_size; ++p) {
            PendingTrial& t = pending[static_cast<std::size_t>(p)];
            Individual& parent = pop[static_cast<std::size_t>(p)];
            if (admit_trial(t.fitness, parent.fitness)) {
                parent.phase.theta = std::move(t.theta);
                parent.fitness = t.fitness;
            }
        }
        trace.rows.push_back(make_row(g, pop, 0.0, evals));
    }

    trace.best = pop[static_cast<std::size_t>(best_index(pop))];
    trace.total_evals = evals;
    return trace;
}

OptimizationTrace run_ga(const NetworkRealization& net, const SystemConfig& cfg,
                         const OptimizerConfig& opt) {
    opt.validate();
    const int pop_size = opt.pop_size;
    const int dim = net.ris_elements();
    const double blend_alpha = 0.5;
    const double mutation_sigma = 0.1 * M_PI;
    const double mutation_prob = 1.0 / dim;

    OptimizationTrace trace;
    trace.algorithm = algorithm_name(Algorithm::ga);

    std::vector<Individual> pop = initial_population(pop_size, dim, opt.seed, net, cfg);
    long evals = pop_size;
    trace.rows.push_back(make_row(0, pop, 0.0, evals));

    std::vector<Individual> offspring(static_cast<std::size_t>(pop_size));
    for (int g = 1; g <= opt.max_generations; ++g) {
        Individual elite = pop[static_cast<std::size_t>(best_index(pop))];

        for (int i = 0; i < pop_size; ++i) {
            auto rng = make_rng(derive_seed(opt.seed, stream::trial, g, i));
            std::uniform_int_distribution<int> pick(0, pop_size - 1);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            auto tournament = [&]() -> const Eigen::ArrayXd& {
                int a = pick(rng);
                int b = pick(rng);
                int winner = pop[static_cast<std::size_t>(b)].fitness >
                                     pop[static_cast<std::size_t>(a)].fitness
                                 ? b
                                 : a;
                return pop[static_cast<std::size_t>(winner)].phase.theta;
            };
            const Eigen::ArrayXd& p1 = tournament();
            const Eigen::ArrayXd& p2 = tournament();

            Eigen::ArrayXd child(dim);
            for (int n = 0; n < dim; ++n) {
                double lo = std::min(p1[n], p2[n]);
                double hi = std::max(p1[n], p2[n]);
                double d = hi - lo;
                child[n] = lo - blend_alpha * d + unit(rng) * (1.0 + 2.0 * blend_alpha) * d;
            }
            std::normal_distribution<double> bump(0.0, mutation_sigma);
            for (int n = 0; n < dim; ++n)
                if (unit(rng) < mutation_prob) child[n] += bump(rng);
            wrap_phases(child);
            offspring[static_cast<std::size_t>(i)].phase = PhaseVector(std::move(child));
        }

#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < pop_size; ++i)
            offspring[static_cast<std::size_t>(i)].fitness =
                fitness_of(offspring[static_cast<std::size_t>(i)].phase, net, cfg);
        evals += pop_size;

        // Elitism of one: the previous best survives unless an offspring beats it.
        int worst = 0;
        for (int i = 1; i < pop_size; ++i)
            if (offspring[static_cast<std::size_t>(i)].fitness <
                offspring[static_cast<std::size_t>(worst)].fitness)
                worst = i;
        if (elite.fitness > offspring[static_cast<std::size_t>(worst)].fitness)
            offspring[static_cast<std::size_t>(worst)] = elite;
        pop = offspring;
        trace.rows.push_back(make_row(g, pop, 0.0, evals));
    }

    trace.best = pop[static_cast<std::size_t>(best_index(pop))];
    trace.total_evals = evals;
    return trace;
}

OptimizationTrace run_random_draw(const NetworkRealization& net, const SystemConfig& cfg,
                                  const OptimizerConfig& opt) {
    opt.validate();
    OptimizationTrace trace;
    trace.algorithm = algorithm_name(Algorithm::random_draw);
    auto rng = make_rng(derive_seed(opt.seed, stream::init_population, 0));
    Individual ind;
    ind.phase = random_phase(net.ris_elements(), rng);
    ind.fitness = fitness_of(ind.phase, net, cfg);
    TraceRow row;
    row.generation = 0;
    row.best_fitness = ind.fitness;
    row.mean_fitness = ind.fitness;
    row.lambda = 0.0;
    row.evals = 1;
    trace.rows.push_back(row);
    trace.best = ind;
    trace.total_evals = 1;
    return trace;
}

OptimizationTrace run_algorithm(Algorithm alg, const NetworkRealization& net,
                                const SystemConfig& cfg, const OptimizerConfig& opt) {
    switch (alg) {
        case Algorithm::ide: return run_ide(net, cfg, opt);
        case Algorithm::de: return run_de(net, cfg, opt);
        case Algorithm::ga: return run_ga(net, cfg, opt);
        case Algorithm::random_draw: return run_random_draw(net, cfg, opt);
    }
    throw std::logic_error("run_algorithm: unknown algorithm");
}

}  // namespace riscf
