#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "riscf/config.hpp"
#include "riscf/network.hpp"
#include "riscf/phase.hpp"

namespace riscf {

enum class Algorithm { ide, de, ga, random_draw };

std::string algorithm_name(Algorithm alg);
Algorithm parse_algorithm(const std::string& name);  // throws on unknown names

struct OptimizerConfig {
    Algorithm algorithm = Algorithm::ide;
    int pop_size = 50;          // I
    int max_generations = 500;  // GEN_MAX
    double lambda_init = 0.5;   // initial probability of the pbest mutation
    int lambda_window = 20;     // G, generations between lambda updates
    double pbest_fraction = 0.1;
    int shade_memory_size = 10;  // H
    double de_fixed_f = 0.5;     // plain-DE differential weight
    double de_fixed_cr = 0.9;    // plain-DE crossover rate
    std::uint64_t seed = 1;

    void validate() const;  // throws std::invalid_argument
};

struct Individual {
    PhaseVector phase;
    double fitness = 0.0;
};

struct TraceRow {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    double lambda = 0.0;
    long evals = 0;
    // Trials charged to each mutation strategy within the current lambda
    // window, snapshotted before any window reset (diagnostics only, not
    // serialized).
    long window_trials[2] = {0, 0};
};

struct OptimizationTrace {
    std::string algorithm;
    std::vector<TraceRow> rows;
    Individual best;
    long total_evals = 0;
};

// --- adaptation state -------------------------------------------------------

// Improvement accounting for the two mutation strategies over one window.
struct StrategyStats {
    double improvement[2] = {0.0, 0.0};  // sum of accepted fitness gains
    long trials[2] = {0, 0};             // trials charged per strategy
    double lambda = 0.5;
};

// Applies the window rule: lambda <- 0.2 if strategy 0's improvement rate is
// below strategy 1's, else 0.8. A strategy with no trials rates 0; with both
// unused lambda is kept. Counters reset for the next window.
StrategyStats update_lambda(StrategyStats stats);

struct ShadeSuccess {
    double f = 0.0;
    double cr = 0.0;
    double improvement = 0.0;  // strictly positive fitness gain
};

// Per-strategy success-history memories of size H, all entries start at 0.5.
struct ShadeMemory {
    struct Slots {
        Eigen::ArrayXd f_mem;
        Eigen::ArrayXd cr_mem;
        int write_index = 0;
    };
    Slots strategy[2];

    explicit ShadeMemory(int h);
};

double clip_cr(double raw);  // into [0, 1]
double clip_f(double raw);   // cap at 1 (positivity comes from resampling)

struct ShadeSample {
    double f = 0.0;
    double cr = 0.0;
};

// Picks a random memory slot r, then CR ~ clip(N(cr_mem[r], 0.1)) and
// F ~ Cauchy(f_mem[r], 0.1) resampled while nonpositive, capped at 1.
ShadeSample shade_sample(const ShadeMemory& mem, int strategy, std::mt19937_64& rng);

// Writes the weighted arithmetic mean of CRs and the weighted Lehmer mean of
// Fs (weights proportional to improvement) at the write index, advancing it.
// An empty success list leaves the memory untouched.
void shade_update(ShadeMemory& mem, int strategy, const std::vector<ShadeSuccess>& successes);

// --- variation operators ----------------------------------------------------

// pbest/1: theta_pbest + F (theta_r1 - theta_r2), wrapped into [-pi, pi).
Eigen::ArrayXd mutant_pbest(const Eigen::ArrayXd& pbest, const Eigen::ArrayXd& r1,
                            const Eigen::ArrayXd& r2, double f);

// current-to-pbest/1: theta_p + F (theta_pbest - theta_p) + F (theta_r1 - theta_r2).
Eigen::ArrayXd mutant_current_to_pbest(const Eigen::ArrayXd& parent, const Eigen::ArrayXd& pbest,
                                       const Eigen::ArrayXd& r1, const Eigen::ArrayXd& r2,
                                       double f);

// Binomial crossover given the forced index and per-gene unit draws:
// trial_n = mutant_n when draw_n <= CR or n == forced_index, else parent_n.
Eigen::ArrayXd crossover_core(const Eigen::ArrayXd& parent, const Eigen::ArrayXd& mutant,
                              double cr, int forced_index, const Eigen::ArrayXd& unit_draws);

Eigen::ArrayXd crossover(const Eigen::ArrayXd& parent, const Eigen::ArrayXd& mutant, double cr,
                         std::mt19937_64& rng);

// Trial replaces the parent when its fitness is at least the parent's.
bool admit_trial(double trial_fitness, double parent_fitness);

// Fitness-sorted index order (best first, ties by lower index); the pbest
// pool is its first max(2, ceil(fraction * I)) entries.
std::vector<int> fitness_order(const std::vector<Individual>& pop);
int pbest_pool_size(double fraction, int pop_size);

// --- runs -------------------------------------------------------------------

// All runs are deterministic in (net, cfg, opt): every random decision for
// generation g, individual p comes from a stream derived from (seed, g, p)
// before any parallel work, and fitness evaluation is pure, so results do
// not depend on the number of threads.
OptimizationTrace run_ide(const NetworkRealization& net, const SystemConfig& cfg,
                          const OptimizerConfig& opt);
OptimizationTrace run_de(const NetworkRealization& net, const SystemConfig& cfg,
                         const OptimizerConfig& opt);
OptimizationTrace run_ga(const NetworkRealization& net, const SystemConfig& cfg,
                         const OptimizerConfig& opt);
OptimizationTrace run_random_draw(const NetworkRealization& net, const SystemConfig& cfg,
                                  const OptimizerConfig& opt);

OptimizationTrace run_algorithm(Algorithm alg, const NetworkRealization& net,
                                const SystemConfig& cfg, const OptimizerConfig& opt);

}  // namespace riscf
