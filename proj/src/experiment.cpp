#include "riscf/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

#include "riscf/monte_carlo.hpp"
#include "riscf/phase.hpp"
#include "riscf/rate_model.hpp"
#include "riscf/rng.hpp"

namespace riscf {

namespace {

using nlohmann::json;

void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw std::invalid_argument(std::string(section) + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument(std::string("unknown key in ") + section + ": " +
                                        it.key());
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->template get<T>();
}

SystemConfig system_from_json(const json& j) {
    check_keys(j, "system",
               {"num_aps", "num_users", "num_ris_elements", "pilot_len", "coherence_len",
                "bandwidth_mhz", "uplink_power_mw", "pilot_power_mw", "noise_power_dbm",
                "user_weights", "blockage_prob", "area_side_m", "ris_position",
                "element_spacing", "shadowing_std_db", "pathloss_intercept_db",
                "pathloss_exponent", "rng_seed"});
    SystemConfig cfg;
    read_field(j, "num_aps", cfg.num_aps);
    read_field(j, "num_users", cfg.num_users);
    read_field(j, "num_ris_elements", cfg.num_ris_elements);
    read_field(j, "pilot_len", cfg.pilot_len);
    read_field(j, "coherence_len", cfg.coherence_len);
    read_field(j, "bandwidth_mhz", cfg.bandwidth_mhz);
    read_field(j, "uplink_power_mw", cfg.uplink_power_mw);
    read_field(j, "pilot_power_mw", cfg.pilot_power_mw);
    read_field(j, "noise_power_dbm", cfg.noise_power_dbm);
    read_field(j, "user_weights", cfg.user_weights);
    read_field(j, "blockage_prob", cfg.blockage_prob);
    read_field(j, "area_side_m", cfg.area_side_m);
    if (auto it = j.find("ris_position"); it != j.end()) {
        auto xy = it->get<std::vector<double>>();
        if (xy.size() != 2)
            throw std::invalid_argument("system.ris_position must be a [x, y] pair");
        cfg.ris_position = {xy[0], xy[1]};
    }
    read_field(j, "element_spacing", cfg.element_spacing);
    read_field(j, "shadowing_std_db", cfg.shadowing_std_db);
    read_field(j, "pathloss_intercept_db", cfg.pathloss_intercept_db);
    read_field(j, "pathloss_exponent", cfg.pathloss_exponent);
    read_field(j, "rng_seed", cfg.rng_seed);
    return cfg;
}

json system_to_json(const SystemConfig& cfg) {
    json j;
    j["num_aps"] = cfg.num_aps;
    j["num_users"] = cfg.num_users;
    j["num_ris_elements"] = cfg.num_ris_elements;
    j["pilot_len"] = cfg.pilot_len;
    j["coherence_len"] = cfg.coherence_len;
    j["bandwidth_mhz"] = cfg.bandwidth_mhz;
    j["uplink_power_mw"] = cfg.uplink_power_mw;
    j["pilot_power_mw"] = cfg.pilot_power_mw;
    j["noise_power_dbm"] = cfg.noise_power_dbm;
    if (!cfg.user_weights.empty()) j["user_weights"] = cfg.user_weights;
    j["blockage_prob"] = cfg.blockage_prob;
    j["area_side_m"] = cfg.area_side_m;
    if (!std::isnan(cfg.ris_position[0]) && !std::isnan(cfg.ris_position[1]))
        j["ris_position"] = {cfg.ris_position[0], cfg.ris_position[1]};
    j["element_spacing"] = cfg.element_spacing;
    j["shadowing_std_db"] = cfg.shadowing_std_db;
    j["pathloss_intercept_db"] = cfg.pathloss_intercept_db;
    j["pathloss_exponent"] = cfg.pathloss_exponent;
    j["rng_seed"] = cfg.rng_seed;
    return j;
}

OptimizerConfig optimizer_from_json(const json& j) {
    check_keys(j, "optimizer",
               {"algorithm", "pop_size", "max_generations", "lambda_init", "lambda_window",
                "pbest_fraction", "shade_memory_size", "de_fixed_f", "de_fixed_cr"});
    OptimizerConfig oc;
    if (auto it = j.find("algorithm"); it != j.end())
        oc.algorithm = parse_algorithm(it->get<std::string>());
    read_field(j, "pop_size", oc.pop_size);
    read_field(j, "max_generations", oc.max_generations);
    read_field(j, "lambda_init", oc.lambda_init);
    read_field(j, "lambda_window", oc.lambda_window);
    read_field(j, "pbest_fraction", oc.pbest_fraction);
    read_field(j, "shade_memory_size", oc.shade_memory_size);
    read_field(j, "de_fixed_f", oc.de_fixed_f);
    read_field(j, "de_fixed_cr", oc.de_fixed_cr);
    return oc;
}

json optimizer_to_json(const OptimizerConfig& oc) {
    json j;
    j["algorithm"] = algorithm_name(oc.algorithm);
    j["pop_size"] = oc.pop_size;
    j["max_generations"] = oc.max_generations;
    j["lambda_init"] = oc.lambda_init;
    j["lambda_window"] = oc.lambda_window;
    j["pbest_fraction"] = oc.pbest_fraction;
    j["shade_memory_size"] = oc.shade_memory_size;
    j["de_fixed_f"] = oc.de_fixed_f;
    j["de_fixed_cr"] = oc.de_fixed_cr;
    return j;
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf, end);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

void write_config_comment(std::ofstream& out, const json& config) {
    out << "# config: " << config.dump() << "\n";
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

void ExperimentSpec::validate() const {
    system.validate();
    optimizer.validate();
    if (num_topologies < 0)
        throw std::invalid_argument("experiment: num_topologies must be >= 0");
    if (algorithms.empty())
        throw std::invalid_argument("experiment: algorithms must not be empty");
    if (sweep) {
        if (sweep->parameter.empty())
            throw std::invalid_argument("experiment: sweep.parameter must be set");
        if (sweep->values.empty())
            throw std::invalid_argument("experiment: sweep.values must not be empty");
        SystemConfig probe = system;
        apply_sweep_value(probe, sweep->parameter, sweep->values.front());
    }
    if (validation.num_instances < 1)
        throw std::invalid_argument("experiment: validation.num_instances must be >= 1");
    if (validation.num_draws < 1)
        throw std::invalid_argument("experiment: validation.num_draws must be >= 1");
    if (output_dir.empty())
        throw std::invalid_argument("experiment: output_dir must not be empty");
}

ExperimentSpec spec_from_json(const json& j) {
    check_keys(j, "top level", {"system", "optimizer", "experiment"});
    ExperimentSpec spec;
    if (auto it = j.find("system"); it != j.end()) spec.system = system_from_json(*it);
    if (auto it = j.find("optimizer"); it != j.end()) spec.optimizer = optimizer_from_json(*it);
    spec.master_seed = spec.system.rng_seed;
    if (auto it = j.find("experiment"); it != j.end()) {
        const json& e = *it;
        check_keys(e, "experiment",
                   {"num_topologies", "algorithms", "master_seed", "output_dir", "validation",
                    "sweep"});
        read_field(e, "num_topologies", spec.num_topologies);
        if (auto a = e.find("algorithms"); a != e.end()) {
            spec.algorithms.clear();
            for (const auto& name : a->get<std::vector<std::string>>())
                spec.algorithms.push_back(parse_algorithm(name));
        }
        read_field(e, "master_seed", spec.master_seed);
        read_field(e, "output_dir", spec.output_dir);
        if (auto v = e.find("validation"); v != e.end()) {
            check_keys(*v, "experiment.validation", {"num_instances", "num_draws"});
            read_field(*v, "num_instances", spec.validation.num_instances);
            read_field(*v, "num_draws", spec.validation.num_draws);
        }
        if (auto s = e.find("sweep"); s != e.end()) {
            check_keys(*s, "experiment.sweep", {"parameter", "values"});
            SweepSpec sw;
            read_field(*s, "parameter", sw.parameter);
            read_field(*s, "values", sw.values);
            spec.sweep = std::move(sw);
        }
    }
    spec.validate();
    return spec;
}

json spec_to_json(const ExperimentSpec& spec) {
    json j;
    j["system"] = system_to_json(spec.system);
    j["optimizer"] = optimizer_to_json(spec.optimizer);
    json e;
    e["num_topologies"] = spec.num_topologies;
    std::vector<std::string> names;
    names.reserve(spec.algorithms.size());
    for (Algorithm a : spec.algorithms) names.push_back(algorithm_name(a));
    e["algorithms"] = names;
    e["master_seed"] = spec.master_seed;
    e["output_dir"] = spec.output_dir;
    e["validation"] = {{"num_instances", spec.validation.num_instances},
                       {"num_draws", spec.validation.num_draws}};
    if (spec.sweep)
        e["sweep"] = {{"parameter", spec.sweep->parameter}, {"values", spec.sweep->values}};
    j["experiment"] = e;
    return j;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    try {
        return spec_from_json(j);
    } catch (const json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    auto wall_start = std::chrono::steady_clock::now();

    std::vector<NetworkRealization> nets;
    nets.reserve(static_cast<std::size_t>(spec.num_topologies));
    for (int t = 0; t < spec.num_topologies; ++t)
        nets.push_back(
            generate_topology(spec.system, derive_seed(spec.master_seed, stream::topology, t)));

    struct Job {
        int topology;
        std::size_t alg_index;
    };
    std::vector<Job> jobs;
    jobs.reserve(nets.size() * spec.algorithms.size());
    for (int t = 0; t < spec.num_topologies; ++t)
        for (std::size_t a = 0; a < spec.algorithms.size(); ++a)
            jobs.push_back({t, a});

    ExperimentResult result;
    result.runs.resize(jobs.size());

#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(jobs.size()); ++i) {
        const Job& job = jobs[static_cast<std::size_t>(i)];
        Algorithm alg = spec.algorithms[job.alg_index];
        OptimizerConfig oc = spec.optimizer;
        oc.algorithm = alg;
        oc.seed = derive_seed(spec.master_seed, stream::optimizer_run, job.topology,
                              static_cast<int>(alg));
        auto t0 = std::chrono::steady_clock::now();
        OptimizationTrace trace =
            run_algorithm(alg, nets[static_cast<std::size_t>(job.topology)], spec.system, oc);
        auto t1 = std::chrono::steady_clock::now();
        RunRecord& rec = result.runs[static_cast<std::size_t>(i)];
        rec.topology = job.topology;
        rec.algorithm = alg;
        rec.trace = std::move(trace);
        rec.seconds = std::chrono::duration<double>(t1 - t0).count();
    }

    result.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return result;
}

void write_trace_csv(const std::string& path, const OptimizationTrace& trace,
                     const json& config_comment) {
    auto out = open_out(path);
    write_config_comment(out, config_comment);
    out << "generation,best_fitness_mbps,mean_fitness_mbps,lambda,evals_so_far\n";
    for (const TraceRow& row : trace.rows)
        out << row.generation << ',' << format_double(row.best_fitness) << ','
            << format_double(row.mean_fitness) << ',' << format_double(row.lambda) << ','
            << row.evals << '\n';
}

void emit_outputs(const ExperimentSpec& spec, const ExperimentResult& result,
                  const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const json spec_json = spec_to_json(spec);

    for (Algorithm alg : spec.algorithms) {
        std::vector<const RunRecord*> runs;
        for (const RunRecord& rec : result.runs)
            if (rec.algorithm == alg) runs.push_back(&rec);

        const std::string name = algorithm_name(alg);

        // Mean trace across topologies; every run of one algorithm has the
        // same number of rows, so the average is row-wise.
        {
            auto out = open_out(fs::path(out_dir) / ("convergence_" + name + ".csv"));
            write_config_comment(out, spec_json);
            out << "generation,best_fitness_mbps,mean_fitness_mbps,lambda,evals_so_far\n";
            if (!runs.empty()) {
                std::size_t rows = runs.front()->trace.rows.size();
                double inv = 1.0 / static_cast<double>(runs.size());
                for (std::size_t r = 0; r < rows; ++r) {
                    double best = 0.0, mean = 0.0, lambda = 0.0;
                    for (const RunRecord* rec : runs) {
                        best += rec->trace.rows[r].best_fitness;
                        mean += rec->trace.rows[r].mean_fitness;
                        lambda += rec->trace.rows[r].lambda;
                    }
                    out << runs.front()->trace.rows[r].generation << ','
                        << format_double(best * inv) << ',' << format_double(mean * inv) << ','
                        << format_double(lambda * inv) << ','
                        << runs.front()->trace.rows[r].evals << '\n';
                }
            }
        }

        // Empirical CDF of the final objective over topologies.
        {
            auto out = open_out(fs::path(out_dir) / ("cdf_" + name + ".csv"));
            write_config_comment(out, spec_json);
            out << "objective_mbps,empirical_cdf\n";
            std::vector<double> finals;
            finals.reserve(runs.size());
            for (const RunRecord* rec : runs) finals.push_back(rec->trace.best.fitness);
            std::sort(finals.begin(), finals.end());
            for (std::size_t i = 0; i < finals.size(); ++i)
                out << format_double(finals[i]) << ','
                    << format_double(static_cast<double>(i + 1) /
                                     static_cast<double>(finals.size()))
                    << '\n';
        }
    }

    json summary;
    summary["spec"] = spec_json;
    summary["total_seconds"] = result.total_seconds;
    json per_alg = json::object();
    std::map<std::string, double> medians;
    for (Algorithm alg : spec.algorithms) {
        std::vector<double> finals, seconds;
        long evals = 0;
        std::size_t generations = 0;
        for (const RunRecord& rec : result.runs)
            if (rec.algorithm == alg) {
                finals.push_back(rec.trace.best.fitness);
                seconds.push_back(rec.seconds);
                evals += rec.trace.total_evals;
                generations = std::max(generations, rec.trace.rows.size());
            }
        json stats;
        stats["runs"] = finals.size();
        stats["mean_objective_mbps"] = mean_of(finals);
        stats["median_objective_mbps"] = median_of(finals);
        stats["min_objective_mbps"] = finals.empty() ? 0.0 : *std::min_element(finals.begin(), finals.end());
        stats["max_objective_mbps"] = finals.empty() ? 0.0 : *std::max_element(finals.begin(), finals.end());
        stats["stddev_objective_mbps"] = stddev_of(finals);
        stats["mean_seconds"] = mean_of(seconds);
        if (generations > 0)
            stats["seconds_per_generation"] = mean_of(seconds) / static_cast<double>(generations);
        stats["total_evals"] = evals;
        per_alg[algorithm_name(alg)] = stats;
        medians[algorithm_name(alg)] = median_of(finals);
    }
    summary["algorithms"] = per_alg;
    // Median improvement of the adaptive optimizer over every other method,
    // the headline comparison the harness exists to make.
    if (auto ide = medians.find("ide"); ide != medians.end()) {
        json impr = json::object();
        for (const auto& [name, med] : medians)
            if (name != "ide" && med > 0.0)
                impr[name] = (ide->second - med) / med * 100.0;
        summary["ide_median_improvement_pct"] = impr;
    }
    json runs_json = json::array();
    for (const RunRecord& rec : result.runs) {
        json r;
        r["topology"] = rec.topology;
        r["algorithm"] = algorithm_name(rec.algorithm);
        r["objective_mbps"] = rec.trace.best.fitness;
        r["evals"] = rec.trace.total_evals;
        r["seconds"] = rec.seconds;
        runs_json.push_back(r);
    }
    summary["runs"] = runs_json;

    auto out = open_out(std::filesystem::path(out_dir) / "summary.json");
    out << summary.dump(2) << "\n";
}

double relative_error(double reference, double value) {
    double denom = std::abs(reference);
    if (denom < 1e-300) return std::abs(value - reference) > 0.0 ? HUGE_VAL : 0.0;
    return std::abs(value - reference) / denom;
}

ValidationReport validate_closed_form(const ExperimentSpec& spec, double tolerance) {
    spec.validate();
    ValidationReport report;
    report.tolerance = tolerance;
    for (int i = 0; i < spec.validation.num_instances; ++i) {
        std::uint64_t topo_seed = derive_seed(spec.master_seed, stream::validation, i, 0);
        std::uint64_t phase_seed = derive_seed(spec.master_seed, stream::validation, i, 1);
        std::uint64_t mc_seed = derive_seed(spec.master_seed, stream::validation, i, 2);

        NetworkRealization net = generate_topology(spec.system, topo_seed);
        auto rng = make_rng(phase_seed);
        PhaseVector phase = random_phase(net.ris_elements(), rng);

        for (int k = 0; k < net.num_users(); ++k) {
            double closed = sinr(k, phase, net, spec.system);
            EmpiricalSinr emp = empirical_uatf_sinr(k, phase, net, spec.system,
                                                    spec.validation.num_draws,
                                                    derive_seed(mc_seed, k));
            ValidationRow row;
            row.instance = i;
            row.user = k;
            row.closed_form_sinr = closed;
            row.empirical_sinr = emp.value;
            row.rel_error = emp.valid ? relative_error(closed, emp.value) : HUGE_VAL;
            report.rows.push_back(row);
            report.max_rel_error = std::max(report.max_rel_error, row.rel_error);
        }
    }
    report.pass = report.max_rel_error <= tolerance;
    return report;
}

void write_validation_csv(const std::string& path, const ExperimentSpec& spec,
                          const ValidationReport& report) {
    auto out = open_out(path);
    write_config_comment(out, spec_to_json(spec));
    out << "instance,user,closed_form_sinr,empirical_sinr,rel_error\n";
    for (const ValidationRow& row : report.rows)
        out << row.instance << ',' << row.user << ',' << format_double(row.closed_form_sinr)
            << ',' << format_double(row.empirical_sinr) << ',' << format_double(row.rel_error)
            << '\n';
}

void apply_sweep_value(SystemConfig& cfg, const std::string& parameter, double value) {
    auto as_int = [&](int& field) {
        double rounded = std::round(value);
        if (std::abs(value - rounded) > 1e-9)
            throw std::invalid_argument("sweep: " + parameter + " needs an integer value, got " +
                                        format_double(value));
        field = static_cast<int>(rounded);
    };
    static const std::map<std::string, int SystemConfig::*> int_fields = {
        {"num_aps", &SystemConfig::num_aps},
        {"num_users", &SystemConfig::num_users},
        {"num_ris_elements", &SystemConfig::num_ris_elements},
        {"pilot_len", &SystemConfig::pilot_len},
        {"coherence_len", &SystemConfig::coherence_len},
    };
    static const std::map<std::string, double SystemConfig::*> double_fields = {
        {"bandwidth_mhz", &SystemConfig::bandwidth_mhz},
        {"uplink_power_mw", &SystemConfig::uplink_power_mw},
        {"pilot_power_mw", &SystemConfig::pilot_power_mw},
        {"noise_power_dbm", &SystemConfig::noise_power_dbm},
        {"blockage_prob", &SystemConfig::blockage_prob},
        {"area_side_m", &SystemConfig::area_side_m},
        {"element_spacing", &SystemConfig::element_spacing},
        {"shadowing_std_db", &SystemConfig::shadowing_std_db},
        {"pathloss_intercept_db", &SystemConfig::pathloss_intercept_db},
        {"pathloss_exponent", &SystemConfig::pathloss_exponent},
    };
    if (auto it = int_fields.find(parameter); it != int_fields.end()) {
        as_int(cfg.*(it->second));
        return;
    }
    if (auto it = double_fields.find(parameter); it != double_fields.end()) {
        cfg.*(it->second) = value;
        return;
    }
    throw std::invalid_argument("sweep: unknown parameter: " + parameter);
}

void run_sweep(const ExperimentSpec& spec, const std::string& out_dir) {
    spec.validate();
    if (!spec.sweep) throw std::invalid_argument("run_sweep: spec has no sweep section");
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    struct Point {
        double value;
        Algorithm algorithm;
        double mean_objective;
    };
    std::vector<Point> points;

    for (double value : spec.sweep->values) {
        ExperimentSpec sub = spec;
        sub.sweep.reset();
        apply_sweep_value(sub.system, spec.sweep->parameter, value);
        sub.validate();

        std::string leaf = spec.sweep->parameter + "_" + format_double(value);
        fs::path sub_dir = fs::path(out_dir) / leaf;
        ExperimentResult result = run_experiment(sub);
        emit_outputs(sub, result, sub_dir.string());

        for (Algorithm alg : sub.algorithms) {
            std::vector<double> finals;
            for (const RunRecord& rec : result.runs)
                if (rec.algorithm == alg) finals.push_back(rec.trace.best.fitness);
            points.push_back({value, alg, mean_of(finals)});
        }
    }

    auto out = open_out(fs::path(out_dir) / "sweep_summary.csv");
    write_config_comment(out, spec_to_json(spec));
    out << "value,algorithm,mean_objective_mbps\n";
    for (const Point& p : points)
        out << format_double(p.value) << ',' << algorithm_name(p.algorithm) << ','
            << format_double(p.mean_objective) << '\n';
}

}  // namespace riscf
