#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "riscf/config.hpp"
#include "riscf/network.hpp"
#include "riscf/optimizer.hpp"

namespace riscf {

// Monte Carlo cross-check of the closed-form SINR on small instances.
struct ValidationSpec {
    int num_instances = 5;
    long num_draws = 200000;
};

// One system parameter swept over a list of values, everything else fixed.
struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
};

// Full description of an experiment: the system, the optimizer settings,
// how many topology realizations to average over, and which algorithms to run.
struct ExperimentSpec {
    SystemConfig system;
    OptimizerConfig optimizer;
    int num_topologies = 20;
    std::vector<Algorithm> algorithms = {Algorithm::ide, Algorithm::de, Algorithm::ga,
                                         Algorithm::random_draw};
    std::optional<SweepSpec> sweep;
    ValidationSpec validation;
    std::string output_dir = "results";
    std::uint64_t master_seed = 1;

    void validate() const;
};

// JSON round trip. Parsing is strict: an unknown key in any section is an error,
// so typos in config files fail loudly instead of silently using defaults.
ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ExperimentSpec& spec);
ExperimentSpec load_spec(const std::string& path);

struct RunRecord {
    int topology = 0;
    Algorithm algorithm = Algorithm::ide;
    OptimizationTrace trace;
    double seconds = 0.0;
};

struct ExperimentResult {
    std::vector<RunRecord> runs;  // topology-major, algorithms in spec order
    double total_seconds = 0.0;
};

// Runs every (topology, algorithm) pair. Per-run seeds are derived from the
// master seed and the pair identity, so adding or reordering algorithms does
// not change any other run's result.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Writes convergence_<alg>.csv, cdf_<alg>.csv and summary.json into out_dir.
// CSV content depends only on the spec, never on thread count or wall time;
// timing information goes to summary.json only.
void emit_outputs(const ExperimentSpec& spec, const ExperimentResult& result,
                  const std::string& out_dir);

// Single-run trace with columns
// generation,best_fitness_mbps,mean_fitness_mbps,lambda,evals_so_far.
void write_trace_csv(const std::string& path, const OptimizationTrace& trace,
                     const nlohmann::json& config_comment);

struct ValidationRow {
    int instance = 0;
    int user = 0;
    double closed_form_sinr = 0.0;
    double empirical_sinr = 0.0;
    double rel_error = 0.0;
};

struct ValidationReport {
    std::vector<ValidationRow> rows;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// |value - reference| relative to |reference|, guarded against reference == 0.
double relative_error(double reference, double value);

// Compares the closed-form SINR against the empirical estimate for every user
// of `num_instances` independently drawn topologies, each at a random phase.
ValidationReport validate_closed_form(const ExperimentSpec& spec, double tolerance = 0.03);

void write_validation_csv(const std::string& path, const ExperimentSpec& spec,
                          const ValidationReport& report);

// Applies one swept value to a numeric system parameter by name; throws
// std::invalid_argument for unknown names or non-integral values on integer fields.
void apply_sweep_value(SystemConfig& cfg, const std::string& parameter, double value);

// Runs the experiment once per sweep value into out_dir/<parameter>_<value>/
// and writes an aggregate sweep_summary.csv at the top level.
void run_sweep(const ExperimentSpec& spec, const std::string& out_dir);

}  // namespace riscf
