#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "riscf/experiment.hpp"
#include "riscf/rng.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
};

void add_common(CLI::App* sub, CommonOptions& opts) {
    sub->add_option("--config", opts.config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "override the master seed");
    sub->add_option("--threads", opts.threads, "worker thread count")->check(CLI::PositiveNumber);
    sub->add_option("--out", opts.out_dir, "output directory (default from config)");
}

riscf::ExperimentSpec load_with_overrides(const CommonOptions& opts) {
    riscf::ExperimentSpec spec = riscf::load_spec(opts.config_path);
    if (opts.seed) spec.master_seed = *opts.seed;
    if (opts.out_dir) spec.output_dir = *opts.out_dir;
#ifdef _OPENMP
    if (opts.threads) omp_set_num_threads(*opts.threads);
#endif
    return spec;
}

int cmd_optimize(const CommonOptions& opts, const std::string& algorithm_arg) {
    riscf::ExperimentSpec spec = load_with_overrides(opts);
    riscf::Algorithm alg = algorithm_arg.empty() ? spec.optimizer.algorithm
                                                 : riscf::parse_algorithm(algorithm_arg);

    riscf::NetworkRealization net = riscf::generate_topology(
        spec.system, riscf::derive_seed(spec.master_seed, riscf::stream::topology, 0));
    riscf::OptimizerConfig oc = spec.optimizer;
    oc.algorithm = alg;
    oc.seed = riscf::derive_seed(spec.master_seed, riscf::stream::optimizer_run, 0,
                                 static_cast<int>(alg));

    riscf::OptimizationTrace trace = riscf::run_algorithm(alg, net, spec.system, oc);

    fs::create_directories(spec.output_dir);
    const std::string name = riscf::algorithm_name(alg);
    fs::path trace_path = fs::path(spec.output_dir) / ("trace_" + name + ".csv");
    riscf::write_trace_csv(trace_path.string(), trace, riscf::spec_to_json(spec));

    nlohmann::json solution;
    solution["algorithm"] = name;
    solution["objective_mbps"] = trace.best.fitness;
    solution["evals"] = trace.total_evals;
    solution["master_seed"] = spec.master_seed;
    std::vector<double> theta(trace.best.phase.theta.data(),
                              trace.best.phase.theta.data() + trace.best.phase.theta.size());
    solution["theta"] = theta;
    solution["spec"] = riscf::spec_to_json(spec);
    fs::path sol_path = fs::path(spec.output_dir) / "solution.json";
    std::ofstream out(sol_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + sol_path.string());
    out << solution.dump(2) << "\n";

    std::cout << name << " best objective: " << trace.best.fitness << " Mbps after "
              << trace.total_evals << " evaluations\n"
              << "trace:    " << trace_path.string() << "\n"
              << "solution: " << sol_path.string() << "\n";
    return 0;
}

int cmd_compare(const CommonOptions& opts, std::optional<int> topologies) {
    riscf::ExperimentSpec spec = load_with_overrides(opts);
    if (topologies) spec.num_topologies = *topologies;
    spec.validate();

    riscf::ExperimentResult result = riscf::run_experiment(spec);
    riscf::emit_outputs(spec, result, spec.output_dir);

    std::cout << "ran " << result.runs.size() << " optimizations over " << spec.num_topologies
              << " topologies\n";
    for (riscf::Algorithm alg : spec.algorithms) {
        double sum = 0.0;
        int n = 0;
        for (const riscf::RunRecord& rec : result.runs)
            if (rec.algorithm == alg) {
                sum += rec.trace.best.fitness;
                ++n;
            }
        std::cout << "  " << riscf::algorithm_name(alg)
                  << " mean objective: " << (n ? sum / n : 0.0) << " Mbps\n";
    }
    std::cout << "outputs in " << spec.output_dir << "\n";
    return 0;
}

int cmd_validate(const CommonOptions& opts, std::optional<int> instances,
                 std::optional<long> draws, double tolerance) {
    riscf::ExperimentSpec spec = load_with_overrides(opts);
    if (instances) spec.validation.num_instances = *instances;
    if (draws) spec.validation.num_draws = *draws;
    spec.validate();

    riscf::ValidationReport report = riscf::validate_closed_form(spec, tolerance);

    fs::create_directories(spec.output_dir);
    fs::path csv_path = fs::path(spec.output_dir) / "validation.csv";
    riscf::write_validation_csv(csv_path.string(), spec, report);

    std::printf("%-9s %-5s %-16s %-16s %-10s\n", "instance", "user", "closed_form",
                "empirical", "rel_error");
    for (const riscf::ValidationRow& row : report.rows)
        std::printf("%-9d %-5d %-16.8g %-16.8g %-10.4g\n", row.instance, row.user,
                    row.closed_form_sinr, row.empirical_sinr, row.rel_error);
    std::printf("max relative error %.4g (tolerance %.4g): %s\n", report.max_rel_error,
                report.tolerance, report.pass ? "PASS" : "FAIL");
    std::cout << "table written to " << csv_path.string() << "\n";
    return report.pass ? 0 : 2;
}

int cmd_sweep(const CommonOptions& opts, std::optional<int> topologies) {
    riscf::ExperimentSpec spec = load_with_overrides(opts);
    if (topologies) spec.num_topologies = *topologies;
    spec.validate();
    if (!spec.sweep) throw std::invalid_argument("config has no experiment.sweep section");

    riscf::run_sweep(spec, spec.output_dir);
    std::cout << "sweep over " << spec.sweep->parameter << " (" << spec.sweep->values.size()
              << " values) written to " << spec.output_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS-aided cell-free massive MIMO uplink: throughput simulation and phase optimization"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::string algorithm_arg;
    std::optional<int> topologies;
    std::optional<int> instances;
    std::optional<long> draws;
    double tolerance = 0.03;

    CLI::App* optimize = app.add_subcommand("optimize", "optimize the phase vector on one topology");
    add_common(optimize, opts);
    optimize->add_option("--algorithm", algorithm_arg, "ide, de, ga or random");

    CLI::App* compare = app.add_subcommand("compare", "run all configured algorithms over many topologies");
    add_common(compare, opts);
    compare->add_option("--topologies", topologies, "override the topology count")
        ->check(CLI::NonNegativeNumber);

    CLI::App* validate = app.add_subcommand("validate", "check the closed-form SINR against Monte Carlo sampling");
    add_common(validate, opts);
    validate->add_option("--instances", instances, "independent instances to check")
        ->check(CLI::PositiveNumber);
    validate->add_option("--draws", draws, "fading draws per estimate")->check(CLI::PositiveNumber);
    validate->add_option("--tolerance", tolerance, "maximum allowed relative error");

    CLI::App* sweep = app.add_subcommand("sweep", "repeat the comparison over a parameter range");
    add_common(sweep, opts);
    sweep->add_option("--topologies", topologies, "override the topology count")
        ->check(CLI::NonNegativeNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (optimize->parsed()) return cmd_optimize(opts, algorithm_arg);
        if (compare->parsed()) return cmd_compare(opts, topologies);
        if (validate->parsed()) return cmd_validate(opts, instances, draws, tolerance);
        if (sweep->parsed()) return cmd_sweep(opts, topologies);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
