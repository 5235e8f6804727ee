// Timing comparison between the optimized evaluator and the serial reference
// implementation, plus element-count and thread scaling. Prints a table; no
// pass/fail semantics.

#include <chrono>
#include <cstdio>
#include <vector>

#include "riscf/experiment.hpp"
#include "riscf/network.hpp"
#include "riscf/optimizer.hpp"
#include "riscf/phase.hpp"
#include "riscf/rate_model.hpp"
#include "riscf/reference_model.hpp"
#include "riscf/rng.hpp"
#ifdef _OPENMP
#include <omp.h>
#endif

using namespace riscf;

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

SystemConfig desk_like(int n_elements) {
    SystemConfig cfg;
    cfg.num_aps = 20;
    cfg.num_users = 5;
    cfg.num_ris_elements = n_elements;
    cfg.pilot_len = 3;
    cfg.area_side_m = 50.0;
    cfg.blockage_prob = 1.0;
    cfg.element_spacing = 0.125;
    return cfg;
}

template <typename F>
double time_per_call(F&& f, int reps) {
    f();  // warm up
    double t0 = now_seconds();
    for (int i = 0; i < reps; ++i) f();
    return (now_seconds() - t0) / reps;
}

}  // namespace

int main() {
    std::printf("evaluator benchmark (times per objective evaluation)\n\n");

    // Optimized vs reference on one mid-size instance, with agreement check.
    {
        SystemConfig cfg = desk_like(32);
        NetworkRealization net = generate_topology(cfg, 1);
        NetworkRealization general = net;
        general.shared.reset();
        auto rng = make_rng(2);
        PhaseVector theta = random_phase(32, rng);

        RateReport fast = evaluate_objective(theta, net, cfg);
        RateReport ref = reference::evaluate_objective(theta, net, cfg);
        double rel = relative_error(ref.objective_mbps, fast.objective_mbps);

        double t_struct = time_per_call([&] { evaluate_objective(theta, net, cfg); }, 2000);
        double t_general = time_per_call([&] { evaluate_objective(theta, general, cfg); }, 200);
        double t_ref = time_per_call([&] { reference::evaluate_objective(theta, net, cfg); }, 20);

        std::printf("M=20 K=5 N=32, shared-base realization:\n");
        std::printf("  %-34s %10.1f us\n", "optimized (structured path)", t_struct * 1e6);
        std::printf("  %-34s %10.1f us\n", "optimized (general path)", t_general * 1e6);
        std::printf("  %-34s %10.1f us  (x%.0f vs structured)\n", "serial reference",
                    t_ref * 1e6, t_ref / t_struct);
        std::printf("  agreement: rel deviation %.2e\n\n", rel);
    }

    // Element-count scaling of the structured path.
    {
        std::printf("element-count scaling (structured path):\n");
        double prev = 0.0;
        for (int n : {16, 32, 64, 128}) {
            SystemConfig cfg = desk_like(n);
            NetworkRealization net = generate_topology(cfg, 3);
            auto rng = make_rng(4);
            PhaseVector theta = random_phase(n, rng);
            int reps = n <= 32 ? 2000 : (n <= 64 ? 500 : 100);
            double t = time_per_call([&] { evaluate_objective(theta, net, cfg); }, reps);
            if (prev > 0.0)
                std::printf("  N=%-4d %10.1f us   (x%.2f over previous)\n", n, t * 1e6, t / prev);
            else
                std::printf("  N=%-4d %10.1f us\n", n, t * 1e6);
            prev = t;
        }
        std::printf("\n");
    }

#ifdef _OPENMP
    // Thread scaling of one optimizer generation loop.
    {
        std::printf("optimizer wall time vs threads (I=24, GEN=200, N=32):\n");
        SystemConfig cfg = desk_like(32);
        NetworkRealization net = generate_topology(cfg, 5);
        OptimizerConfig opt;
        opt.pop_size = 24;
        opt.max_generations = 200;
        opt.lambda_window = 10;
        opt.seed = 6;

        int saved = omp_get_max_threads();
        double base = 0.0;
        for (int threads : {1, 2, 4}) {
            omp_set_num_threads(threads);
            double t0 = now_seconds();
            OptimizationTrace trace = run_ide(net, cfg, opt);
            double dt = now_seconds() - t0;
            if (threads == 1) base = dt;
            std::printf("  threads=%d  %8.2f s  (speedup x%.2f)  best %.4f Mbps\n", threads, dt,
                        base / dt, trace.best.fitness);
        }
        omp_set_num_threads(saved);
    }
#endif

    return 0;
}
