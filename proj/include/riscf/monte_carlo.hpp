#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "riscf/config.hpp"
#include "riscf/network.hpp"
#include "riscf/phase.hpp"
#include "riscf/rate_model.hpp"

namespace riscf {

// One realization of the small-scale fading.
struct FadingDraw {
    Eigen::MatrixXcd g;  // M x K direct channels
    Eigen::MatrixXcd h;  // N x M, column m = AP m's RIS channel
    Eigen::MatrixXcd z;  // N x K, column k = user k's RIS channel
};

// Draws correlated circularly-symmetric Gaussians via per-matrix
// eigenfactors F with F F^H = R (negative eigenvalues clipped to zero).
class ChannelSampler {
  public:
    explicit ChannelSampler(const NetworkRealization& net);

    // Draw order is fixed: g column-major, then h columns, then z columns.
    FadingDraw sample(std::mt19937_64& rng) const;

  private:
    const NetworkRealization* net_;
    std::vector<Eigen::MatrixXcd> ap_factor_;
    std::vector<Eigen::MatrixXcd> user_factor_;
};

// Draws are organized in fixed-size batches; batch b uses its own stream
// derived from (seed, b), so the mapping from (seed, draw index) to a draw
// never depends on how batches are scheduled across threads.
inline constexpr long kMcBatch = 4096;

std::vector<FadingDraw> sample_channels(const NetworkRealization& net, std::uint64_t seed,
                                        long count);

// u(m,k) = g(m,k) + h_m^H Phi z_k
Eigen::MatrixXcd aggregated_channel(const FadingDraw& draw, const PhaseVector& phase);

// LMMSE estimates from pilot observations:
// uhat(m,k) = c(m,k) (sqrt(p tau_p) sum_{k' in P_k} u(m,k') + pilot_noise(m, group(k)))
// pilot_noise is M x tau_p, unit-variance entries.
Eigen::MatrixXcd lmmse_estimate(const Eigen::MatrixXcd& u, const NetworkRealization& net,
                                const SystemConfig& cfg, const EstimationCoefficients& coeffs,
                                const Eigen::MatrixXcd& pilot_noise);

struct EmpiricalSinr {
    double value = 0.0;
    bool valid = false;  // false when the sampled IF + NZ is not positive
    long draws = 0;
};

// Sample estimate of the use-and-then-forget SINR of user k:
//   DS = rho |E{sum_m uhat*_mk u_mk}|^2
//   IF = rho sum_k' E{|sum_m uhat*_mk u_mk'|^2} - DS
//   NZ = E{sum_m |uhat_mk|^2}
// with expectations replaced by sample means over num_draws fading draws.
EmpiricalSinr empirical_uatf_sinr(int k, const PhaseVector& phase, const NetworkRealization& net,
                                  const SystemConfig& cfg, long num_draws, std::uint64_t seed);

}  // namespace riscf
