#pragma once

#include <Eigen/Dense>

#include "riscf/config.hpp"
#include "riscf/network.hpp"
#include "riscf/phase.hpp"

namespace riscf {

// LMMSE channel-estimation statistics, all M x K:
//   delta(m,k) = beta(m,k) + tr(Phi^H R_m Phi Rt_k)   aggregated-channel variance
//   c(m,k)     = sqrt(p tau_p) delta / (p tau_p sum_{k' in P_k} delta(m,k') + 1)
//   gamma(m,k) = sqrt(p tau_p) delta(m,k) c(m,k)      estimate variance
struct EstimationCoefficients {
    Eigen::MatrixXd delta;
    Eigen::MatrixXd c;
    Eigen::MatrixXd gamma;
};

// The four mutual-interference contributions for one user (all >= 0):
//   gain_cross     rho * sum_{k'} sum_m gamma(m,k) delta(m,k')
//   ris_cross      p tau_p rho * sum_{k'} sum_{k'' in P_k} tr(Y_k Rt_k' Y_k Rt_k'')
//   ris_self       p tau_p rho * sum_{k' in P_k} sum_m c(m,k)^2 tr((Phi^H R_m Phi Rt_k')^2)
//   pilot_coherent p tau_p rho * sum_{k' in P_k, k' != k} (sum_m c(m,k) delta(m,k'))^2
struct MiBreakdown {
    double gain_cross = 0.0;
    double ris_cross = 0.0;
    double ris_self = 0.0;
    double pilot_coherent = 0.0;
    double total() const { return gain_cross + ris_cross + ris_self + pilot_coherent; }
};

struct RateReport {
    Eigen::VectorXd sinr;       // K
    Eigen::VectorXd rate_mbps;  // K
    Eigen::VectorXd mi;         // K, mutual interference per user
    Eigen::VectorXd no;         // K, effective noise per user (sum of gamma)
    double objective_mbps = 0.0;
};

// tr(Phi^H R Phi Rt) evaluated as v^H (R o Rt^T) v with v = exp(j theta),
// O(N^2). Inputs must be Hermitian PSD of matching size; the result is real
// up to rounding (imaginary residue beyond 1e-9 relative throws) and is
// clamped to >= 0.
double ris_trace(const PhaseVector& phase, const Eigen::MatrixXcd& r_ap,
                 const Eigen::MatrixXcd& r_user);

// Y_k = sum_m c_m Phi^H R_m Phi for one user's combining weights c (length M).
Eigen::MatrixXcd aggregate_kernel(const PhaseVector& phase, const NetworkRealization& net,
                                  const Eigen::VectorXd& c);

EstimationCoefficients estimation_coefficients(const PhaseVector& phase,
                                               const NetworkRealization& net,
                                               const SystemConfig& cfg);

MiBreakdown mutual_interference_terms(int k, const PhaseVector& phase,
                                      const NetworkRealization& net, const SystemConfig& cfg,
                                      const EstimationCoefficients& coeffs);

double mutual_interference(int k, const PhaseVector& phase, const NetworkRealization& net,
                           const SystemConfig& cfg, const EstimationCoefficients& coeffs);

// Use-and-then-forget effective SINR of user k for the given phases.
double sinr(int k, const PhaseVector& phase, const NetworkRealization& net,
            const SystemConfig& cfg);

// Weighted sum throughput: rate_k = B (1 - tau_p/tau_c) log2(1 + SINR_k),
// objective = sum_k w_k rate_k. Pure; safe to call concurrently. Throws
// std::invalid_argument when phases leave [-pi, pi] or sizes disagree.
RateReport evaluate_objective(const PhaseVector& phase, const NetworkRealization& net,
                              const SystemConfig& cfg);

}  // namespace riscf
