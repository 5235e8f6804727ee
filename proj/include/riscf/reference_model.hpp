#pragma once

#include <Eigen/Dense>

#include "riscf/rate_model.hpp"

namespace riscf::reference {

// Serial reference evaluator. Builds the dense phase matrix and every
// Theta_mk = Phi^H R_m Phi Rt_k product explicitly and accumulates the
// interference terms as the plain nested sums, with no kernel restructuring
// and no OpenMP. Kept as the ground truth the optimized path is tested
// against, and as the serial side of the benchmark.

Eigen::MatrixXcd phase_matrix(const PhaseVector& phase);

Eigen::MatrixXcd theta_product(const PhaseVector& phase, const Eigen::MatrixXcd& r_ap,
                               const Eigen::MatrixXcd& r_user);

EstimationCoefficients coefficients(const PhaseVector& phase, const NetworkRealization& net,
                                    const SystemConfig& cfg);

MiBreakdown mutual_interference_terms(int k, const PhaseVector& phase,
                                      const NetworkRealization& net, const SystemConfig& cfg,
                                      const EstimationCoefficients& coeffs);

double sinr(int k, const PhaseVector& phase, const NetworkRealization& net,
            const SystemConfig& cfg);

RateReport evaluate_objective(const PhaseVector& phase, const NetworkRealization& net,
                              const SystemConfig& cfg);

}  // namespace riscf::reference
