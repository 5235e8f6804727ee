#include "riscf/reference_model.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace riscf::reference {

using cd = std::complex<double>;

Eigen::MatrixXcd phase_matrix(const PhaseVector& phase) {
    const int n = phase.size();
    Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) phi(i, i) = std::polar(1.0, phase.theta[i]);
    return phi;
}

Eigen::MatrixXcd theta_product(const PhaseVector& phase, const Eigen::MatrixXcd& r_ap,
                               const Eigen::MatrixXcd& r_user) {
    Eigen::MatrixXcd phi = phase_matrix(phase);
    return phi.adjoint() * r_ap * phi * r_user;
}

EstimationCoefficients coefficients(const PhaseVector& phase, const NetworkRealization& net,
                                    const SystemConfig& cfg) {
    const int m_aps = net.num_aps();
    const int k_users = net.num_users();
    const double ptp = cfg.pilot_snr() * cfg.pilot_len;
    const double sqrt_ptp = std::sqrt(ptp);

    EstimationCoefficients out;
    out.delta.resize(m_aps, k_users);
    for (int m = 0; m < m_aps; ++m)
        for (int k = 0; k < k_users; ++k)
            out.delta(m, k) =
                net.beta(m, k) +
                theta_product(phase, net.corr_ap[m], net.corr_user[k]).trace().real();

    out.c.resize(m_aps, k_users);
    out.gamma.resize(m_aps, k_users);
    for (int m = 0; m < m_aps; ++m)
        for (int k = 0; k < k_users; ++k) {
            double denom = 1.0;
            for (int j : net.pilot_set(k)) denom += ptp * out.delta(m, j);
            out.c(m, k) = sqrt_ptp * out.delta(m, k) / denom;
            out.gamma(m, k) = sqrt_ptp * out.delta(m, k) * out.c(m, k);
        }
    return out;
}

MiBreakdown mutual_interference_terms(int k, const PhaseVector& phase,
                                      const NetworkRealization& net, const SystemConfig& cfg,
                                      const EstimationCoefficients& coeffs) {
    const int m_aps = net.num_aps();
    const int k_users = net.num_users();
    const double rho = cfg.rho();
    const double ptp_rho = cfg.pilot_snr() * cfg.pilot_len * rho;
    const std::vector<int> set = net.pilot_set(k);

    // All Theta_mk' as dense products, indexed [m][k'].
    std::vector<std::vector<Eigen::MatrixXcd>> theta(static_cast<std::size_t>(m_aps));
    for (int m = 0; m < m_aps; ++m) {
        theta[m].reserve(static_cast<std::size_t>(k_users));
        for (int j = 0; j < k_users; ++j)
            theta[m].push_back(theta_product(phase, net.corr_ap[m], net.corr_user[j]));
    }

    MiBreakdown mi;

    for (int j = 0; j < k_users; ++j)
        for (int m = 0; m < m_aps; ++m)
            mi.gain_cross += rho * coeffs.gamma(m, k) * coeffs.delta(m, j);

    for (int j = 0; j < k_users; ++j)
        for (int jj : set) {
            cd acc(0.0, 0.0);
            for (int m = 0; m < m_aps; ++m)
                for (int mm = 0; mm < m_aps; ++mm)
                    acc += coeffs.c(m, k) * coeffs.c(mm, k) *
                           (theta[m][j] * theta[mm][jj]).trace();
            mi.ris_cross += ptp_rho * acc.real();
        }

    for (int j : set)
        for (int m = 0; m < m_aps; ++m)
            mi.ris_self += ptp_rho * coeffs.c(m, k) * coeffs.c(m, k) *
                           (theta[m][j] * theta[m][j]).trace().real();

    for (int j : set) {
        if (j == k) continue;
        double dot = 0.0;
        for (int m = 0; m < m_aps; ++m) dot += coeffs.c(m, k) * coeffs.delta(m, j);
        mi.pilot_coherent += ptp_rho * dot * dot;
    }
    return mi;
}

double sinr(int k, const PhaseVector& phase, const NetworkRealization& net,
            const SystemConfig& cfg) {
    EstimationCoefficients coeffs = coefficients(phase, net, cfg);
    MiBreakdown mi = reference::mutual_interference_terms(k, phase, net, cfg, coeffs);
    double gamma_sum = coeffs.gamma.col(k).sum();
    if (gamma_sum <= 0.0) return 0.0;
    return cfg.rho() * gamma_sum * gamma_sum / (mi.total() + gamma_sum);
}

RateReport evaluate_objective(const PhaseVector& phase, const NetworkRealization& net,
                              const SystemConfig& cfg) {
    if (phase.size() != net.ris_elements())
        throw std::invalid_argument("reference model: phase vector length mismatch");
    if (!phase.in_bounds())
        throw std::invalid_argument("reference model: phase angles outside [-pi, pi]");

    const int k_users = net.num_users();
    EstimationCoefficients coeffs = coefficients(phase, net, cfg);

    RateReport report;
    report.sinr.resize(k_users);
    report.rate_mbps.resize(k_users);
    report.mi.resize(k_users);
    report.no.resize(k_users);
    double prelog = 1.0 - static_cast<double>(cfg.pilot_len) / cfg.coherence_len;
    for (int k = 0; k < k_users; ++k) {
        MiBreakdown mi = reference::mutual_interference_terms(k, phase, net, cfg, coeffs);
        double gamma_sum = coeffs.gamma.col(k).sum();
        report.mi[k] = mi.total();
        report.no[k] = gamma_sum;
        report.sinr[k] = gamma_sum <= 0.0
                             ? 0.0
                             : cfg.rho() * gamma_sum * gamma_sum / (mi.total() + gamma_sum);
        report.rate_mbps[k] = cfg.bandwidth_mhz * prelog * std::log2(1.0 + report.sinr[k]);
    }
    report.objective_mbps = 0.0;
    for (int k = 0; k < k_users; ++k)
        report.objective_mbps += cfg.weight(k) * report.rate_mbps[k];
    return report;
}

}  // namespace riscf::reference
