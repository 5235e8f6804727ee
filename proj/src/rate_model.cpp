#include "riscf/rate_model.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace riscf {

using cd = std::complex<double>;

namespace {

// Traces of Hermitian-PSD products are real; anything beyond rounding noise
// means the caller fed a non-Hermitian matrix.
double real_checked(cd z, double rel_tol, const char* what) {
    double tol = rel_tol * (std::abs(z.real()) + std::abs(z.imag())) + 1e-12;
    if (std::abs(z.imag()) > tol)
        throw std::runtime_error(std::string(what) + ": imaginary residue exceeds tolerance");
    return z.real();
}

double nonneg(double x) { return x < 0.0 ? 0.0 : x; }

// tr(X * Y) = sum_{a,b} X(a,b) Y(b,a)
cd trace_prod(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y) {
    return (x.array() * y.transpose().array()).sum();
}

// v^H (R o Rt^T) v; uses Rt(b,a) = conj(Rt(a,b)) so both inner walks are
// column-contiguous.
double ris_trace_core(const Eigen::VectorXcd& v, const Eigen::MatrixXcd& r_ap,
                      const Eigen::MatrixXcd& r_user) {
    const Eigen::Index n = v.size();
    cd acc(0.0, 0.0);
    for (Eigen::Index b = 0; b < n; ++b) {
        cd inner(0.0, 0.0);
        for (Eigen::Index a = 0; a < n; ++a)
            inner += std::conj(v[a]) * r_ap(a, b) * std::conj(r_user(a, b));
        acc += inner * v[b];
    }
    return nonneg(real_checked(acc, 1e-9, "ris_trace"));
}

// Everything derived from one phase vector that the per-user terms share.
// When the realization carries the shared-base structure (R_m = a_m C,
// Rt_k = b_k C) the two phase-dependent kernels collapse to two scalars:
//   q_base  = v^H (C o C) v          so tr(Phi^H R_m Phi Rt_k) = a_m b_k q_base
//   t2_base = tr((Phi^H C Phi C)^2)  so tr((Phi^H R_m Phi Rt_k')^2) = a_m^2 b_k'^2 t2_base
struct EvalContext {
    Eigen::VectorXcd v;
    bool structured = false;
    double q_base = 0.0;
    double t2_base = 0.0;
    Eigen::MatrixXcd vouter;  // conj(v) v^T, general path only
};

EvalContext make_context(const PhaseVector& phase, const NetworkRealization& net) {
    EvalContext ctx;
    ctx.v = phase.unit_response();
    if (net.shared) {
        ctx.structured = true;
        const Eigen::MatrixXd& base = net.shared->base;
        const Eigen::Index n = base.rows();

        cd q(0.0, 0.0);
        for (Eigen::Index b = 0; b < n; ++b) {
            cd inner(0.0, 0.0);
            for (Eigen::Index a = 0; a < n; ++a)
                inner += std::conj(ctx.v[a]) * base(a, b) * base(a, b);
            q += inner * ctx.v[b];
        }
        ctx.q_base = nonneg(real_checked(q, 1e-9, "ris_trace"));

        // A = Phi^H C Phi is Hermitian; X = A C is computed as two real GEMMs.
        Eigen::MatrixXd a_re(n, n), a_im(n, n);
        for (Eigen::Index col = 0; col < n; ++col)
            for (Eigen::Index row = 0; row < n; ++row) {
                cd w = std::conj(ctx.v[row]) * ctx.v[col] * base(row, col);
                a_re(row, col) = w.real();
                a_im(row, col) = w.imag();
            }
        Eigen::MatrixXd x_re = a_re * base;
        Eigen::MatrixXd x_im = a_im * base;
        double t2_re = (x_re.array() * x_re.transpose().array()).sum() -
                       (x_im.array() * x_im.transpose().array()).sum();
        double t2_im = (x_re.array() * x_im.transpose().array()).sum() +
                       (x_im.array() * x_re.transpose().array()).sum();
        ctx.t2_base = nonneg(real_checked(cd(t2_re, t2_im), 1e-8, "trace kernel"));
    } else {
        ctx.vouter = ctx.v.conjugate() * ctx.v.transpose();
    }
    return ctx;
}

// tr((Phi^H R Phi Rt)^2) on the general path.
double pair_trace_sq(const Eigen::MatrixXcd& vouter, const Eigen::MatrixXcd& r_ap,
                     const Eigen::MatrixXcd& r_user) {
    Eigen::MatrixXcd a = r_ap.cwiseProduct(vouter);
    Eigen::MatrixXcd x = a * r_user;
    return nonneg(real_checked(trace_prod(x, x), 1e-8, "trace kernel"));
}

void check_shapes(const PhaseVector& phase, const NetworkRealization& net,
                  const SystemConfig& cfg) {
    if (net.num_aps() != cfg.num_aps || net.num_users() != cfg.num_users ||
        net.ris_elements() != cfg.num_ris_elements)
        throw std::invalid_argument("rate model: realization does not match config dimensions");
    if (phase.size() != net.ris_elements())
        throw std::invalid_argument("rate model: phase vector length mismatch");
    if (!phase.in_bounds())
        throw std::invalid_argument("rate model: phase angles outside [-pi, pi]");
    if (static_cast<int>(net.pilot_group.size()) != net.num_users())
        throw std::invalid_argument("rate model: pilot assignment missing");
}

EstimationCoefficients coefficients_in_context(const EvalContext& ctx,
                                               const NetworkRealization& net,
                                               const SystemConfig& cfg) {
    const int m_aps = net.num_aps();
    const int k_users = net.num_users();
    const double ptp = cfg.pilot_snr() * cfg.pilot_len;
    const double sqrt_ptp = std::sqrt(ptp);

    EstimationCoefficients out;
    out.delta.resize(m_aps, k_users);
    if (ctx.structured) {
        out.delta = net.beta +
                    ctx.q_base * (net.shared->ap_scale * net.shared->user_scale.transpose());
    } else {
#pragma omp parallel for schedule(static)
        for (int m = 0; m < m_aps; ++m)
            for (int k = 0; k < k_users; ++k)
                out.delta(m, k) =
                    net.beta(m, k) + ris_trace_core(ctx.v, net.corr_ap[m], net.corr_user[k]);
    }

    out.c.resize(m_aps, k_users);
    out.gamma.resize(m_aps, k_users);
    for (int k = 0; k < k_users; ++k) {
        std::vector<int> set = net.pilot_set(k);
        for (int m = 0; m < m_aps; ++m) {
            double denom = 1.0;
            for (int j : set) denom += ptp * out.delta(m, j);
            out.c(m, k) = sqrt_ptp * out.delta(m, k) / denom;
            out.gamma(m, k) = sqrt_ptp * out.delta(m, k) * out.c(m, k);
        }
    }
    return out;
}

MiBreakdown mi_terms_in_context(int k, const EvalContext& ctx, const NetworkRealization& net,
                                const SystemConfig& cfg, const EstimationCoefficients& coeffs) {
    const int m_aps = net.num_aps();
    const int k_users = net.num_users();
    const double rho = cfg.rho();
    const double ptp_rho = cfg.pilot_snr() * cfg.pilot_len * rho;
    const std::vector<int> set = net.pilot_set(k);

    MiBreakdown mi;

    for (int m = 0; m < m_aps; ++m)
        mi.gain_cross += coeffs.gamma(m, k) * coeffs.delta.row(m).sum();
    mi.gain_cross *= rho;

    if (ctx.structured) {
        const Eigen::VectorXd& a = net.shared->ap_scale;
        const Eigen::VectorXd& b = net.shared->user_scale;
        double s_k = 0.0, s2_k = 0.0;
        for (int m = 0; m < m_aps; ++m) {
            s_k += coeffs.c(m, k) * a[m];
            s2_k += coeffs.c(m, k) * coeffs.c(m, k) * a[m] * a[m];
        }
        double b_all = b.sum();
        double b_set = 0.0, b2_set = 0.0;
        for (int j : set) {
            b_set += b[j];
            b2_set += b[j] * b[j];
        }
        mi.ris_cross = ptp_rho * s_k * s_k * b_all * b_set * ctx.t2_base;
        mi.ris_self = ptp_rho * s2_k * b2_set * ctx.t2_base;
    } else {
        // sum_{k'} sum_{k'' in P_k} tr(Y Rt_k' Y Rt_k'') collapses by
        // bilinearity to tr(Y (sum_k' Rt_k') Y (sum_{k'' in P_k} Rt_k'')).
        Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(net.ris_elements(), net.ris_elements());
        for (int m = 0; m < m_aps; ++m) s += coeffs.c(m, k) * net.corr_ap[m];
        Eigen::MatrixXcd y = s.cwiseProduct(ctx.vouter);

        Eigen::MatrixXcd rt_all = Eigen::MatrixXcd::Zero(y.rows(), y.cols());
        for (int j = 0; j < k_users; ++j) rt_all += net.corr_user[j];
        Eigen::MatrixXcd rt_set = Eigen::MatrixXcd::Zero(y.rows(), y.cols());
        for (int j : set) rt_set += net.corr_user[j];

        Eigen::MatrixXcd x1 = y * rt_all;
        Eigen::MatrixXcd x2 = y * rt_set;
        mi.ris_cross = ptp_rho * nonneg(real_checked(trace_prod(x1, x2), 1e-8, "trace kernel"));

        for (int j : set) {
            double acc = 0.0;
            for (int m = 0; m < m_aps; ++m)
                acc += coeffs.c(m, k) * coeffs.c(m, k) *
                       pair_trace_sq(ctx.vouter, net.corr_ap[m], net.corr_user[j]);
            mi.ris_self += ptp_rho * acc;
        }
    }

    for (int j : set) {
        if (j == k) continue;
        double dot = 0.0;
        for (int m = 0; m < m_aps; ++m) dot += coeffs.c(m, k) * coeffs.delta(m, j);
        mi.pilot_coherent += ptp_rho * dot * dot;
    }
    return mi;
}

double sinr_from_parts(double gamma_sum, double mi_total, double rho) {
    if (gamma_sum <= 0.0) return 0.0;
    return rho * gamma_sum * gamma_sum / (mi_total + gamma_sum);
}

double rate_from_sinr(double s, const SystemConfig& cfg) {
    double prelog = 1.0 - static_cast<double>(cfg.pilot_len) / cfg.coherence_len;
    return cfg.bandwidth_mhz * prelog * std::log2(1.0 + s);
}

}  // namespace

double ris_trace(const PhaseVector& phase, const Eigen::MatrixXcd& r_ap,
                 const Eigen::MatrixXcd& r_user) {
    if (r_ap.rows() != r_ap.cols() || r_user.rows() != r_user.cols() ||
        r_ap.rows() != r_user.rows() || phase.size() != r_ap.rows())
        throw std::invalid_argument("ris_trace: dimension mismatch");
    Eigen::VectorXcd v = phase.unit_response();
    return ris_trace_core(v, r_ap, r_user);
}

Eigen::MatrixXcd aggregate_kernel(const PhaseVector& phase, const NetworkRealization& net,
                                  const Eigen::VectorXd& c) {
    if (c.size() != net.num_aps())
        throw std::invalid_argument("aggregate_kernel: weight vector length mismatch");
    if (phase.size() != net.ris_elements())
        throw std::invalid_argument("aggregate_kernel: phase vector length mismatch");
    const Eigen::Index n = net.ris_elements();
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(n, n);
    for (int m = 0; m < net.num_aps(); ++m) s += c[m] * net.corr_ap[m];
    Eigen::VectorXcd v = phase.unit_response();
    return s.cwiseProduct((v.conjugate() * v.transpose()).eval());
}

EstimationCoefficients estimation_coefficients(const PhaseVector& phase,
                                               const NetworkRealization& net,
                                               const SystemConfig& cfg) {
    check_shapes(phase, net, cfg);
    EvalContext ctx = make_context(phase, net);
    return coefficients_in_context(ctx, net, cfg);
}

MiBreakdown mutual_interference_terms(int k, const PhaseVector& phase,
                                      const NetworkRealization& net, const SystemConfig& cfg,
                                      const EstimationCoefficients& coeffs) {
    check_shapes(phase, net, cfg);
    if (k < 0 || k >= net.num_users())
        throw std::invalid_argument("mutual_interference: user index out of range");
    EvalContext ctx = make_context(phase, net);
    return mi_terms_in_context(k, ctx, net, cfg, coeffs);
}

double mutual_interference(int k, const PhaseVector& phase, const NetworkRealization& net,
                           const SystemConfig& cfg, const EstimationCoefficients& coeffs) {
    return mutual_interference_terms(k, phase, net, cfg, coeffs).total();
}

double sinr(int k, const PhaseVector& phase, const NetworkRealization& net,
            const SystemConfig& cfg) {
    check_shapes(phase, net, cfg);
    if (k < 0 || k >= net.num_users())
        throw std::invalid_argument("sinr: user index out of range");
    EvalContext ctx = make_context(phase, net);
    EstimationCoefficients coeffs = coefficients_in_context(ctx, net, cfg);
    MiBreakdown mi = mi_terms_in_context(k, ctx, net, cfg, coeffs);
    return sinr_from_parts(coeffs.gamma.col(k).sum(), mi.total(), cfg.rho());
}

RateReport evaluate_objective(const PhaseVector& phase, const NetworkRealization& net,
                              const SystemConfig& cfg) {
    check_shapes(phase, net, cfg);
    const int k_users = net.num_users();

    EvalContext ctx = make_context(phase, net);
    EstimationCoefficients coeffs = coefficients_in_context(ctx, net, cfg);

    RateReport report;
    report.sinr.resize(k_users);
    report.rate_mbps.resize(k_users);
    report.mi.resize(k_users);
    report.no.resize(k_users);

#pragma omp parallel for schedule(static)
    for (int k = 0; k < k_users; ++k) {
        MiBreakdown mi = mi_terms_in_context(k, ctx, net, cfg, coeffs);
        report.mi[k] = mi.total();
        report.no[k] = coeffs.gamma.col(k).sum();
        report.sinr[k] = sinr_from_parts(report.no[k], report.mi[k], cfg.rho());
        report.rate_mbps[k] = rate_from_sinr(report.sinr[k], cfg);
    }

    double objective = 0.0;
    for (int k = 0; k < k_users; ++k) objective += cfg.weight(k) * report.rate_mbps[k];
    report.objective_mbps = objective;
    return report;
}

}  // namespace riscf
