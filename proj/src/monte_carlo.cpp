#include "riscf/monte_carlo.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "riscf/rng.hpp"

namespace riscf {

using cd = std::complex<double>;

namespace {

Eigen::MatrixXcd psd_factor(const Eigen::MatrixXcd& r) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(r);
    Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * ev.asDiagonal();
}

struct GaussianDraws {
    std::mt19937_64* rng;
    std::normal_distribution<double> norm{0.0, 1.0};
    cd next() {
        double re = norm(*rng);
        double im = norm(*rng);
        return cd(re, im) * M_SQRT1_2;
    }
    void fill(Eigen::Ref<Eigen::VectorXcd> v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = next();
    }
};

}  // namespace

ChannelSampler::ChannelSampler(const NetworkRealization& net) : net_(&net) {
    if (net.shared) {
        // One factor of the shared base, rescaled per link.
        Eigen::MatrixXcd base_factor = psd_factor(net.shared->base.cast<cd>());
        ap_factor_.reserve(net.num_aps());
        for (int m = 0; m < net.num_aps(); ++m)
            ap_factor_.push_back(std::sqrt(net.shared->ap_scale[m]) * base_factor);
        user_factor_.reserve(net.num_users());
        for (int k = 0; k < net.num_users(); ++k)
            user_factor_.push_back(std::sqrt(net.shared->user_scale[k]) * base_factor);
    } else {
        ap_factor_.reserve(net.num_aps());
        for (int m = 0; m < net.num_aps(); ++m) ap_factor_.push_back(psd_factor(net.corr_ap[m]));
        user_factor_.reserve(net.num_users());
        for (int k = 0; k < net.num_users(); ++k)
            user_factor_.push_back(psd_factor(net.corr_user[k]));
    }
}

FadingDraw ChannelSampler::sample(std::mt19937_64& rng) const {
    const int m_aps = net_->num_aps();
    const int k_users = net_->num_users();
    const int n = net_->ris_elements();
    GaussianDraws gauss{&rng};

    FadingDraw draw;
    draw.g.resize(m_aps, k_users);
    for (int k = 0; k < k_users; ++k)
        for (int m = 0; m < m_aps; ++m)
            draw.g(m, k) = std::sqrt(net_->beta(m, k)) * gauss.next();

    Eigen::VectorXcd white(n);
    draw.h.resize(n, m_aps);
    for (int m = 0; m < m_aps; ++m) {
        gauss.fill(white);
        draw.h.col(m) = ap_factor_[m] * white;
    }
    draw.z.resize(n, k_users);
    for (int k = 0; k < k_users; ++k) {
        gauss.fill(white);
        draw.z.col(k) = user_factor_[k] * white;
    }
    return draw;
}

std::vector<FadingDraw> sample_channels(const NetworkRealization& net, std::uint64_t seed,
                                        long count) {
    ChannelSampler sampler(net);
    std::vector<FadingDraw> out;
    out.reserve(static_cast<std::size_t>(count));
    for (long b = 0; b * kMcBatch < count; ++b) {
        auto rng = make_rng(derive_seed(seed, stream::mc_batch, static_cast<std::uint64_t>(b)));
        long todo = std::min(kMcBatch, count - b * kMcBatch);
        for (long i = 0; i < todo; ++i) out.push_back(sampler.sample(rng));
    }
    return out;
}

Eigen::MatrixXcd aggregated_channel(const FadingDraw& draw, const PhaseVector& phase) {
    if (phase.size() != draw.h.rows())
        throw std::invalid_argument("aggregated_channel: phase vector length mismatch");
    Eigen::VectorXcd v = phase.unit_response();
    return draw.g + draw.h.adjoint() * (v.asDiagonal() * draw.z);
}

Eigen::MatrixXcd lmmse_estimate(const Eigen::MatrixXcd& u, const NetworkRealization& net,
                                const SystemConfig& cfg, const EstimationCoefficients& coeffs,
                                const Eigen::MatrixXcd& pilot_noise) {
    const int m_aps = net.num_aps();
    const int k_users = net.num_users();
    if (u.rows() != m_aps || u.cols() != k_users)
        throw std::invalid_argument("lmmse_estimate: channel matrix shape mismatch");
    if (pilot_noise.rows() != m_aps || pilot_noise.cols() != cfg.pilot_len)
        throw std::invalid_argument("lmmse_estimate: pilot noise shape mismatch");

    const double amp = std::sqrt(cfg.pilot_snr() * cfg.pilot_len);

    // Per-group pilot observations, then scale by c.
    Eigen::MatrixXcd ysum = Eigen::MatrixXcd::Zero(m_aps, cfg.pilot_len);
    for (int k = 0; k < k_users; ++k) ysum.col(net.pilot_group[k]) += u.col(k);

    Eigen::MatrixXcd uhat(m_aps, k_users);
    for (int k = 0; k < k_users; ++k) {
        int g = net.pilot_group[k];
        for (int m = 0; m < m_aps; ++m)
            uhat(m, k) = coeffs.c(m, k) * (amp * ysum(m, g) + pilot_noise(m, g));
    }
    return uhat;
}

EmpiricalSinr empirical_uatf_sinr(int k, const PhaseVector& phase, const NetworkRealization& net,
                                  const SystemConfig& cfg, long num_draws, std::uint64_t seed) {
    if (k < 0 || k >= net.num_users())
        throw std::invalid_argument("empirical_uatf_sinr: user index out of range");
    if (num_draws < 1)
        throw std::invalid_argument("empirical_uatf_sinr: num_draws must be positive");

    const int k_users = net.num_users();
    EstimationCoefficients coeffs = estimation_coefficients(phase, net, cfg);
    ChannelSampler sampler(net);

    struct BatchSums {
        cd ds{0.0, 0.0};
        Eigen::VectorXd if2;  // per k': sum |uhat_k^H u_k'|^2
        double nz = 0.0;
    };
    const long num_batches = (num_draws + kMcBatch - 1) / kMcBatch;
    std::vector<BatchSums> partial(static_cast<std::size_t>(num_batches));

#pragma omp parallel for schedule(dynamic)
    for (long b = 0; b < num_batches; ++b) {
        auto rng = make_rng(derive_seed(seed, stream::mc_batch, static_cast<std::uint64_t>(b)));
        long todo = std::min(kMcBatch, num_draws - b * kMcBatch);
        BatchSums sums;
        sums.if2 = Eigen::VectorXd::Zero(k_users);
        GaussianDraws gauss{&rng};
        Eigen::MatrixXcd noise(net.num_aps(), cfg.pilot_len);
        for (long i = 0; i < todo; ++i) {
            FadingDraw draw = sampler.sample(rng);
            Eigen::MatrixXcd u = aggregated_channel(draw, phase);
            for (int c = 0; c < noise.cols(); ++c)
                for (int r = 0; r < noise.rows(); ++r) noise(r, c) = gauss.next();
            Eigen::MatrixXcd uhat = lmmse_estimate(u, net, cfg, coeffs, noise);

            Eigen::RowVectorXcd inner = uhat.col(k).adjoint() * u;  // sum_m uhat*_mk u_mk'
            sums.ds += inner[k];
            for (int j = 0; j < k_users; ++j) sums.if2[j] += std::norm(inner[j]);
            sums.nz += uhat.col(k).squaredNorm();
        }
        partial[static_cast<std::size_t>(b)] = std::move(sums);
    }

    // Combine in batch order so the result is independent of scheduling.
    cd ds_sum(0.0, 0.0);
    Eigen::VectorXd if_sum = Eigen::VectorXd::Zero(k_users);
    double nz_sum = 0.0;
    for (const BatchSums& s : partial) {
        ds_sum += s.ds;
        if_sum += s.if2;
        nz_sum += s.nz;
    }

    const double n = static_cast<double>(num_draws);
    const double rho = cfg.rho();
    double ds = rho * std::norm(ds_sum / n);
    double if_total = rho * (if_sum.sum() / n) - ds;
    double nz = nz_sum / n;

    EmpiricalSinr result;
    result.draws = num_draws;
    double denom = if_total + nz;
    if (denom > 0.0) {
        result.valid = true;
        result.value = ds / denom;
    }
    return result;
}

}  // namespace riscf
