#include "riscf/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "riscf/rng.hpp"

namespace riscf {

double path_loss(double distance_m, double shadow_db, const SystemConfig& cfg) {
    double d = std::max(distance_m, 1.0);
    double db = cfg.pathloss_intercept_db - 10.0 * cfg.pathloss_exponent * std::log10(d) + shadow_db;
    return std::pow(10.0, db / 10.0);
}

namespace {

double sinc(double x) {
    if (x == 0.0) return 1.0;
    return std::sin(M_PI * x) / (M_PI * x);
}

// Largest divisor of n not exceeding sqrt(n); 1 when n is prime.
int grid_rows(int n) {
    int rows = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
    while (rows > 1 && n % rows != 0) --rows;
    return rows;
}

}  // namespace

Eigen::MatrixXd build_correlation(int n_elements, double spacing_wavelengths) {
    if (n_elements < 1) throw std::invalid_argument("build_correlation: n_elements must be >= 1");
    if (!(spacing_wavelengths > 0.0))
        throw std::invalid_argument("build_correlation: spacing must be positive");

    int rows = grid_rows(n_elements);
    int cols = n_elements / rows;

    Eigen::MatrixXd pos(n_elements, 2);
    for (int n = 0; n < n_elements; ++n) {
        pos(n, 0) = spacing_wavelengths * static_cast<double>(n / cols);
        pos(n, 1) = spacing_wavelengths * static_cast<double>(n % cols);
    }

    Eigen::MatrixXd corr(n_elements, n_elements);
    for (int a = 0; a < n_elements; ++a) {
        corr(a, a) = 1.0;
        for (int b = a + 1; b < n_elements; ++b) {
            double d = std::hypot(pos(a, 0) - pos(b, 0), pos(a, 1) - pos(b, 1));
            double v = sinc(2.0 * d);
            corr(a, b) = v;
            corr(b, a) = v;
        }
    }

    // The sinc kernel is PSD analytically; tolerate only rounding-level
    // negative eigenvalues and clip them away.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
    double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < -1e-10)
        throw std::logic_error("build_correlation: correlation matrix is not PSD");
    if (min_eig < 0.0) {
        Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
        corr = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
        corr = 0.5 * (corr + corr.transpose().eval());
    }
    return corr;
}

std::vector<int> assign_pilots(int num_users, int pilot_len, std::uint64_t seed) {
    if (num_users < 1) throw std::invalid_argument("assign_pilots: num_users must be >= 1");
    if (pilot_len < 1) throw std::invalid_argument("assign_pilots: pilot_len must be >= 1");
    std::vector<int> order(num_users);
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> group(num_users);
    for (int i = 0; i < num_users; ++i) group[order[i]] = i % pilot_len;
    return group;
}

std::vector<int> NetworkRealization::pilot_set(int k) const {
    std::vector<int> set;
    for (int j = 0; j < num_users(); ++j)
        if (pilot_group[j] == pilot_group[k]) set.push_back(j);
    return set;
}

NetworkRealization generate_topology(const SystemConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const int m_aps = cfg.num_aps;
    const int k_users = cfg.num_users;
    const int n_elem = cfg.num_ris_elements;

    NetworkRealization net;

    {
        auto rng = make_rng(derive_seed(seed, stream::positions));
        std::uniform_real_distribution<double> coord(0.0, cfg.area_side_m);
        net.ap_positions.reserve(m_aps);
        for (int m = 0; m < m_aps; ++m) {
            double x = coord(rng), y = coord(rng);
            net.ap_positions.emplace_back(x, y);
        }
        net.user_positions.reserve(k_users);
        for (int k = 0; k < k_users; ++k) {
            double x = coord(rng), y = coord(rng);
            net.user_positions.emplace_back(x, y);
        }
    }

    Eigen::Vector2d ris(cfg.ris_xy()[0], cfg.ris_xy()[1]);

    auto shadow_rng = make_rng(derive_seed(seed, stream::shadowing));
    std::normal_distribution<double> shadow(0.0, cfg.shadowing_std_db);

    // Draw order is fixed: direct links column-major, then AP-RIS, then RIS-user.
    net.beta.resize(m_aps, k_users);
    for (int k = 0; k < k_users; ++k)
        for (int m = 0; m < m_aps; ++m) {
            double d = (net.ap_positions[m] - net.user_positions[k]).norm();
            net.beta(m, k) = path_loss(d, shadow(shadow_rng), cfg);
        }

    Eigen::VectorXd ap_gain(m_aps);
    for (int m = 0; m < m_aps; ++m) {
        double d = (net.ap_positions[m] - ris).norm();
        ap_gain[m] = path_loss(d, shadow(shadow_rng), cfg);
    }
    Eigen::VectorXd user_gain(k_users);
    for (int k = 0; k < k_users; ++k) {
        double d = (net.user_positions[k] - ris).norm();
        user_gain[k] = path_loss(d, shadow(shadow_rng), cfg);
    }

    // A blocked user loses the direct link to every AP at once.
    net.blockage.setConstant(m_aps, k_users, false);
    {
        auto rng = make_rng(derive_seed(seed, stream::blockage));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int k = 0; k < k_users; ++k) {
            if (unit(rng) < cfg.blockage_prob) {
                net.blockage.col(k).setConstant(true);
                net.beta.col(k).setZero();
            }
        }
    }

    Eigen::MatrixXd base = build_correlation(n_elem, cfg.element_spacing);
    net.corr_ap.reserve(m_aps);
    for (int m = 0; m < m_aps; ++m)
        net.corr_ap.emplace_back((ap_gain[m] * base).cast<std::complex<double>>());
    net.corr_user.reserve(k_users);
    for (int k = 0; k < k_users; ++k)
        net.corr_user.emplace_back((user_gain[k] * base).cast<std::complex<double>>());
    net.shared = SharedCorrelation{std::move(base), std::move(ap_gain), std::move(user_gain)};

    net.pilot_group = assign_pilots(k_users, cfg.pilot_len, derive_seed(seed, stream::pilots));
    return net;
}

}  // namespace riscf
