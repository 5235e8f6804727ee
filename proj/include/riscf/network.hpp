#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "riscf/config.hpp"

namespace riscf {

// Log-distance path loss with lognormal shadowing, linear scale.
// Distances below 1 m are clamped to 1 m.
double path_loss(double distance_m, double shadow_db, const SystemConfig& cfg);

// Spatial correlation of an N-element surface laid out on a near-square grid
// (rows = largest divisor of N that is <= sqrt(N); a prime N degenerates to a
// single row). Entry (n,n') = sinc(2 d / lambda) for element distance d, with
// spacing given in wavelengths. Real symmetric, unit diagonal, PSD up to a
// -1e-10 eigenvalue tolerance (anything below throws, negatives are clipped).
Eigen::MatrixXd build_correlation(int n_elements, double spacing_wavelengths);

// Round-robin assignment of K users to tau_p pilot groups over a shuffled
// order; group sizes differ by at most one.
std::vector<int> assign_pilots(int num_users, int pilot_len, std::uint64_t seed);

// The generated correlation matrices all share one base matrix:
// R_m = ap_scale[m] * base and Rt_k = user_scale[k] * base. The evaluator
// uses this to collapse the trace kernels to scalar combinations; synthetic
// realizations built directly by tests simply leave it unset.
struct SharedCorrelation {
    Eigen::MatrixXd base;     // N x N
    Eigen::VectorXd ap_scale;   // M
    Eigen::VectorXd user_scale; // K
};

// One drawn network: geometry, large-scale coefficients, correlation
// matrices, pilot groups. Immutable after generation; safe to share across
// threads.
struct NetworkRealization {
    std::vector<Eigen::Vector2d> ap_positions;   // M
    std::vector<Eigen::Vector2d> user_positions; // K
    Eigen::MatrixXd beta;                        // M x K direct-link gains (0 when blocked)
    std::vector<Eigen::MatrixXcd> corr_ap;       // M matrices, N x N (AP-RIS)
    std::vector<Eigen::MatrixXcd> corr_user;     // K matrices, N x N (RIS-user)
    std::vector<int> pilot_group;                // K entries in [0, tau_p)
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> blockage; // M x K
    std::optional<SharedCorrelation> shared;

    int num_aps() const { return static_cast<int>(corr_ap.size()); }
    int num_users() const { return static_cast<int>(corr_user.size()); }
    int ris_elements() const {
        return corr_ap.empty() ? 0 : static_cast<int>(corr_ap.front().rows());
    }

    // Users sharing user k's pilot, k included, ascending.
    std::vector<int> pilot_set(int k) const;
};

// Draws AP/user positions uniformly in the square, applies path loss with
// independent shadowing per link, blocks each user's direct links with
// probability cfg.blockage_prob, scales the shared correlation by the two
// RIS-hop gains, and assigns pilots. Deterministic in (cfg, seed).
NetworkRealization generate_topology(const SystemConfig& cfg, std::uint64_t seed);

}  // namespace riscf
