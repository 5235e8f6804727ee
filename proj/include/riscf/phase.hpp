#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "riscf/rng.hpp"

namespace riscf {

// RIS phase configuration, one angle per element, kept in [-pi, pi].
struct PhaseVector {
    Eigen::ArrayXd theta;

    PhaseVector() = default;
    explicit PhaseVector(Eigen::ArrayXd t) : theta(std::move(t)) {}

    int size() const { return static_cast<int>(theta.size()); }

    bool in_bounds() const {
        return (theta >= -M_PI).all() && (theta <= M_PI).all();
    }

    // Unit-modulus element responses exp(j*theta_n).
    Eigen::VectorXcd unit_response() const {
        Eigen::VectorXcd v(theta.size());
        for (Eigen::Index n = 0; n < theta.size(); ++n)
            v[n] = std::polar(1.0, theta[n]);
        return v;
    }
};

// Maps a unit draw to an angle: 0 -> -pi, 0.5 -> 0, 1 -> pi.
inline double phase_from_unit(double alpha) { return -M_PI + 2.0 * M_PI * alpha; }

// Wraps an angle into [-pi, pi): ((x + pi) mod 2pi) - pi.
inline double wrap_phase(double x) {
    double y = std::fmod(x + M_PI, 2.0 * M_PI);
    if (y < 0.0) y += 2.0 * M_PI;
    return y - M_PI;
}

inline void wrap_phases(Eigen::ArrayXd& theta) {
    for (Eigen::Index n = 0; n < theta.size(); ++n) theta[n] = wrap_phase(theta[n]);
}

inline PhaseVector random_phase(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::ArrayXd t(n);
    for (int i = 0; i < n; ++i) t[i] = phase_from_unit(unit(rng));
    return PhaseVector(std::move(t));
}

}  // namespace riscf
