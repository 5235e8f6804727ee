#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace riscf {

// Static system description: sizes, powers, geometry, channel constants.
// Defaults are the full evaluation scale; configs/desk.json holds the small
// profile used by the fast experiments and the acceptance suite.
struct SystemConfig {
    int num_aps = 100;          // M
    int num_users = 10;         // K
    int num_ris_elements = 100; // N
    int pilot_len = 5;          // tau_p, symbols spent on pilots
    int coherence_len = 200;    // tau_c, symbols per coherence interval

    double bandwidth_mhz = 20.0;
    double uplink_power_mw = 100.0;
    double pilot_power_mw = 100.0;
    double noise_power_dbm = -92.0;

    // Per-user rate weights; empty means all ones.
    std::vector<double> user_weights;

    // Probability that a user's direct links to every AP are blocked.
    double blockage_prob = 0.5;

    double area_side_m = 1000.0;
    // RIS location; NaN means the center of the square.
    std::array<double, 2> ris_position{std::nan(""), std::nan("")};
    double element_spacing = 0.25;  // in wavelengths
    double shadowing_std_db = 8.0;

    // Log-distance path loss: beta_dB = intercept - 10*exponent*log10(d) + shadowing.
    double pathloss_intercept_db = -35.3;
    double pathloss_exponent = 3.76;

    std::uint64_t rng_seed = 1;

    double noise_power_mw() const { return std::pow(10.0, (noise_power_dbm - 30.0) / 10.0); }
    // Noise-normalized transmit powers (the SINR expressions assume unit noise).
    double rho() const { return uplink_power_mw / noise_power_mw(); }
    double pilot_snr() const { return pilot_power_mw / noise_power_mw(); }

    double weight(int k) const {
        return user_weights.empty() ? 1.0 : user_weights.at(static_cast<std::size_t>(k));
    }

    std::array<double, 2> ris_xy() const {
        if (std::isnan(ris_position[0]) || std::isnan(ris_position[1]))
            return {area_side_m / 2.0, area_side_m / 2.0};
        return ris_position;
    }

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

}  // namespace riscf
