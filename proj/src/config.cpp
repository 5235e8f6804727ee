#include "riscf/config.hpp"

#include <stdexcept>

namespace riscf {

void SystemConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("SystemConfig: " + msg); };
    if (num_aps < 1) fail("num_aps must be >= 1");
    if (num_users < 1) fail("num_users must be >= 1");
    if (num_ris_elements < 1) fail("num_ris_elements must be >= 1");
    if (pilot_len < 1) fail("pilot_len must be >= 1");
    if (coherence_len < pilot_len) fail("coherence_len must be >= pilot_len");
    if (!(bandwidth_mhz > 0.0)) fail("bandwidth_mhz must be positive");
    if (!(uplink_power_mw > 0.0)) fail("uplink_power_mw must be positive");
    if (!(pilot_power_mw > 0.0)) fail("pilot_power_mw must be positive");
    if (!user_weights.empty()) {
        if (static_cast<int>(user_weights.size()) != num_users)
            fail("user_weights must have num_users entries");
        for (double w : user_weights)
            if (!(w >= 0.0)) fail("user_weights must be nonnegative");
    }
    if (!(blockage_prob >= 0.0 && blockage_prob <= 1.0)) fail("blockage_prob must be in [0,1]");
    if (!(area_side_m > 0.0)) fail("area_side_m must be positive");
    if (!(element_spacing > 0.0)) fail("element_spacing must be positive");
    if (!(shadowing_std_db >= 0.0)) fail("shadowing_std_db must be nonnegative");
    if (!(pathloss_exponent > 0.0)) fail("pathloss_exponent must be positive");
}

}  // namespace riscf
