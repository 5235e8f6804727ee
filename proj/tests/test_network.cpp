#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <set>

#include "riscf/config.hpp"
#include "riscf/network.hpp"

using namespace riscf;

namespace {

SystemConfig small_config() {
    SystemConfig cfg;
    cfg.num_aps = 6;
    cfg.num_users = 4;
    cfg.num_ris_elements = 8;
    cfg.pilot_len = 2;
    cfg.area_side_m = 100.0;
    return cfg;
}

}  // namespace

TEST_CASE("path loss matches the log-distance formula") {
    SystemConfig cfg;
    CHECK(path_loss(1.0, 0.0, cfg) == doctest::Approx(std::pow(10.0, -3.53)).epsilon(1e-12));
    CHECK(path_loss(10.0, 0.0, cfg) == doctest::Approx(std::pow(10.0, -7.29)).epsilon(1e-12));
    // A shadow boost of exactly the distance term recovers the 1 m value.
    CHECK(path_loss(10.0, 37.6 * std::log10(10.0), cfg) ==
          doctest::Approx(path_loss(1.0, 0.0, cfg)).epsilon(1e-12));
    // Distances below 1 m clamp to 1 m.
    CHECK(path_loss(0.01, 0.0, cfg) == doctest::Approx(path_loss(1.0, 0.0, cfg)).epsilon(1e-12));
}

TEST_CASE("correlation matrix entries follow the sinc kernel on the grid") {
    // N=4 on a 2x2 grid at quarter-wavelength spacing: adjacent elements sit
    // 0.25 wavelengths apart, diagonal pairs 0.25*sqrt(2).
    Eigen::MatrixXd c = build_correlation(4, 0.25);
    REQUIRE(c.rows() == 4);
    auto sinc = [](double x) { return x == 0.0 ? 1.0 : std::sin(M_PI * x) / (M_PI * x); };
    CHECK(c(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c(0, 1) == doctest::Approx(2.0 / M_PI).epsilon(1e-12));
    CHECK(c(0, 3) == doctest::Approx(sinc(0.5 * std::sqrt(2.0))).epsilon(1e-12));
    CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("correlation degenerate cases") {
    Eigen::MatrixXd one = build_correlation(1, 0.25);
    CHECK(one(0, 0) == doctest::Approx(1.0));

    // Enormous spacing decorrelates everything; the sinc tail decays like
    // 1/x, so at 1e6 wavelengths the off-diagonals sit below 1e-6.
    Eigen::MatrixXd far = build_correlation(6, 1.0e6);
    CHECK((far - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("correlation matrices are PSD") {
    for (int n : {4, 7, 12, 16, 32}) {
        Eigen::MatrixXd c = build_correlation(n, 0.125);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
}

TEST_CASE("pilot assignment is a balanced partition") {
    SUBCASE("orthogonal pilots") {
        auto g = assign_pilots(5, 5, 3);
        std::set<int> used(g.begin(), g.end());
        CHECK(used.size() == 5);  // all singletons
    }
    SUBCASE("ten users on five pilots gives groups of two") {
        auto g = assign_pilots(10, 5, 3);
        std::vector<int> count(5, 0);
        for (int p : g) {
            REQUIRE(p >= 0);
            REQUIRE(p < 5);
            ++count[static_cast<std::size_t>(p)];
        }
        for (int c : count) CHECK(c == 2);
    }
    SUBCASE("single pilot puts everyone in one group") {
        auto g = assign_pilots(3, 1, 3);
        for (int p : g) CHECK(p == 0);
    }
    SUBCASE("group sizes differ by at most one") {
        auto g = assign_pilots(11, 4, 9);
        std::vector<int> count(4, 0);
        for (int p : g) ++count[static_cast<std::size_t>(p)];
        int lo = *std::min_element(count.begin(), count.end());
        int hi = *std::max_element(count.begin(), count.end());
        CHECK(hi - lo <= 1);
    }
}

TEST_CASE("pilot sets include the user itself") {
    SystemConfig cfg = small_config();
    NetworkRealization net = generate_topology(cfg, 11);
    for (int k = 0; k < cfg.num_users; ++k) {
        auto set = net.pilot_set(k);
        CHECK(std::find(set.begin(), set.end(), k) != set.end());
        for (int j : set) CHECK(net.pilot_group[static_cast<std::size_t>(j)] ==
                                net.pilot_group[static_cast<std::size_t>(k)]);
    }
}

TEST_CASE("blockage extremes") {
    SystemConfig cfg = small_config();

    cfg.blockage_prob = 0.0;
    NetworkRealization open_net = generate_topology(cfg, 5);
    CHECK(open_net.beta.minCoeff() > 0.0);
    CHECK_FALSE(open_net.blockage.any());

    cfg.blockage_prob = 1.0;
    NetworkRealization blocked = generate_topology(cfg, 5);
    CHECK(blocked.beta.maxCoeff() == 0.0);
    CHECK(blocked.blockage.all());
}

TEST_CASE("blockage is drawn per user and hits the configured frequency") {
    SystemConfig cfg = small_config();
    cfg.blockage_prob = 0.3;
    int blocked_users = 0, total_users = 0;
    for (std::uint64_t seed = 0; seed < 2500; ++seed) {
        NetworkRealization net = generate_topology(cfg, seed);
        for (int k = 0; k < cfg.num_users; ++k) {
            bool first = net.blockage(0, k);
            // Whole column agrees: blockage belongs to the user.
            for (int m = 0; m < cfg.num_aps; ++m) {
                CHECK(net.blockage(m, k) == first);
                CHECK((net.beta(m, k) == 0.0) == first);
            }
            blocked_users += first ? 1 : 0;
            ++total_users;
        }
    }
    double freq = static_cast<double>(blocked_users) / total_users;
    CHECK(freq == doctest::Approx(0.3).epsilon(0.067));  // +-0.02 absolute
}

TEST_CASE("generated correlation matrices are Hermitian PSD and share one base") {
    SystemConfig cfg = small_config();
    NetworkRealization net = generate_topology(cfg, 99);
    REQUIRE(net.shared.has_value());
    for (int m = 0; m < cfg.num_aps; ++m) {
        const Eigen::MatrixXcd& r = net.corr_ap[static_cast<std::size_t>(m)];
        CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        Eigen::MatrixXcd rebuilt =
            (net.shared->ap_scale[m] * net.shared->base).cast<std::complex<double>>();
        CHECK((r - rebuilt).cwiseAbs().maxCoeff() < 1e-15);
    }
    for (int k = 0; k < cfg.num_users; ++k) {
        const Eigen::MatrixXcd& r = net.corr_user[static_cast<std::size_t>(k)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
}

TEST_CASE("positions stay inside the square and distances drive beta") {
    SystemConfig cfg = small_config();
    NetworkRealization net = generate_topology(cfg, 2);
    for (const auto& p : net.ap_positions) {
        CHECK(p.x() >= 0.0);
        CHECK(p.x() <= cfg.area_side_m);
        CHECK(p.y() >= 0.0);
        CHECK(p.y() <= cfg.area_side_m);
    }
    CHECK(net.beta.minCoeff() >= 0.0);
}

TEST_CASE("same seed regenerates the topology bit-exactly") {
    SystemConfig cfg = small_config();
    cfg.blockage_prob = 0.5;
    NetworkRealization a = generate_topology(cfg, 1234);
    NetworkRealization b = generate_topology(cfg, 1234);
    CHECK((a.beta.array() == b.beta.array()).all());
    CHECK(a.pilot_group == b.pilot_group);
    for (int m = 0; m < cfg.num_aps; ++m)
        CHECK((a.corr_ap[static_cast<std::size_t>(m)].array() ==
               b.corr_ap[static_cast<std::size_t>(m)].array())
                  .all());
    for (int k = 0; k < cfg.num_users; ++k) {
        CHECK((a.corr_user[static_cast<std::size_t>(k)].array() ==
               b.corr_user[static_cast<std::size_t>(k)].array())
                  .all());
        CHECK((a.user_positions[static_cast<std::size_t>(k)].array() ==
               b.user_positions[static_cast<std::size_t>(k)].array())
                  .all());
    }

    NetworkRealization c = generate_topology(cfg, 1235);
    CHECK_FALSE((a.beta.array() == c.beta.array()).all());
}

TEST_CASE("config validation rejects bad fields") {
    SystemConfig cfg;
    cfg.num_aps = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = SystemConfig{};
    cfg.pilot_len = 300;  // exceeds coherence_len
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = SystemConfig{};
    cfg.blockage_prob = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = SystemConfig{};
    cfg.uplink_power_mw = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = SystemConfig{};
    cfg.user_weights = {1.0, -0.5};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    CHECK_NOTHROW(SystemConfig{}.validate());
}

TEST_CASE("ris position defaults to the area center") {
    SystemConfig cfg;
    cfg.area_side_m = 200.0;
    auto xy = cfg.ris_xy();
    CHECK(xy[0] == doctest::Approx(100.0));
    CHECK(xy[1] == doctest::Approx(100.0));
    cfg.ris_position = {10.0, 20.0};
    xy = cfg.ris_xy();
    CHECK(xy[0] == doctest::Approx(10.0));
    CHECK(xy[1] == doctest::Approx(20.0));
}
