#include "mmspc/electrical.hpp"
#include "mmspc/errors.hpp"

#include <catch_amalgamated.hpp>
#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <random>

using namespace mmspc;
using Catch::Approx;

namespace {

/// Modified nodal analysis of the ladder: every battery is an ideal source in series
/// with its resistance through an internal node; source currents are unknowns.
/// Node layout: H_k = k, L_k = n + k, internal X_k = 2n + k; L_0 is ground.
std::vector<double> mna_oracle(const std::vector<double>& v, const std::vector<double>& r_b,
                               const std::vector<double>& r_sh, const std::vector<double>& r_sl,
                               double i_l) {
    const int n = static_cast<int>(v.size());
    const int nodes = 3 * n;
    const int unknowns = nodes + n;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(unknowns, unknowns);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(unknowns);
    auto stamp_g = [&](int p, int q, double g) {
        a(p, p) += g;
        a(q, q) += g;
        a(p, q) -= g;
        a(q, p) -= g;
    };
    for (int k = 0; k < n; ++k) {
        // Source: X_k - L_k = v_k, current s_k flows L_k -> X_k inside the source.
        const int row = nodes + k;
        a(row, 2 * n + k) = 1.0;
        a(row, n + k) = -1.0;
        b(row) = v[static_cast<std::size_t>(k)];
        a(2 * n + k, row) -= 1.0;  // leaves X_k through the source terminal
        a(n + k, row) += 1.0;
        stamp_g(2 * n + k, k, 1.0 / r_b[static_cast<std::size_t>(k)]);
        if (k + 1 < n) {
            stamp_g(k, k + 1, 1.0 / r_sh[static_cast<std::size_t>(k)]);
            stamp_g(n + k, n + k + 1, 1.0 / r_sl[static_cast<std::size_t>(k)]);
        }
    }
    // Injection at L_0, extraction at H_{n-1}.
    b(n) += i_l;
    b(n - 1) -= i_l;
    // Ground L_0.
    a.row(n).setZero();
    a(n, n) = 1.0;
    b(n) = 0.0;
    const Eigen::VectorXd x = a.fullPivLu().solve(b);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        // Discharge current flows X_k -> H_k through r_b.
        out[static_cast<std::size_t>(k)] = (x(2 * n + k) - x(k)) / r_b[static_cast<std::size_t>(k)];
    }
    return out;
}

std::vector<BatteryModule> modules_from(const std::vector<double>& v, const std::vector<double>& r_b) {
    std::vector<BatteryModule> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        BatteryModule m;
        m.v_b = v[i];
        m.r_b = r_b[i];
        out.push_back(m);
    }
    return out;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b, double scale) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
    return worst;
}

}  // namespace

TEST_CASE("Ideal shares", "[electrical]") {
    const auto mixed = ideal_share(decompose_groups(parse_state("PPS+PS+")));
    const std::vector<double> expected{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.5, 0.5};
    CHECK(mixed == expected);
    CHECK(ideal_share(decompose_groups(parse_state("S+S+S+S+S+"))) == std::vector<double>(5, 1.0));
    CHECK(ideal_share(decompose_groups(parse_state("PPPPB"))) == std::vector<double>(5, 0.0));
}

TEST_CASE("Lone module carries the full current", "[electrical]") {
    const auto mods = modules_from({22.5}, {1.5e-3});
    const auto sys = assemble_system(0, 1, mods, InterconnectResistances::uniform(1, 0.5e-3, 0.5e-3), 7.0);
    REQUIRE(sys.n == 1);
    CHECK(sys.at(0, 0) == 1.0);
    CHECK(sys.rhs[0] == 7.0);
    CHECK(solve_distribution(sys)[0] == Approx(7.0));
}

TEST_CASE("Two identical modules split evenly", "[electrical]") {
    const auto mods = modules_from({22.5, 22.5}, {26.5e-3, 26.5e-3});
    const auto res = InterconnectResistances::uniform(2, 0.75e-3, 0.75e-3);
    const auto i = solve_distribution(assemble_system(0, 2, mods, res, 10.0));
    CHECK(i[0] == Approx(5.0).epsilon(1e-12));
    CHECK(i[1] == Approx(5.0).epsilon(1e-12));
}

TEST_CASE("Three-module matrix follows the loop pattern", "[electrical]") {
    const std::vector<double> v{22.0, 22.1, 22.3};
    const std::vector<double> rb{1e-3, 2e-3, 3e-3};
    const auto mods = modules_from(v, rb);
    InterconnectResistances res{{0.4e-3, 0.6e-3, 0.0}, {0.5e-3, 0.7e-3, 0.0}};
    const double il = 12.0;
    const auto sys = assemble_system(0, 3, mods, res, il);
    // Hand-assembled rows.
    CHECK(sys.at(0, 0) == Approx(-(rb[0] + res.r_sl[0] + res.r_sh[0])));
    CHECK(sys.at(0, 1) == Approx(rb[1]));
    CHECK(sys.at(0, 2) == 0.0);
    CHECK(sys.at(1, 0) == Approx(-(res.r_sh[1] + res.r_sl[1])));
    CHECK(sys.at(1, 1) == Approx(-(rb[1] + res.r_sl[1] + res.r_sh[1])));
    CHECK(sys.at(1, 2) == Approx(rb[2]));
    for (std::size_t c = 0; c < 3; ++c) CHECK(sys.at(2, c) == 1.0);
    CHECK(sys.rhs[0] == Approx(v[1] - v[0] - res.r_sl[0] * il));
    CHECK(sys.rhs[1] == Approx(v[2] - v[1] - res.r_sl[1] * il));
    CHECK(sys.rhs[2] == il);
    const auto mna = mna_oracle(v, rb, res.r_sh, res.r_sl, il);
    CHECK(max_rel(solve_distribution(sys), mna, il) < 1e-9);
}

TEST_CASE("Frozen two-module split favours the higher-voltage module", "[electrical]") {
    // Closed form for two modules:
    // i_0 = (v_0 - v_1 + (r_b + r_sl) I) / (2 r_b + r_sh + r_sl).
    const auto mods = modules_from({22.50, 22.51}, {1.5e-3, 1.5e-3});
    const auto res = InterconnectResistances::uniform(2, 0.5e-3, 0.5e-3);
    const auto i = solve_distribution(assemble_system(0, 2, mods, res, 10.0));
    CHECK(i[0] == Approx(2.5).epsilon(1e-9));
    CHECK(i[1] == Approx(7.5).epsilon(1e-9));
    const auto oracle = nodal_oracle(0, 2, mods, res, 10.0);
    CHECK(oracle[0] == Approx(2.5).epsilon(1e-9));
    CHECK(oracle[1] == Approx(7.5).epsilon(1e-9));
}

TEST_CASE("Five equal modules without rail resistance share evenly", "[electrical]") {
    const auto mods = modules_from(std::vector<double>(5, 22.5), std::vector<double>(5, 26.5e-3));
    const auto res = InterconnectResistances::uniform(5, 0.0, 0.0);
    const auto i = solve_distribution(assemble_system(0, 5, mods, res, 25.0));
    for (double x : i) CHECK(x == Approx(5.0).epsilon(1e-12));
}

TEST_CASE("Rail resistance loads the end modules of a long group", "[electrical]") {
    // Equal cells, nonzero rails: the mid modules see longer shared rail paths.
    const auto mods = modules_from(std::vector<double>(5, 22.5), std::vector<double>(5, 1.5e-3));
    const auto res = InterconnectResistances::uniform(5, 0.75e-3, 0.75e-3);
    const auto i = solve_distribution(assemble_system(0, 5, mods, res, 25.0));
    CHECK(i[0] > 5.0);
    CHECK(i[4] > 5.0);
    CHECK(i[2] < 5.0);
    CHECK(i[0] == Approx(i[4]).epsilon(1e-12));
    CHECK(std::accumulate(i.begin(), i.end(), 0.0) == Approx(25.0).epsilon(1e-12));
}

TEST_CASE("Zero rail resistance reduces to a conductance divider", "[electrical]") {
    const std::vector<double> v{22.5, 22.6};
    const std::vector<double> rb{1e-3, 3e-3};
    const double il = 10.0;
    // Common terminal voltage u: sum (v_k - u) / r_k = I.
    const double g0 = 1 / rb[0];
    const double g1 = 1 / rb[1];
    const double u = (v[0] * g0 + v[1] * g1 - il) / (g0 + g1);
    const auto i = solve_distribution(
        assemble_system(0, 2, modules_from(v, rb), InterconnectResistances::uniform(2, 0, 0), il));
    CHECK(i[0] == Approx((v[0] - u) * g0).epsilon(1e-12));
    CHECK(i[1] == Approx((v[1] - u) * g1).epsilon(1e-12));
}

TEST_CASE("Loop solve, library nodal oracle and test MNA agree on random groups",
          "[electrical][property]") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> vdist(20.0, 25.2);
    std::uniform_real_distribution<double> rdist(0.5e-3, 40e-3);
    std::uniform_real_distribution<double> sdist(0.1e-3, 2e-3);
    std::uniform_real_distribution<double> idist(-60.0, 60.0);
    std::uniform_int_distribution<int> ndist(1, 5);
    for (int trial = 0; trial < 1000; ++trial) {
        const int total = 5;
        const int count = ndist(rng);
        const int first = std::uniform_int_distribution<int>(0, total - count)(rng);
        std::vector<double> v(total), rb(total), rsh(total), rsl(total);
        for (int k = 0; k < total; ++k) {
            v[static_cast<std::size_t>(k)] = vdist(rng);
            rb[static_cast<std::size_t>(k)] = rdist(rng);
            rsh[static_cast<std::size_t>(k)] = sdist(rng);
            rsl[static_cast<std::size_t>(k)] = sdist(rng);
        }
        const double il = idist(rng);
        const auto mods = modules_from(v, rb);
        const InterconnectResistances res{rsh, rsl};
        const auto loop = solve_distribution(
            assemble_system(static_cast<std::size_t>(first), static_cast<std::size_t>(count), mods, res, il));
        const auto nodal = nodal_oracle(static_cast<std::size_t>(first), static_cast<std::size_t>(count), mods, res, il);
        auto sub = [&](const std::vector<double>& x) {
            return std::vector<double>(x.begin() + first, x.begin() + first + count);
        };
        const auto mna = mna_oracle(sub(v), sub(rb), sub(rsh), sub(rsl), il);
        double scale = std::abs(il);
        for (double x : loop) scale = std::max(scale, std::abs(x));
        REQUIRE(max_rel(loop, nodal, scale) < 1e-9);
        REQUIRE(max_rel(loop, mna, scale) < 1e-9);
        const double sum = std::accumulate(loop.begin(), loop.end(), 0.0);
        REQUIRE(std::abs(sum - il) <= 1e-9 * std::max(1.0, std::abs(il)));
    }
}

TEST_CASE("Singular loop system is reported", "[electrical]") {
    ImpedanceSystem sys;
    sys.n = 2;
    sys.matrix = {1.0, 1.0, 1.0, 1.0};
    sys.rhs = {0.0, 1.0};
    CHECK_THROWS_AS(solve_distribution(sys), SingularMatrixError);
}

TEST_CASE("Module currents follow group polarity and bypass", "[electrical]") {
    std::vector<BatteryModule> mods(5);
    const auto res = InterconnectResistances::uniform(5, 0.0, 0.0);
    const auto neg = module_currents(decompose_groups(parse_state("PPS-PS-")), mods, res, 12.0);
    CHECK(neg[0] == Approx(-4.0));
    CHECK(neg[3] == Approx(-6.0));
    const auto byp = module_currents(decompose_groups(parse_state("PPPPB")), mods, res, 12.0);
    for (double x : byp) CHECK(x == 0.0);
}

TEST_CASE("Battery update", "[electrical]") {
    const auto m = make_module(0.5, 6.2, 26.5e-3);
    CHECK(step_battery(m, 0.0, 1e-3).soc == 0.5);
    const auto drained = step_battery(make_module(0.7, 6.2, 26.5e-3), 6.2, 3600.0);
    CHECK(drained.soc == 0.0);
    CHECK(drained.v_b == Approx(20.0));
    CHECK_THROWS_AS(step_battery(m, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_module(0.5, -1.0, 1e-3), std::invalid_argument);

    // Whole periods of a zero-mean sinusoid leave the charge unchanged.
    auto cur = m;
    const double fs = 20000.0;
    for (int k = 0; k < 2000; ++k) {
        cur = step_battery(cur, 25.0 * std::sin(2 * M_PI * 50.0 * k / fs), 1 / fs);
    }
    CHECK(std::abs(cur.soc - 0.5) < 1e-12);
}

TEST_CASE("Open-circuit voltage map", "[electrical]") {
    CHECK(ocv(0.0) == 20.0);
    CHECK(ocv(1.0) == Approx(25.2));
    const double soc_nominal = (22.5 - 20.0) / (25.2 - 20.0);
    CHECK(soc_nominal == Approx(0.48).margin(0.005));
    CHECK(ocv(soc_nominal) == Approx(22.5));
}
