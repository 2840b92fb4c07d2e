#include <cmath>
#include <climits>
#include <stdexcept>

#include "doctest.h"
#include "rbill/phase_space.hpp"

using namespace rbill;

namespace {

const Table& base_table() {
    static const Table t(TableConfig{0.36, 0.20, 0.01});
    return t;
}

}  // namespace

TEST_CASE("cross section membership") {
    const Table& t = base_table();
    const double mid = wall_length(t.config(), 2) / 2;
    CHECK(in_cross_section(t, {1, 0.2, 0.3}));
    CHECK(in_cross_section(t, {2, mid, 0.0}));
    CHECK_FALSE(in_cross_section(t, {2, mid, M_PI / 2}));
    CHECK_FALSE(in_cross_section(t, {2, mid, -M_PI / 2}));
    // the clean interval at the midpoint ends where cos(phi) = d
    double edge = std::acos(t.constants().d);
    CHECK(in_cross_section(t, {2, mid, edge - 1e-6}));
    CHECK_FALSE(in_cross_section(t, {2, mid, edge + 1e-6}));
}

TEST_CASE("sample_mu moments") {
    const Table& t = base_table();
    const int n = 200000;
    auto xs = sample_mu(t, n, 21);
    double solid = 0, sc = 0, sc2 = 0, sp = 0, sp2 = 0, dmin = 1.0;
    for (const auto& x : xs) {
        CHECK_UNARY(in_cross_section(t, x));
        if (is_solid(x.wall)) {
            ++solid;
            double c = std::cos(x.phi);
            sc += c;
            sc2 += c * c;
            sp += x.phi;
            sp2 += x.phi * x.phi;
        } else {
            dmin = std::min(dmin, std::cos(x.phi));
        }
    }
    double frac = solid / n, frac_se = std::sqrt(frac * (1 - frac) / n);
    CHECK(std::abs(frac - 4 * M_PI * 0.36 / t.constants().mass) < 3 * frac_se);
    double mc = sc / solid, mc_se = std::sqrt((sc2 / solid - mc * mc) / solid);
    CHECK(std::abs(mc - M_PI / 4) < 3 * mc_se);
    double mp = sp / solid, mp_se = std::sqrt((sp2 / solid - mp * mp) / solid);
    CHECK(std::abs(mp) < 3 * mp_se);
    CHECK(dmin >= t.constants().d - 1e-9);
    CHECK(sample_mu(t, 10, 5) == sample_mu(t, 10, 5));
    CHECK_FALSE(sample_mu(t, 10, 5) == sample_mu(t, 10, 6));
}

TEST_CASE("involution") {
    const Table& t = base_table();
    PhasePoint a = involution(t, {3, 0.1, 0.0});
    CHECK(a == PhasePoint{3, 0.1, 0.0});
    PhasePoint b = involution(t, {3, 0.1, 0.4});
    CHECK(b.wall == 3);
    CHECK(b.r == 0.1);
    CHECK(b.phi == -0.4);
    PhasePoint c = involution(t, {2, 0.05, 0.2});
    CHECK(c.wall == 6);
    CHECK(c.r == doctest::Approx(wall_length(t.config(), 2) - 0.05));
    CHECK(c.phi == 0.2);
    CHECK_THROWS_AS(involution(t, {2, 0.14, 1.5}), std::invalid_argument);

    double worst = 0.0;
    for (const auto& x : sample_mu(t, 100000, 8)) {
        PhasePoint y = involution(t, involution(t, x));
        REQUIRE(y.wall == x.wall);
        worst = std::max({worst, std::abs(y.r - x.r), std::abs(y.phi - x.phi)});
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("cone bounds") {
    const Table& t = base_table();
    const TableConstants& k = t.constants();
    ConeBounds s = cone_bounds(t, {1, 0.2, 0.0});
    CHECK(s.a == doctest::Approx(2.7777777778));
    CHECK(s.b == doctest::Approx(2.7777777778 + 1 / k.tau_min));
    ConeBounds t1 = cone_bounds(t, {4, 0.14, 0.0}), t2 = cone_bounds(t, {4, 0.14, 0.5});
    CHECK(t1.a == t2.a);
    CHECK(t2.b == doctest::Approx(std::cos(0.5) / k.tau_min));
    CHECK(t2.b >= k.d / k.tau_min);
    for (const auto& x : sample_mu(t, 1000000, 9)) {
        ConeBounds cb = cone_bounds(t, x);
        REQUIRE(cb.a < cb.b);
        REQUIRE(cb.a >= k.a_min);
        REQUIRE(cb.b <= k.b_max);
    }
}

TEST_CASE("homogeneity strips") {
    const int k0 = 10;
    CHECK(homogeneity_index({1, 0.1, 0.0}, k0) == 0);
    double phi = M_PI / 2 - 1 / ((k0 + 0.5) * (k0 + 0.5));
    CHECK(homogeneity_index({1, 0.1, phi}, k0) == k0);
    CHECK(homogeneity_index({1, 0.1, -phi}, k0) == -k0);
    CHECK(homogeneity_index({1, 0.1, M_PI / 2}, k0) == INT_MAX);
    CHECK_THROWS(homogeneity_index({1, 0.1, 1.6}, k0));
    Philox rng(3, 3);
    for (int i = 0; i < 100000; ++i) {
        // log-uniform distance to pi/2 covers many strips
        double p = M_PI / 2 - std::pow(10.0, -6.0 * rng.uniform());
        double gap = M_PI / 2 - p;
        int idx = homogeneity_index({1, 0.1, p}, k0);
        if (gap >= 1.0 / (k0 * k0)) {
            REQUIRE(idx == 0);
        } else {
            REQUIRE(idx >= k0);
            REQUIRE(gap < 1.0 / (double(idx) * idx));
            REQUIRE(gap >= 1.0 / (double(idx + 1) * (idx + 1)));
        }
    }
}
