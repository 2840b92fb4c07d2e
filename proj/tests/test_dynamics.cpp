#include <cmath>

#include "doctest.h"
#include "rbill/checks.hpp"
#include "rbill/sequences.hpp"

using namespace rbill;

namespace {

const Table& base_table() {
    static const Table t(TableConfig{0.36, 0.20, 0.01});
    return t;
}

}  // namespace

TEST_CASE("vertical shot off the white disk") {
    const Table& t = base_table();
    const double len = wall_length(t.config(), 2);
    PhasePoint x{2, len / 2, 0.0};
    ReturnRecord rec = step(t, x, {0.0, 0.0});
    CHECK(rec.n_c == 2);
    CHECK(rec.tau == doctest::Approx(2 * (0.5 - 0.2)));
    CHECK(rec.post.wall == 6);
    CHECK(rec.post.r == doctest::Approx(len / 2));
    CHECK(rec.post.phi == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(norm(rec.displacement) < 1e-12);
    CHECK(rec.white.wall == kWhiteWall);
    CHECK(n_steps(t, x, {0.0, 0.0}) == 2);
    PhasePoint mid = step_extended(t, x, {0.0, 0.0});
    CHECK(mid.wall == kWhiteWall);
    CHECK(mid.phi == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("diagonal period-two orbit") {
    const Table& t = base_table();
    PhasePoint x{1, 0.36 * M_PI / 4, 0.0};
    ReturnRecord rec = step(t, x, {0.0, 0.0});
    CHECK(rec.n_c == 2);
    CHECK(rec.tau == doctest::Approx(2 * (1 / std::sqrt(2.0) - 0.36 - 0.2)));
    CHECK(rec.post.wall == 1);
    CHECK(rec.post.r == doctest::Approx(x.r));
    CHECK(std::abs(rec.post.phi) < 1e-12);
    // moving the white disk away from the corner lengthens the flight
    Vec2 c{0.01 / std::sqrt(2.0), 0.01 / std::sqrt(2.0)};
    CHECK(step(t, x, c).tau == doctest::Approx(2 * (1 / std::sqrt(2.0) - 0.36 - 0.2 + 0.01)));
}

TEST_CASE("returns on sampled orbits") {
    const Table& t = base_table();
    auto xs = sample_mu(t, 50000, 31);
    auto omega = draw_sequence(SequenceModel::iid(0.01, 1), 50000, 2);
    int white = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ReturnRecord rec = step(t, xs[i], omega[i]);
        REQUIRE((rec.n_c == 1 || rec.n_c == 2));
        REQUIRE(n_steps(t, xs[i], omega[i]) == rec.n_c);
        REQUIRE(in_cross_section(t, rec.post));
        REQUIRE(rec.tau >= t.constants().tau_min);
        REQUIRE(rec.sing_margin == doctest::Approx(singularity_distance(t, xs[i], omega[i])));
        white += rec.n_c == 2;
        PhasePoint back = inverse_step(t, rec.post, omega[i]);
        REQUIRE(back.wall == xs[i].wall);
        REQUIRE(std::abs(back.r - xs[i].r) < 1e-9);
        REQUIRE(std::abs(back.phi - xs[i].phi) < 1e-9);
    }
    CHECK(white > 0);
    CHECK(white < 50000);
}

TEST_CASE("reversibility") {
    ReversibilityReport rep = reversibility_check(base_table(), 2000, 5);
    CHECK(rep.wall_mismatches == 0);
    CHECK(rep.max_error < 1e-8);
}

TEST_CASE("singularities") {
    const Table& t = base_table();
    PhasePoint grazing{1, 0.2, M_PI / 2};
    CHECK(singularity_distance(t, grazing, {0.0, 0.0}) < kSingularityBand);
    CHECK_THROWS_AS(step(t, grazing, {0.0, 0.0}), SingularityProximity);
    std::vector<Vec2> omega(5, Vec2{0.0, 0.0});
    try {
        compose(t, grazing, omega, 5);
        FAIL("expected SingularityProximity");
    } catch (const SingularityProximity& e) {
        CHECK(e.index == 0);
    }
    CHECK_THROWS_AS(compose(t, {1, 0.2, 0.0}, omega, 6), std::invalid_argument);
    CHECK(compose(t, {1, 0.2, 0.1}, omega, 0).records.empty());
}

TEST_CASE("tangent map against central differences") {
    const Table& t = base_table();
    Philox rng(77, 0);
    int tested = 0;
    while (tested < 300) {
        PhasePoint x = sample_mu_one(t, rng);
        Vec2 c = uniform_disk(rng, 0.01);
        if (singularity_distance(t, x, c) < 1e-2) continue;
        double a = 2 * M_PI * rng.uniform();
        TangentVector v{std::cos(a), std::sin(a)};
        const double h = 1e-7;
        PhasePoint p = step(t, {x.wall, x.r + h * v.dr, x.phi + h * v.dphi}, c).post;
        PhasePoint m = step(t, {x.wall, x.r - h * v.dr, x.phi - h * v.dphi}, c).post;
        REQUIRE(p.wall == m.wall);
        TangentVector ex = tangent_step(t, x, v, c).v;
        double err = std::hypot((p.r - m.r) / (2 * h) - ex.dr, (p.phi - m.phi) / (2 * h) - ex.dphi) / ex.norm();
        CHECK(err < 1e-4);
        ++tested;
    }
    CHECK_THROWS_AS(tangent_step(t, {1, 0.2, 0.1}, {0.0, 0.0}, {0.0, 0.0}), DegenerateTangent);
}

TEST_CASE("transport_leg is linear") {
    TangentVector u{0.3, -1.1}, w{-0.7, 0.4};
    TangentVector su{u.dr + 2 * w.dr, u.dphi + 2 * w.dphi};
    for (bool reflect : {true, false}) {
        TangentVector a = transport_leg(u, 2.5, 0.3, 0.4, 5.0, -0.2, reflect);
        TangentVector b = transport_leg(w, 2.5, 0.3, 0.4, 5.0, -0.2, reflect);
        TangentVector s = transport_leg(su, 2.5, 0.3, 0.4, 5.0, -0.2, reflect);
        CHECK(s.dr == doctest::Approx(a.dr + 2 * b.dr));
        CHECK(s.dphi == doctest::Approx(a.dphi + 2 * b.dphi));
    }
    // free flight of length tau between flat walls shifts r by tau dphi / cos
    TangentVector f = transport_leg({0.0, 1.0}, 0.0, 0.0, 0.5, 0.0, 0.0, false);
    CHECK(f.dr == doctest::Approx(0.5));
    CHECK(f.dphi == doctest::Approx(1.0));
}

TEST_CASE("unstable cones are invariant and expanded") {
    const Table& t = base_table();
    ConeReport cone = cone_check(t, 2000, 5, 1e-6, 9);
    CHECK(cone.cone_violations == 0);
    CHECK(cone.p_violations == 0);
    CHECK(cone.min_p_factor >= t.constants().Lambda);
    ExpansionReport ex = expansion_check(t, 500, 20, 10);
    CHECK(ex.violations == 0);
    CHECK(ex.min_ratio >= 1.0);
}

TEST_CASE("separation times") {
    const Table& t = base_table();
    auto omega = draw_sequence(SequenceModel::iid(0.01, 1), 400, 3);
    PhasePoint x{1, 0.2, 0.1};
    CHECK_FALSE(separation_time(t, x, x, omega, 400, 10).has_value());
    CHECK(separation_time(t, x, {3, 0.2, 0.1}, omega, 400, 10) == 0);
    CHECK(separation_time(t, x, {1, 0.2, 1.565}, omega, 400, 10) == 0);
    auto s = separation_time(t, x, {1, 0.2 + 1e-8, 0.1 + 3e-8}, omega, 400, 10);
    REQUIRE(s.has_value());
    CHECK(*s > 0);
    SeparationReport rep = separation_check(t, 500, 1000, 4);
    CHECK(rep.exceedances == 0);
    CHECK(rep.fitted_max <= rep.bound);
}
