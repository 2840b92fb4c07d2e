#include <cmath>

#include "doctest.h"
#include "rbill/sequences.hpp"

using namespace rbill;

namespace {

Eigen::MatrixXd two_state() {
    Eigen::MatrixXd P(2, 2);
    P << 0.8, 0.2, 0.2, 0.8;
    return P;
}

}  // namespace

TEST_CASE("Philox4x32-10 known answer") {
    // Random123 reference vector for counter 0 and key 0
    Philox g(0, 0, 0);
    CHECK(g() == 0x6627e8d5e169c58dull);
    CHECK(g() == 0xbc57ac4c9b00dbd8ull);
    Philox a(5, 1, kPurposeStart), b(5, 1, kPurposeStart), c(5, 2, kPurposeStart), d(5, 1, kPurposeSequence);
    std::uint64_t va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
    Philox u(9, 9);
    for (int i = 0; i < 10000; ++i) {
        double x = u.uniform(), y = u.uniform_open();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        REQUIRE(y > 0.0);
        REQUIRE(y < 1.0);
    }
}

TEST_CASE("model admissibility") {
    CHECK_NOTHROW(SequenceModel::fixed({0.01, 0.0}, 0.01));
    CHECK_NOTHROW(SequenceModel::fixed({0.01 * std::cos(1.0), 0.01 * std::sin(1.0)}, 0.01));
    CHECK_THROWS_AS(SequenceModel::fixed({0.011, 0.0}, 0.01), ModelError);
    CHECK_THROWS_AS(SequenceModel::iid(0.0), ModelError);
    CHECK_THROWS_AS(SequenceModel::markov({{0.02, 0.0}, {0.0, 0.0}}, two_state(), 0.01), ModelError);
    Eigen::MatrixXd bad(2, 2);
    bad << 0.5, 0.4, 0.2, 0.8;
    CHECK_THROWS_AS(SequenceModel::markov({{0.01, 0.0}, {0.0, 0.0}}, bad, 0.01), ModelError);
    Eigen::MatrixXd periodic(2, 2);
    periodic << 0.0, 1.0, 1.0, 0.0;
    CHECK_FALSE(is_primitive(periodic));
    CHECK_THROWS_AS(SequenceModel::markov({{0.01, 0.0}, {0.0, 0.0}}, periodic, 0.01), ModelError);
    Eigen::VectorXd init(2);
    init << 0.7, 0.2;
    CHECK_THROWS_AS(SequenceModel::markov_nonstationary({{0.01, 0.0}, {0.0, 0.0}}, two_state(), init, 0.01),
                    ModelError);
    CHECK(sequence_kind_from_string(to_string(SequenceKind::finite_markov)) == SequenceKind::finite_markov);
    CHECK_THROWS_AS(sequence_kind_from_string("brownian"), ModelError);
}

TEST_CASE("fixed and iid sequences") {
    auto f = draw_sequence(SequenceModel::fixed({0.003, -0.004}, 0.01), 100, 1);
    for (auto c : f) CHECK(c == Vec2{0.003, -0.004});
    const int n = 200000;
    auto s = draw_sequence(SequenceModel::iid(0.01, 7), n, 0);
    double mx = 0, my = 0, r2 = 0, r4 = 0;
    for (auto c : s) {
        REQUIRE(norm(c) <= 0.01);
        mx += c.x;
        my += c.y;
        r2 += norm2(c);
        r4 += norm2(c) * norm2(c);
    }
    mx /= n;
    my /= n;
    r2 /= n;
    r4 /= n;
    double se_x = 0.01 / 2 / std::sqrt(double(n));
    CHECK(std::abs(mx) < 3 * se_x);
    CHECK(std::abs(my) < 3 * se_x);
    // E|c|^2 = eps^2 / 2 for the uniform disk
    CHECK(std::abs(r2 - 0.5e-4) < 3 * std::sqrt((r4 - r2 * r2) / n));
    CHECK(draw_sequence(SequenceModel::iid(0.01, 7), 50, 3) == draw_sequence(SequenceModel::iid(0.01, 7), 50, 3));
    CHECK_FALSE(draw_sequence(SequenceModel::iid(0.01, 7), 50, 3) == draw_sequence(SequenceModel::iid(0.01, 7), 50, 4));
    CHECK_THROWS(draw_sequence(SequenceModel::iid(0.01), 0, 0));
}

TEST_CASE("markov chain sequences") {
    Eigen::MatrixXd P(3, 3);
    P << 0.6, 0.3, 0.1, 0.1, 0.6, 0.3, 0.3, 0.1, 0.6;
    std::vector<Vec2> states{{0.01, 0.0}, {0.0, 0.01}, {0.0, -0.01}};
    auto model = SequenceModel::markov(states, P, 0.01, 3);
    Eigen::VectorXd pi = stationary_distribution(P);
    CHECK(pi(0) == doctest::Approx(1.0 / 3));
    CHECK((pi.transpose() * P - pi.transpose()).norm() < 1e-12);

    auto index = [&](Vec2 c) {
        for (int i = 0; i < 3; ++i)
            if (c == states[i]) return i;
        return -1;
    };
    const int n = 300000;
    auto seq = draw_sequence(model, n, 1);
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i + 1 < n; ++i) counts(index(seq[i]), index(seq[i + 1])) += 1;
    for (int i = 0; i < 3; ++i) {
        double row = counts.row(i).sum();
        for (int j = 0; j < 3; ++j) {
            double p = counts(i, j) / row;
            CHECK(std::abs(p - P(i, j)) < 4 * std::sqrt(P(i, j) * (1 - P(i, j)) / row));
        }
    }

    Eigen::VectorXd init(2);
    init << 1.0, 0.0;
    auto ns = SequenceModel::markov_nonstationary({{0.01, 0.0}, {-0.01, 0.0}}, two_state(), init, 0.01, 5);
    int first_plus = 0, second_plus = 0;
    for (int s = 0; s < 2000; ++s) {
        auto w = draw_sequence(ns, 2, s);
        first_plus += w[0].x > 0;
        second_plus += w[1].x > 0;
    }
    CHECK(first_plus == 2000);
    CHECK(std::abs(second_plus / 2000.0 - 0.8) < 4 * std::sqrt(0.16 / 2000));
}

TEST_CASE("maximal correlation of a finite chain") {
    // symmetric two-state chain: second eigenvalue 0.6
    for (int k = 0; k <= 10; ++k) CHECK(markov_rho(two_state(), k) == doctest::Approx(std::pow(0.6, k)).epsilon(1e-10));
    Eigen::MatrixXd iid(2, 2);
    iid << 0.3, 0.7, 0.3, 0.7;
    CHECK(markov_rho(iid, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(markov_rho(iid, 0) == doctest::Approx(1.0));
}

TEST_CASE("shift_average") {
    std::vector<double> v{1.0, 2.0, 6.0, 100.0};
    CHECK(shift_average(v, 3) == doctest::Approx(3.0));
    CHECK(shift_average(v, 1) == 1.0);
    CHECK_THROWS(shift_average(v, 0));
    CHECK_THROWS(shift_average(v, 5));
    std::vector<Eigen::Vector2d> m{{1.0, 0.0}, {3.0, 2.0}};
    CHECK(shift_average(m, 2).isApprox(Eigen::Vector2d(2.0, 1.0)));
}
