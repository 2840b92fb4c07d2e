#include "rbill/phase_space.hpp"

#include <climits>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rbill {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;
}  // namespace

double TangentVector::slope() const {
    if (dr == 0.0) return dphi >= 0.0 ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
    return dphi / dr;
}

double TangentVector::norm() const { return std::hypot(dr, dphi); }

Vec2 velocity_at(const WallPoint& wp, double phi) {
    return wp.normal * std::cos(phi) + right_of(wp.normal) * std::sin(phi);
}

Vec2 phase_velocity(const TableConfig& cfg, const PhasePoint& x, Vec2 c) {
    return velocity_at(wall_chart(cfg, x.wall, x.r, c), x.phi);
}

double angle_from_velocity(Vec2 normal, Vec2 v) {
    return std::atan2(dot(v, right_of(normal)), dot(v, normal));
}

bool in_cross_section(const Table& table, const PhasePoint& x) {
    if (x.wall < 1 || x.wall > 8) return false;
    if (!(std::abs(x.phi) <= kHalfPi)) return false;
    const auto& cfg = table.config();
    if (!(x.r >= 0.0 && x.r <= wall_length(cfg, x.wall))) return false;
    if (is_solid(x.wall)) return true;
    WallPoint wp = wall_chart(cfg, x.wall, x.r);
    return clean_pass(cfg, wp.point, velocity_at(wp, x.phi));
}

PhasePoint sample_mu_one(const Table& table, Philox& rng) {
    const auto& cfg = table.config();
    double ls = wall_length(cfg, 1);
    double lt = wall_length(cfg, 2);
    double total = 4.0 * (ls + lt);
    for (;;) {
        double u = rng.uniform() * total;
        int k = static_cast<int>(u / (ls + lt));
        if (k > 3) k = 3;
        double rem = u - k * (ls + lt);
        PhasePoint x;
        if (rem < ls) {
            x.wall = 2 * k + 1;
            x.r = rem;
        } else {
            x.wall = 2 * k + 2;
            x.r = std::min(rem - ls, lt);
        }
        x.phi = (rng.uniform() - 0.5) * kPi;
        if (rng.uniform() >= std::cos(x.phi)) continue;
        if (is_transparent(x.wall) && !in_cross_section(table, x)) continue;
        return x;
    }
}

std::vector<PhasePoint> sample_mu(const Table& table, int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample_mu: count must be positive");
    Philox rng(seed, 0, kPurposeSampling);
    std::vector<PhasePoint> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(sample_mu_one(table, rng));
    return out;
}

PhasePoint involution(const Table& table, const PhasePoint& x) {
    if (x.wall == kWhiteWall) return {x.wall, x.r, -x.phi};
    if (!in_cross_section(table, x)) throw std::invalid_argument("involution: point not in the cross section");
    if (is_solid(x.wall)) return {x.wall, x.r, -x.phi};
    return {opposite_wall(x.wall), wall_length(table.config(), x.wall) - x.r, x.phi};
}

ConeBounds cone_bounds(const Table& table, const PhasePoint& x) {
    const auto& k = table.constants();
    double c = std::cos(x.phi);
    switch (wall_kind(x.wall)) {
        case WallKind::solid: return {k.kappa_gray, k.kappa_gray + c / k.tau_min};
        case WallKind::white: return {k.kappa_white, k.kappa_white + c / k.tau_min};
        case WallKind::transparent: return {k.d / (k.tau_max + 1.0 / k.kappa_min), c / k.tau_min};
    }
    return {};
}

int homogeneity_index(const PhasePoint& x, int k0) {
    if (k0 < 2) throw std::invalid_argument("homogeneity_index: k0 must be at least 2");
    double a = std::abs(x.phi);
    if (!(a <= kHalfPi)) throw std::invalid_argument("homogeneity_index: |phi| exceeds pi/2");
    double delta = kHalfPi - a;
    double k0d = static_cast<double>(k0);
    if (delta >= 1.0 / (k0d * k0d)) return 0;
    int sign = x.phi > 0.0 ? 1 : -1;
    if (delta <= 0.0) return sign * INT_MAX;
    double guess = std::ceil(1.0 / std::sqrt(delta)) - 1.0;
    if (guess > static_cast<double>(INT_MAX - 2)) return sign * INT_MAX;
    long long k = static_cast<long long>(guess);
    // pi/2 - k^-2 < |phi| <= pi/2 - (k+1)^-2, i.e. (k+1)^-2 <= delta < k^-2
    auto lower = [](long long j) { return 1.0 / (static_cast<double>(j) * static_cast<double>(j)); };
    while (k > k0 && !(delta < lower(k))) --k;
    while (!(lower(k + 1) <= delta)) ++k;
    if (k < k0) k = k0;
    return sign * static_cast<int>(k);
}

}  // namespace rbill
