#pragma once

#include <cstdint>
#include <vector>

#include "rbill/rng.hpp"
#include "rbill/table.hpp"

namespace rbill {

// Element of the cross section M (walls 1..8) or of the white disk boundary
// (wall == kWhiteWall), in arclength/angle coordinates. The velocity is
// cos(phi) * normal + sin(phi) * right_of(normal).
struct PhasePoint {
    int wall = 1;
    double r = 0.0;
    double phi = 0.0;
    bool operator==(const PhasePoint&) const = default;
};

struct TangentVector {
    double dr = 0.0;
    double dphi = 0.0;
    // dphi/dr with +-infinity for dr == 0.
    double slope() const;
    double norm() const;
};

Vec2 velocity_at(const WallPoint& wp, double phi);
Vec2 phase_velocity(const TableConfig& cfg, const PhasePoint& x, Vec2 c = {});
double angle_from_velocity(Vec2 normal, Vec2 v);

bool in_cross_section(const Table& table, const PhasePoint& x);

PhasePoint sample_mu_one(const Table& table, Philox& rng);
std::vector<PhasePoint> sample_mu(const Table& table, int count, std::uint64_t seed);

PhasePoint involution(const Table& table, const PhasePoint& x);

struct ConeBounds {
    double a = 0.0;
    double b = 0.0;
};
ConeBounds cone_bounds(const Table& table, const PhasePoint& x);

// 0 in the central strip, +-k in H_{+-k}; INT_MAX magnitude at |phi| = pi/2.
int homogeneity_index(const PhasePoint& x, int k0);

}  // namespace rbill
