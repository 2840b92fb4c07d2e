#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rbill/dynamics.hpp"
#include "rbill/sequences.hpp"

namespace rbill {

constexpr int kMaxObsDim = 4;
using ObsVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxObsDim, 1>;

enum class ObservableKind { flight_time_centered, displacement_centered, tabulated };
std::string to_string(ObservableKind kind);
ObservableKind observable_kind_from_string(const std::string& s);

// Vector-valued function on M sampled on a (wall, r, phi) grid, bilinear in
// between. Walls 1..8; r spans the wall, phi spans [-pi/2, pi/2].
class PhaseTable {
public:
    PhaseTable(int dim, int nr, int nphi);
    static PhaseTable from_function(const TableConfig& cfg, int dim, int nr, int nphi,
                                    const std::function<ObsVec(const PhasePoint&)>& f);

    int dim() const { return dim_; }
    int nr() const { return nr_; }
    int nphi() const { return nphi_; }
    double& at(int wall, int ir, int iphi, int comp);
    double at(int wall, int ir, int iphi, int comp) const;
    ObsVec eval(const TableConfig& cfg, const PhasePoint& x) const;

private:
    int dim_, nr_, nphi_;
    std::vector<double> values_;
};

// Per-configuration means: exact entries for specific centerings, otherwise
// the default vector.
struct CenteringTable {
    ObsVec default_mean;
    std::vector<std::pair<Vec2, ObsVec>> entries;
    ObsVec lookup(Vec2 c) const;
    void set(Vec2 c, const ObsVec& mean);
};

struct ObservableSpec {
    ObservableKind kind = ObservableKind::flight_time_centered;
    int dim = 1;
    CenteringTable centering;
    double scale = 1.0;
    // Optional configuration-dependent amplitude 1 + gain . c / gain_eps.
    Vec2 gain;
    double gain_eps = 1.0;
    std::shared_ptr<const PhaseTable> table;
    // Tabulated components evaluated as g(x) - g(F_c x) instead of g(x).
    std::vector<bool> coboundary;

    static ObservableSpec flight_time(const Table& table);
    static ObservableSpec displacement(const Table& table);
    static ObservableSpec tabulated(std::shared_ptr<const PhaseTable> g, std::vector<bool> coboundary = {});

    // Uncentered value of the observable for one return.
    ObsVec raw(const Table& table, const ReturnRecord& rec) const;
    // Centered value f(c, x) with scale and gain applied.
    void evaluate(const Table& table, const ReturnRecord& rec, Vec2 c, double* out) const;
    ObsVec evaluate(const Table& table, const ReturnRecord& rec, Vec2 c) const;
};

struct CenteringEstimate {
    ObsVec mean;
    ObsVec se;
    long long samples = 0;
    long long discards = 0;
};

// Monte Carlo mu-mean of the raw observable at fixed c; stored in obs.centering.
CenteringEstimate estimate_centering(ObservableSpec& obs, Vec2 c, const Table& table, int n_mc, std::uint64_t seed);

ObsVec birkhoff_sum(const Table& table, const PhasePoint& x0, const std::vector<Vec2>& omega, int n,
                    const ObservableSpec& obs);

}  // namespace rbill
