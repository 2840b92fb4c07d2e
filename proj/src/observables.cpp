#include "rbill/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rbill {

std::string to_string(ObservableKind kind) {
    switch (kind) {
        case ObservableKind::flight_time_centered: return "flight_time_centered";
        case ObservableKind::displacement_centered: return "displacement_centered";
        case ObservableKind::tabulated: return "tabulated";
    }
    return "?";
}

ObservableKind observable_kind_from_string(const std::string& s) {
    if (s == "flight_time_centered" || s == "flight_time") return ObservableKind::flight_time_centered;
    if (s == "displacement_centered" || s == "displacement") return ObservableKind::displacement_centered;
    if (s == "tabulated") return ObservableKind::tabulated;
    throw std::invalid_argument("unknown observable kind: " + s);
}

PhaseTable::PhaseTable(int dim, int nr, int nphi) : dim_(dim), nr_(nr), nphi_(nphi) {
    if (dim < 1 || dim > kMaxObsDim) throw std::invalid_argument("PhaseTable: unsupported dimension");
    if (nr < 2 || nphi < 2) throw std::invalid_argument("PhaseTable: grid needs at least 2 nodes per axis");
    values_.assign(static_cast<std::size_t>(8) * nr * nphi * dim, 0.0);
}

double& PhaseTable::at(int wall, int ir, int iphi, int comp) {
    return values_[((static_cast<std::size_t>(wall - 1) * nr_ + ir) * nphi_ + iphi) * dim_ + comp];
}

double PhaseTable::at(int wall, int ir, int iphi, int comp) const {
    return values_[((static_cast<std::size_t>(wall - 1) * nr_ + ir) * nphi_ + iphi) * dim_ + comp];
}

PhaseTable PhaseTable::from_function(const TableConfig& cfg, int dim, int nr, int nphi,
                                     const std::function<ObsVec(const PhasePoint&)>& f) {
    PhaseTable t(dim, nr, nphi);
    for (int wall = 1; wall <= 8; ++wall) {
        double len = wall_length(cfg, wall);
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nphi; ++j) {
                PhasePoint x{wall, len * i / (nr - 1), std::numbers::pi * (static_cast<double>(j) / (nphi - 1) - 0.5)};
                ObsVec v = f(x);
                for (int c = 0; c < dim; ++c) t.at(wall, i, j, c) = v(c);
            }
    }
    return t;
}

ObsVec PhaseTable::eval(const TableConfig& cfg, const PhasePoint& x) const {
    if (x.wall < 1 || x.wall > 8) throw std::invalid_argument("PhaseTable: point not on a wall of M");
    double u = std::clamp(x.r / wall_length(cfg, x.wall), 0.0, 1.0) * (nr_ - 1);
    double w = std::clamp(x.phi / std::numbers::pi + 0.5, 0.0, 1.0) * (nphi_ - 1);
    int i = std::min(static_cast<int>(u), nr_ - 2);
    int j = std::min(static_cast<int>(w), nphi_ - 2);
    double fu = u - i, fw = w - j;
    ObsVec out(dim_);
    for (int c = 0; c < dim_; ++c)
        out(c) = (1 - fu) * (1 - fw) * at(x.wall, i, j, c) + fu * (1 - fw) * at(x.wall, i + 1, j, c) +
                 (1 - fu) * fw * at(x.wall, i, j + 1, c) + fu * fw * at(x.wall, i + 1, j + 1, c);
    return out;
}

ObsVec CenteringTable::lookup(Vec2 c) const {
    for (const auto& [key, mean] : entries)
        if (key == c) return mean;
    return default_mean;
}

void CenteringTable::set(Vec2 c, const ObsVec& mean) {
    for (auto& [key, m] : entries)
        if (key == c) {
            m = mean;
            return;
        }
    entries.emplace_back(c, mean);
}

ObservableSpec ObservableSpec::flight_time(const Table& table) {
    ObservableSpec s;
    s.kind = ObservableKind::flight_time_centered;
    s.dim = 1;
    s.centering.default_mean = ObsVec::Constant(1, table.constants().mean_flight_time);
    s.gain_eps = table.eps();
    return s;
}

ObservableSpec ObservableSpec::displacement(const Table& table) {
    ObservableSpec s;
    s.kind = ObservableKind::displacement_centered;
    s.dim = 2;
    s.centering.default_mean = ObsVec::Zero(2);
    s.gain_eps = table.eps();
    return s;
}

ObservableSpec ObservableSpec::tabulated(std::shared_ptr<const PhaseTable> g, std::vector<bool> coboundary) {
    if (!g) throw std::invalid_argument("tabulated observable needs a table");
    ObservableSpec s;
    s.kind = ObservableKind::tabulated;
    s.dim = g->dim();
    s.table = std::move(g);
    if (coboundary.empty()) coboundary.assign(s.dim, false);
    if (static_cast<int>(coboundary.size()) != s.dim)
        throw std::invalid_argument("tabulated observable: coboundary mask size mismatch");
    s.coboundary = std::move(coboundary);
    s.centering.default_mean = ObsVec::Zero(s.dim);
    return s;
}

ObsVec ObservableSpec::raw(const Table& t, const ReturnRecord& rec) const {
    ObsVec v(dim);
    switch (kind) {
        case ObservableKind::flight_time_centered: v(0) = rec.tau; break;
        case ObservableKind::displacement_centered:
            v(0) = rec.displacement.x;
            v(1) = rec.displacement.y;
            break;
        case ObservableKind::tabulated: {
            v = table->eval(t.config(), rec.pre);
            bool any = std::find(coboundary.begin(), coboundary.end(), true) != coboundary.end();
            if (any) {
                ObsVec post = table->eval(t.config(), rec.post);
                for (int i = 0; i < dim; ++i)
                    if (coboundary[i]) v(i) -= post(i);
            }
            break;
        }
    }
    return v;
}

void ObservableSpec::evaluate(const Table& t, const ReturnRecord& rec, Vec2 c, double* out) const {
    ObsVec v = raw(t, rec) - centering.lookup(c);
    double factor = scale;
    if (gain.x != 0.0 || gain.y != 0.0) factor *= 1.0 + dot(gain, c) / gain_eps;
    for (int i = 0; i < dim; ++i) out[i] = factor * v(i);
}

ObsVec ObservableSpec::evaluate(const Table& t, const ReturnRecord& rec, Vec2 c) const {
    ObsVec v(dim);
    evaluate(t, rec, c, v.data());
    return v;
}

CenteringEstimate estimate_centering(ObservableSpec& obs, Vec2 c, const Table& table, int n_mc, std::uint64_t seed) {
    if (n_mc < 10000) throw std::invalid_argument("estimate_centering: n_mc must be at least 1e4");
    const int batches = 50;
    Philox rng(seed, 0, kPurposeStart);
    Eigen::MatrixXd batch_sum = Eigen::MatrixXd::Zero(obs.dim, batches);
    Eigen::VectorXd batch_n = Eigen::VectorXd::Zero(batches);
    CenteringEstimate est;
    for (int i = 0; i < n_mc; ++i) {
        ReturnRecord rec;
        for (;;) {
            PhasePoint x = sample_mu_one(table, rng);
            try {
                rec = step(table, x, c);
                break;
            } catch (const SingularityProximity&) {
                ++est.discards;
            }
        }
        int b = static_cast<int>(static_cast<long long>(i) * batches / n_mc);
        batch_sum.col(b) += obs.raw(table, rec).cast<double>();
        batch_n(b) += 1.0;
    }
    Eigen::MatrixXd bm = batch_sum.array().rowwise() / batch_n.transpose().array();
    Eigen::VectorXd mean = batch_sum.rowwise().sum() / static_cast<double>(n_mc);
    est.mean = mean;
    est.se = ObsVec(obs.dim);
    for (int k = 0; k < obs.dim; ++k) {
        double var = (bm.row(k).array() - bm.row(k).mean()).square().sum() / (batches - 1);
        est.se(k) = std::sqrt(var / batches);
    }
    est.samples = n_mc;
    ObsVec stored = obs.centering.lookup(c);
    if (stored.size() != obs.dim) stored = ObsVec::Zero(obs.dim);
    for (int k = 0; k < obs.dim; ++k)
        if (obs.kind != ObservableKind::tabulated || !obs.coboundary[k]) stored(k) = est.mean(k);
    obs.centering.set(c, stored);
    return est;
}

ObsVec birkhoff_sum(const Table& table, const PhasePoint& x0, const std::vector<Vec2>& omega, int n,
                    const ObservableSpec& obs) {
    if (n < 0 || static_cast<std::size_t>(n) > omega.size())
        throw std::invalid_argument("birkhoff_sum: sequence shorter than n");
    ObsVec sum = ObsVec::Zero(obs.dim);
    ObsVec v(obs.dim);
    PhasePoint x = x0;
    for (int i = 0; i < n; ++i) {
        ReturnRecord rec;
        try {
            rec = step(table, x, omega[i]);
        } catch (const SingularityProximity& e) {
            throw SingularityProximity(e.margin, i);
        }
        obs.evaluate(table, rec, omega[i], v.data());
        sum += v;
        x = rec.post;
    }
    return sum;
}

}  // namespace rbill
