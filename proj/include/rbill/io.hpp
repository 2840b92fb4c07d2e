#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include "json.hpp"
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbill/dynamics.hpp"
#include "rbill/observables.hpp"
#include "rbill/sequences.hpp"
#include "rbill/statistics.hpp"

namespace rbill {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Resolved run configuration; every field carries its default so the JSON
// echo of a run is self-describing.
struct RunConfig {
    TableConfig table;
    SequenceKind model_kind = SequenceKind::fixed;
    Vec2 model_c;
    std::vector<Vec2> model_states;
    Eigen::MatrixXd model_transition;
    Eigen::VectorXd model_initial;
    std::uint64_t model_seed = 1;

    ObservableKind observable = ObservableKind::flight_time_centered;
    Vec2 observable_gain;
    double observable_scale = 1.0;
    std::string observable_table;  // CSV path for tabulated observables

    std::uint64_t seed = 12345;
    int n = 1000;
    long long n_mc = 100000;
    int m_max = 30;
    int k = 50;
    int n_max = 30;
    int ell = 0;
    int k_max = 30;
    std::vector<int> n_grid{250, 500, 1000, 2000, 4000};
    std::vector<int> boundaries{0, 1, 2};
    int split = 1;
    std::vector<Eigen::VectorXd> t_vectors;
    std::vector<Vec2> centerings;
    int batches = 50;
    std::optional<PhasePoint> start;
};

// INI-style file with [table], [model], [observable] and [run] sections.
// Vectors are whitespace-separated, matrices use ';' between rows.
RunConfig load_config(const std::string& path);
RunConfig parse_config(std::istream& in);

SequenceModel make_model(const RunConfig& cfg);
ObservableSpec make_observable(const RunConfig& cfg, const Table& table);

std::vector<double> parse_vector(const std::string& text);
Eigen::MatrixXd parse_matrix(const std::string& text);

// 17 significant digits, '.' decimal point, independent of the locale.
std::string format_double(double v);

nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const ValidationReport& rep);
nlohmann::json to_json(const TableConstants& k);
nlohmann::json to_json(const Eigen::MatrixXd& m);
nlohmann::json to_json(const CovarianceEstimate& est);
nlohmann::json to_json(const McCounters& c);

void write_trajectory_csv(std::ostream& out, const Trajectory& tr);
void write_phase_points_csv(std::ostream& out, const std::vector<PhasePoint>& pts);
void write_sequence_csv(std::ostream& out, const std::vector<Vec2>& omega);

// Tabulated observable stored as CSV rows: wall, ir, iphi, value_0, ..., value_{d-1}.
PhaseTable read_phase_table_csv(std::istream& in);
void write_phase_table_csv(std::ostream& out, const PhaseTable& t);

}  // namespace rbill
