#include "rbill/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace rbill {

namespace pt = boost::property_tree;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == ',')) ++i;
        if (i >= text.size()) break;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != ',') ++j;
        double v = 0.0;
        auto res = std::from_chars(text.data() + i, text.data() + j, v);
        if (res.ec != std::errc() || res.ptr != text.data() + j)
            throw ConfigError("not a number: '" + text.substr(i, j - i) + "'");
        out.push_back(v);
        i = j;
    }
    return out;
}

Eigen::MatrixXd parse_matrix(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::stringstream ss(text);
    std::string row;
    while (std::getline(ss, row, ';')) {
        auto v = parse_vector(row);
        if (!v.empty()) rows.push_back(std::move(v));
    }
    if (rows.empty()) return Eigen::MatrixXd(0, 0);
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) throw ConfigError("ragged matrix rows: " + text);
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

namespace {

std::vector<Vec2> parse_points(const std::string& text) {
    Eigen::MatrixXd m = parse_matrix(text);
    if (m.size() > 0 && m.cols() != 2) throw ConfigError("expected rows of two numbers: " + text);
    std::vector<Vec2> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back({m(i, 0), m(i, 1)});
    return out;
}

Vec2 parse_point(const std::string& text) {
    auto v = parse_vector(text);
    if (v.size() != 2) throw ConfigError("expected two numbers: " + text);
    return {v[0], v[1]};
}

std::vector<int> parse_ints(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_vector(text)) {
        if (v != std::floor(v)) throw ConfigError("expected integers: " + text);
        out.push_back(static_cast<int>(v));
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    auto b = text.data(), e = text.data() + text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(e[-1]))) --e;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) throw ConfigError("bad value for " + key + ": '" + text + "'");
    return v;
}

const std::set<std::string>& allowed_keys(const std::string& section) {
    static const std::set<std::string> table{"rbar", "r", "eps"};
    static const std::set<std::string> model{"kind", "c", "states", "transition", "initial", "seed"};
    static const std::set<std::string> observable{"kind", "gain", "scale", "table"};
    static const std::set<std::string> run{"seed", "n", "n_mc", "m_max", "k", "n_max", "ell", "k_max", "n_grid",
                                           "boundaries", "split", "t_vectors", "centerings", "batches", "start"};
    static const std::set<std::string> none;
    if (section == "table") return table;
    if (section == "model") return model;
    if (section == "observable") return observable;
    if (section == "run") return run;
    return none;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        const auto& keys = allowed_keys(section);
        if (keys.empty()) throw ConfigError("unknown config section [" + section + "]");
        for (const auto& [key, _] : body)
            if (!keys.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'));
        if (v) return *v;
        return std::nullopt;
    };

    RunConfig cfg;
    for (const char* key : {"rbar", "r", "eps"})
        if (!get(std::string("table.") + key)) throw ConfigError(std::string("missing table key: ") + key);
    cfg.table.rbar = parse_number<double>("rbar", *get("table.rbar"));
    cfg.table.r = parse_number<double>("r", *get("table.r"));
    cfg.table.eps = parse_number<double>("eps", *get("table.eps"));

    if (auto v = get("model.kind")) {
        try {
            cfg.model_kind = sequence_kind_from_string(*v);
        } catch (const ModelError& e) {
            throw ConfigError(e.what());
        }
    }
    if (auto v = get("model.c")) cfg.model_c = parse_point(*v);
    if (auto v = get("model.states")) cfg.model_states = parse_points(*v);
    if (auto v = get("model.transition")) cfg.model_transition = parse_matrix(*v);
    if (auto v = get("model.initial")) {
        auto x = parse_vector(*v);
        cfg.model_initial = Eigen::Map<Eigen::VectorXd>(x.data(), x.size());
    }
    if (auto v = get("model.seed")) cfg.model_seed = parse_number<std::uint64_t>("model.seed", *v);

    if (auto v = get("observable.kind")) {
        try {
            cfg.observable = observable_kind_from_string(*v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (auto v = get("observable.gain")) cfg.observable_gain = parse_point(*v);
    if (auto v = get("observable.scale")) cfg.observable_scale = parse_number<double>("scale", *v);
    if (auto v = get("observable.table")) cfg.observable_table = *v;

    if (auto v = get("run.seed")) cfg.seed = parse_number<std::uint64_t>("seed", *v);
    if (auto v = get("run.n")) cfg.n = parse_number<int>("n", *v);
    if (auto v = get("run.n_mc")) cfg.n_mc = parse_number<long long>("n_mc", *v);
    if (auto v = get("run.m_max")) cfg.m_max = parse_number<int>("m_max", *v);
    if (auto v = get("run.k")) cfg.k = parse_number<int>("k", *v);
    if (auto v = get("run.n_max")) cfg.n_max = parse_number<int>("n_max", *v);
    if (auto v = get("run.ell")) cfg.ell = parse_number<int>("ell", *v);
    if (auto v = get("run.k_max")) cfg.k_max = parse_number<int>("k_max", *v);
    if (auto v = get("run.n_grid")) cfg.n_grid = parse_ints(*v);
    if (auto v = get("run.boundaries")) cfg.boundaries = parse_ints(*v);
    if (auto v = get("run.split")) cfg.split = parse_number<int>("split", *v);
    if (auto v = get("run.t_vectors")) {
        Eigen::MatrixXd m = parse_matrix(*v);
        for (Eigen::Index i = 0; i < m.rows(); ++i) cfg.t_vectors.push_back(m.row(i).transpose());
    }
    if (auto v = get("run.centerings")) cfg.centerings = parse_points(*v);
    if (auto v = get("run.batches")) cfg.batches = parse_number<int>("batches", *v);
    if (auto v = get("run.start")) {
        auto x = parse_vector(*v);
        if (x.size() != 3) throw ConfigError("start needs: wall r phi");
        cfg.start = PhasePoint{static_cast<int>(x[0]), x[1], x[2]};
    }

    if (cfg.n < 0 || cfg.n_mc < 1 || cfg.m_max < 1 || cfg.k < 1 || cfg.n_max < 0 || cfg.ell < 0 || cfg.k_max < 0 ||
        cfg.batches < 2)
        throw ConfigError("run parameters out of range");
    if (cfg.centerings.empty()) {
        double e = cfg.table.eps;
        cfg.centerings = {{0.0, 0.0}, {e, 0.0}, {e * std::cos(2.0), e * std::sin(2.0)}};
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

SequenceModel make_model(const RunConfig& cfg) {
    switch (cfg.model_kind) {
        case SequenceKind::fixed: return SequenceModel::fixed(cfg.model_c, cfg.table.eps, cfg.model_seed);
        case SequenceKind::iid_uniform_disk: return SequenceModel::iid(cfg.table.eps, cfg.model_seed);
        case SequenceKind::finite_markov:
            return SequenceModel::markov(cfg.model_states, cfg.model_transition, cfg.table.eps, cfg.model_seed);
        case SequenceKind::finite_markov_nonstationary:
            return SequenceModel::markov_nonstationary(cfg.model_states, cfg.model_transition, cfg.model_initial,
                                                       cfg.table.eps, cfg.model_seed);
    }
    throw ConfigError("unsupported model");
}

ObservableSpec make_observable(const RunConfig& cfg, const Table& table) {
    ObservableSpec obs;
    switch (cfg.observable) {
        case ObservableKind::flight_time_centered: obs = ObservableSpec::flight_time(table); break;
        case ObservableKind::displacement_centered: obs = ObservableSpec::displacement(table); break;
        case ObservableKind::tabulated: {
            if (cfg.observable_table.empty()) throw ConfigError("tabulated observable needs observable.table");
            std::ifstream in(cfg.observable_table);
            if (!in) throw ConfigError("cannot open observable table: " + cfg.observable_table);
            obs = ObservableSpec::tabulated(std::make_shared<PhaseTable>(read_phase_table_csv(in)));
            break;
        }
    }
    obs.gain = cfg.observable_gain;
    obs.gain_eps = table.eps();
    obs.scale = cfg.observable_scale;
    return obs;
}

nlohmann::json to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json to_json(const RunConfig& cfg) {
    using nlohmann::json;
    auto pts = [](const std::vector<Vec2>& v) {
        json a = json::array();
        for (auto p : v) a.push_back({p.x, p.y});
        return a;
    };
    json j;
    j["table"] = {{"rbar", cfg.table.rbar}, {"r", cfg.table.r}, {"eps", cfg.table.eps}};
    json model = {{"kind", to_string(cfg.model_kind)}, {"seed", cfg.model_seed}};
    if (cfg.model_kind == SequenceKind::fixed) model["c"] = {cfg.model_c.x, cfg.model_c.y};
    if (cfg.model_kind == SequenceKind::finite_markov || cfg.model_kind == SequenceKind::finite_markov_nonstationary) {
        model["states"] = pts(cfg.model_states);
        model["transition"] = to_json(cfg.model_transition);
        SequenceModel m = make_model(cfg);
        model["initial"] = std::vector<double>(m.initial.data(), m.initial.data() + m.initial.size());
    }
    j["model"] = model;
    j["observable"] = {{"kind", to_string(cfg.observable)},
                       {"gain", {cfg.observable_gain.x, cfg.observable_gain.y}},
                       {"scale", cfg.observable_scale}};
    if (!cfg.observable_table.empty()) j["observable"]["table"] = cfg.observable_table;
    json tv = json::array();
    for (const auto& t : cfg.t_vectors) tv.push_back(std::vector<double>(t.data(), t.data() + t.size()));
    j["run"] = {{"seed", cfg.seed},   {"n", cfg.n},         {"n_mc", cfg.n_mc},           {"m_max", cfg.m_max},
                {"k", cfg.k},         {"n_max", cfg.n_max}, {"ell", cfg.ell},             {"k_max", cfg.k_max},
                {"n_grid", cfg.n_grid}, {"boundaries", cfg.boundaries}, {"split", cfg.split}, {"t_vectors", tv},
                {"centerings", pts(cfg.centerings)}, {"batches", cfg.batches}};
    if (cfg.start) j["run"]["start"] = {cfg.start->wall, cfg.start->r, cfg.start->phi};
    return j;
}

nlohmann::json to_json(const ValidationReport& rep) {
    nlohmann::json conds = nlohmann::json::array();
    for (const auto& c : rep.conditions)
        conds.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}, {"slack", c.slack}});
    return {{"conditions", conds}, {"L", rep.free_zone_L}, {"pass", rep.pass()}};
}

nlohmann::json to_json(const TableConstants& k) {
    return {{"L", k.L},
            {"d", k.d},
            {"kappa_gray", k.kappa_gray},
            {"kappa_white", k.kappa_white},
            {"kappa_min", k.kappa_min},
            {"tau_min", k.tau_min},
            {"tau_max", k.tau_max},
            {"tau_max_search", k.tau_max_search},
            {"tau_min_observed", k.tau_min_observed},
            {"tau_max_observed", k.tau_max_observed},
            {"a_min", k.a_min},
            {"b_max", k.b_max},
            {"Lambda", k.Lambda},
            {"C", k.C},
            {"mass", k.mass},
            {"solid_mass", k.solid_mass},
            {"area", k.area},
            {"mean_flight_time", k.mean_flight_time},
            {"max_component_diameter", k.max_component_diameter},
            {"k0", k.k0}};
}

nlohmann::json to_json(const McCounters& c) {
    return {{"replicas", c.replicas}, {"discards", c.discards}, {"discard_rate", c.discard_rate()}};
}

nlohmann::json to_json(const CovarianceEstimate& est) {
    nlohmann::json vm = nlohmann::json::array();
    for (const auto& v : est.vm)
        vm.push_back({{"m", v.m}, {"shift", v.shift}, {"shifts", v.shifts}, {"value", to_json(v.value)},
                      {"se", to_json(v.se)}});
    nlohmann::json trace = nlohmann::json::array();
    for (std::size_t i = 0; i < est.trace.size(); ++i)
        trace.push_back({{"k", est.trace_k[i]}, {"sigma2", to_json(est.trace[i])}});
    return {{"sigma2", to_json(est.sigma2)},
            {"standard_errors", to_json(est.standard_errors)},
            {"m_max", est.m_max},
            {"k", est.k},
            {"samples", est.samples},
            {"counters", to_json(est.counters)},
            {"naive_sigma2", to_json(est.naive_sigma2)},
            {"naive_se", to_json(est.naive_se)},
            {"vm", vm},
            {"trace", trace}};
}

void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
    out << "k,wall,r,phi,tau,dx,dy,n_c,sing_margin\n";
    for (std::size_t i = 0; i < tr.records.size(); ++i) {
        const auto& rec = tr.records[i];
        out << i << ',' << rec.post.wall << ',' << format_double(rec.post.r) << ',' << format_double(rec.post.phi)
            << ',' << format_double(rec.tau) << ',' << format_double(rec.displacement.x) << ','
            << format_double(rec.displacement.y) << ',' << rec.n_c << ',' << format_double(rec.sing_margin) << '\n';
    }
}

void write_phase_points_csv(std::ostream& out, const std::vector<PhasePoint>& pts) {
    out << "wall,r,phi\n";
    for (const auto& p : pts) out << p.wall << ',' << format_double(p.r) << ',' << format_double(p.phi) << '\n';
}

void write_sequence_csv(std::ostream& out, const std::vector<Vec2>& omega) {
    out << "n,cx,cy\n";
    for (std::size_t i = 0; i < omega.size(); ++i)
        out << i << ',' << format_double(omega[i].x) << ',' << format_double(omega[i].y) << '\n';
}

PhaseTable read_phase_table_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("phase table: empty file");
    auto head = parse_vector(line);
    if (head.size() != 3) throw ConfigError("phase table: header must be dim,nr,nphi");
    PhaseTable t(static_cast<int>(head[0]), static_cast<int>(head[1]), static_cast<int>(head[2]));
    long long expected = 8LL * t.nr() * t.nphi(), seen = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto v = parse_vector(line);
        if (static_cast<int>(v.size()) != 3 + t.dim()) throw ConfigError("phase table: bad row");
        int wall = static_cast<int>(v[0]), ir = static_cast<int>(v[1]), ip = static_cast<int>(v[2]);
        if (wall < 1 || wall > 8 || ir < 0 || ir >= t.nr() || ip < 0 || ip >= t.nphi())
            throw ConfigError("phase table: index out of range");
        for (int c = 0; c < t.dim(); ++c) t.at(wall, ir, ip, c) = v[3 + c];
        ++seen;
    }
    if (seen != expected) throw ConfigError("phase table: wrong number of rows");
    return t;
}

void write_phase_table_csv(std::ostream& out, const PhaseTable& t) {
    out << t.dim() << ',' << t.nr() << ',' << t.nphi() << '\n';
    for (int w = 1; w <= 8; ++w)
        for (int i = 0; i < t.nr(); ++i)
            for (int j = 0; j < t.nphi(); ++j) {
                out << w << ',' << i << ',' << j;
                for (int c = 0; c < t.dim(); ++c) out << ',' << format_double(t.at(w, i, j, c));
                out << '\n';
            }
}

}  // namespace rbill
