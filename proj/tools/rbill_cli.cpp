#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "rbill/checks.hpp"
#include "rbill/io.hpp"

#ifndef RBILL_VERSION
#define RBILL_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rbill;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFail = 2;

// Bonferroni-corrected significance shared by the invariance and CLT commands.
constexpr double kAlpha = 1e-3;

struct Context {
    RunConfig cfg;
    fs::path out;
    McOptions mc;
    std::vector<std::string> outputs;

    std::ofstream open(const std::string& name) {
        fs::path p = out / name;
        std::ofstream f(p);
        if (!f) throw ConfigError("cannot write " + p.string());
        f.precision(17);
        outputs.push_back(name);
        return f;
    }
};

struct Outcome {
    json result;
    bool pass = true;
};

std::string utc_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

json matrix(const Eigen::MatrixXd& m) { return to_json(m); }

std::vector<Eigen::VectorXd> default_t_vectors(const RunConfig& cfg, int dim) {
    if (!cfg.t_vectors.empty()) return cfg.t_vectors;
    std::vector<Eigen::VectorXd> out;
    for (std::size_t j = 0; j + 1 < cfg.boundaries.size(); ++j) out.push_back(Eigen::VectorXd::Ones(dim));
    return out;
}

Outcome cmd_validate(Context& ctx) {
    ValidationReport rep = validate_table(ctx.cfg.table.rbar, ctx.cfg.table.r, ctx.cfg.table.eps);
    return {{{"validation", to_json(rep)}}, rep.pass()};
}

Outcome cmd_constants(Context& ctx, const Table& table) {
    return {{{"constants", to_json(table.constants())}}, true};
}

Outcome cmd_simulate(Context& ctx, const Table& table) {
    const RunConfig& cfg = ctx.cfg;
    SequenceModel model = make_model(cfg);
    std::vector<Vec2> omega;
    draw_sequence_into(model, cfg.seed, omega, cfg.n);
    Trajectory tr;
    int redraws = 0;
    Philox rng(cfg.seed, 0, kPurposeStart);
    for (;;) {
        PhasePoint x0 = cfg.start ? *cfg.start : sample_mu_one(table, rng);
        if (cfg.start && !in_cross_section(table, x0)) throw ConfigError("start point is not in the cross section");
        try {
            tr = compose(table, x0, omega, cfg.n);
            break;
        } catch (const SingularityProximity& e) {
            if (cfg.start || ++redraws > 1000) {
                json res = {{"error", e.what()}, {"index", e.index}};
                return {res, false};
            }
        }
    }
    auto f = ctx.open("trajectory.csv");
    write_trajectory_csv(f, tr);
    auto g = ctx.open("sequence.csv");
    write_sequence_csv(g, omega);
    double tau = 0.0;
    int white = 0;
    for (const auto& r : tr.records) {
        tau += r.tau;
        white += r.n_c == 2;
    }
    json res = {{"start", {tr.start.wall, tr.start.r, tr.start.phi}},
                {"steps", cfg.n},
                {"start_redraws", redraws},
                {"mean_flight_time", cfg.n > 0 ? tau / cfg.n : 0.0},
                {"white_fraction", cfg.n > 0 ? double(white) / cfg.n : 0.0}};
    return {res, true};
}

Outcome cmd_invariance(Context& ctx, const Table& table) {
    const RunConfig& cfg = ctx.cfg;
    const int tests = 16 * static_cast<int>(cfg.centerings.size());
    json cs = json::array();
    bool pass = true;
    auto f = ctx.open("invariance.csv");
    f << "centering,cx,cy,wall,marginal,statistic,p_value\n";
    for (std::size_t j = 0; j < cfg.centerings.size(); ++j) {
        InvarianceReport rep =
            measure_invariance(table, cfg.centerings[j], static_cast<int>(cfg.n_mc), mix_seed(cfg.seed, j));
        for (int w = 0; w < 8; ++w)
            for (int m = 0; m < 2; ++m) {
                const KsResult& ks = m == 0 ? rep.r_ks[w] : rep.phi_ks[w];
                f << j << ',' << format_double(rep.c.x) << ',' << format_double(rep.c.y) << ',' << w + 1 << ','
                  << (m == 0 ? "r" : "phi") << ',' << format_double(ks.statistic) << ','
                  << format_double(ks.p_value) << '\n';
            }
        bool ok = rep.min_p * tests > kAlpha;
        pass = pass && ok;
        cs.push_back({{"c", {rep.c.x, rep.c.y}}, {"min_p", rep.min_p}, {"skipped", rep.skipped}, {"pass", ok}});
    }
    ReversibilityReport rev = reversibility_check(table, 10000, mix_seed(cfg.seed, 99));
    bool rev_ok = rev.max_error < 1e-8 && rev.wall_mismatches == 0;
    json res = {{"centerings", cs},
                {"bonferroni_tests", tests},
                {"alpha", kAlpha},
                {"reversibility",
                 {{"starts", rev.starts},
                  {"skipped", rev.skipped},
                  {"max_error", rev.max_error},
                  {"wall_mismatches", rev.wall_mismatches},
                  {"pass", rev_ok}}}};
    return {res, pass && rev_ok};
}

Outcome cmd_hyperbolicity(Context& ctx, const Table& table) {
    const RunConfig& cfg = ctx.cfg;
    const int centerings = 100;
    const int per = static_cast<int>(std::max<long long>(1, cfg.n_mc / centerings));
    ConeReport cone = cone_check(table, per, centerings, 1e-6, cfg.seed);
    ExpansionReport ex = expansion_check(table, per, cfg.n_max, mix_seed(cfg.seed, 1));
    TangentCheckReport fd = tangent_fd_check(table, 1000, 1e-3, mix_seed(cfg.seed, 2));
    bool cone_ok = cone.cone_violations == 0 && cone.p_violations == 0;
    bool ex_ok = ex.violations == 0 && ex.p_violations == 0;
    bool fd_ok = fd.max_rel_error < 1e-5;
    json res = {{"Lambda", table.constants().Lambda},
                {"C", table.constants().C},
                {"cones",
                 {{"centerings", cone.centerings},
                  {"tested", cone.tested},
                  {"skipped", cone.skipped},
                  {"cone_violations", cone.cone_violations},
                  {"p_violations", cone.p_violations},
                  {"min_p_factor", cone.min_p_factor},
                  {"min_cone_slack", cone.min_cone_slack},
                  {"pass", cone_ok}}},
                {"expansion",
                 {{"orbits", ex.orbits},
                  {"n_max", ex.n_max},
                  {"skipped", ex.skipped},
                  {"violations", ex.violations},
                  {"min_ratio", ex.min_ratio},
                  {"min_p_factor", ex.min_p_factor},
                  {"pass", ex_ok}}},
                {"tangent",
                 {{"samples", fd.samples},
                  {"skipped", fd.skipped},
                  {"margin_threshold", fd.margin_threshold},
                  {"max_rel_error", fd.max_rel_error},
                  {"pass", fd_ok}}}};
    return {res, cone_ok && ex_ok && fd_ok};
}

Outcome cmd_correlation(Context& ctx, const Table& table) {
    const RunConfig& cfg = ctx.cfg;
    SequenceModel model = make_model(cfg);
    ObservableSpec obs = make_observable(cfg, table);
    auto f = ctx.open("correlation.csv");
    f << "component,n,estimate,se\n";
    json comps = json::array();
    bool pass = true;
    for (int c = 0; c < obs.dim; ++c) {
        PairCorrelationSeries s =
            pair_correlation_series(table, obs, c, obs, c, model, cfg.n_max, cfg.n_mc, cfg.seed, ctx.mc);
        for (std::size_t n = 0; n < s.values.size(); ++n)
            f << c << ',' << n << ',' << format_double(s.values[n].value) << ',' << format_double(s.values[n].se)
              << '\n';
        EnvelopeReport env = decay_envelope(s.values);
        pass = pass && env.violations == 0;
        comps.push_back({{"component", c},
                         {"envelope_checked", env.checked},
                         {"envelope_violations", env.violations},
                         {"first_violation", env.first_violation},
                         {"counters", to_json(s.counters)}});
    }
    return {{{"components", comps}}, pass};
}

Outcome cmd_gouezel(Context& ctx, const Table& table) {
    const RunConfig& cfg = ctx.cfg;
    SequenceModel model = make_model(cfg);
    ObservableSpec obs = make_observable(cfg, table);
    std::vector<int> ks;
    for (int k = 0; k <= cfg.k_max; ++k) ks.push_back(k);
    GouezelSeries g = gouezel_covariance(table, obs, cfg.boundaries, cfg.split, default_t_vectors(cfg, obs.dim), ks,
                                         model, cfg.n_mc, cfg.seed, ctx.mc);
    auto f = ctx.open("gouezel.csv");
    f << "k,magnitude,se,re,im\n";
    int tail_bad = 0;
    for (const auto& p : g.points) {
        f << p.k << ',' << format_double(p.magnitude) << ',' << format_double(p.se) << ',' << format_double(p.re)
          << ',' << format_double(p.im) << '\n';
        if (2 * p.k >= cfg.k_max && p.magnitude > 4.0 * p.se) ++tail_bad;
    }
    return {{{"tail_above_floor", tail_bad}, {"counters", to_json(g.counters)}}, tail_bad == 0};
}

CovarianceEstimate covariance(Context& ctx, const Table& table, const SequenceModel& model, const ObservableSpec& obs) {
    const RunConfig& cfg = ctx.cfg;
    return estimate_sigma2(table, obs, model, cfg.m_max, cfg.k, cfg.n_mc, cfg.seed, ctx.mc);
}

Outcome cmd_covariance(Context& ctx, const Table& table) {
    SequenceModel model = make_model(ctx.cfg);
    ObservableSpec obs = make_observable(ctx.cfg, table);
    CovarianceEstimate est = covariance(ctx, table, model, obs);
    PdReport pd = positive_definiteness_report(est);
    auto f = ctx.open("vm.csv");
    f << "m,i,j,value,se\n";
    for (const auto& v : est.vm)
        for (Eigen::Index i = 0; i < v.value.rows(); ++i)
            for (Eigen::Index j = 0; j < v.value.cols(); ++j)
                f << v.m << ',' << i << ',' << j << ',' << format_double(v.value(i, j)) << ','
                  << format_double(v.se(i, j)) << '\n';
    json res = {{"estimate", to_json(est)},
                {"eigenvalues", std::vector<double>(pd.eigenvalues.data(), pd.eigenvalues.data() + pd.eigenvalues.size())},
                {"eigenvalue_se",
                 std::vector<double>(pd.eigenvalue_se.data(), pd.eigenvalue_se.data() + pd.eigenvalue_se.size())},
                {"rank", pd.rank},
                {"psd_within_noise", pd.psd_within_noise}};
    return {res, pd.psd_within_noise};
}

Outcome cmd_clt(Context& ctx, const Table& table) {
    const RunConfig& cfg = ctx.cfg;
    SequenceModel model = make_model(cfg);
    ObservableSpec obs = make_observable(cfg, table);
    CovarianceEstimate est = covariance(ctx, table, model, obs);
    SumCovariances sums = sum_covariances(table, obs, model, {cfg.n}, cfg.ell, cfg.n_mc, mix_seed(cfg.seed, 7), true,
                                          ctx.mc);
    const Eigen::MatrixXd& S = sums.scaled_samples[0];
    CltReport rep = clt_diagnostics(S, est.sigma2, est.standard_errors, kAlpha);
    auto f = ctx.open("clt_samples.csv");
    for (Eigen::Index r = 0; r < S.rows(); ++r) {
        for (Eigen::Index c = 0; c < S.cols(); ++c) f << (c ? "," : "") << format_double(S(r, c));
        f << '\n';
    }
    json ks = json::array();
    for (const auto& k : rep.marginal_ks) ks.push_back({{"statistic", k.statistic}, {"p_value", k.p_value}});
    json res = {{"sigma2", matrix(est.sigma2)},
                {"sigma2_se", matrix(est.standard_errors)},
                {"empirical", matrix(sums.second_moment[0] / cfg.n)},
                {"marginal_ks", ks},
                {"rank", rep.rank},
                {"mardia",
                 {{"dim", rep.mardia.dim},
                  {"skewness", rep.mardia.skewness},
                  {"skewness_p", rep.mardia.skewness_p},
                  {"kurtosis", rep.mardia.kurtosis},
                  {"kurtosis_p", rep.mardia.kurtosis_p}}}};
    return {res, rep.pass};
}

Outcome cmd_growth(Context& ctx, const Table& table) {
    const RunConfig& cfg = ctx.cfg;
    SequenceModel model = make_model(cfg);
    ObservableSpec obs = make_observable(cfg, table);
    CovarianceEstimate est = covariance(ctx, table, model, obs);
    SumCovariances sums =
        sum_covariances(table, obs, model, cfg.n_grid, cfg.ell, cfg.n_mc, mix_seed(cfg.seed, 7), false, ctx.mc);
    auto pts = variance_growth(sums, est.sigma2, est.standard_errors);
    auto naive = variance_growth(sums, est.naive_sigma2, est.naive_se);
    LogFit fit = fit_log_growth(pts);
    auto f = ctx.open("growth.csv");
    f << "n,deviation,se,naive_deviation,naive_se\n";
    for (std::size_t i = 0; i < pts.size(); ++i)
        f << pts[i].n << ',' << format_double(pts[i].deviation) << ',' << format_double(pts[i].se) << ','
          << format_double(naive[i].deviation) << ',' << format_double(naive[i].se) << '\n';
    json res = {{"fit", {{"alpha", fit.alpha}, {"beta", fit.beta}, {"max_abs_z", fit.max_abs_z}}},
                {"sigma2", matrix(est.sigma2)},
                {"naive_sigma2", matrix(est.naive_sigma2)}};
    return {res, fit.max_abs_z <= 3.0};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random Sinai billiard simulator and statistics driver"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    int threads = 1;
    const char* env_out = std::getenv("RBILL_OUT_DIR");
    out_dir = env_out && *env_out ? env_out : "rbill_out";

    const std::vector<std::string> names{"validate",    "constants",     "simulate",    "invariance",
                                         "hyperbolicity", "correlation", "gouezel",     "covariance",
                                         "clt",         "growth"};
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("-c,--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", out_dir, "output directory (default: $RBILL_OUT_DIR or rbill_out)");
        sub->add_option("-t,--threads", threads, "worker threads; 1 runs serially")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitPass : kExitUsage;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    Context ctx;
    try {
        ctx.cfg = load_config(config_path);
        ctx.out = out_dir;
        std::error_code ec;
        fs::create_directories(ctx.out, ec);
        if (ec || !fs::is_directory(ctx.out)) throw ConfigError("cannot create output directory " + out_dir);
        ctx.mc.threads = threads;
        ctx.mc.batches = ctx.cfg.batches;
    } catch (const std::exception& e) {
        std::cerr << "rbill: " << e.what() << '\n';
        return kExitUsage;
    }

    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        if (command == "validate") {
            outcome = cmd_validate(ctx);
        } else {
            Table table(ctx.cfg.table);
            static const std::map<std::string, std::function<Outcome(Context&, const Table&)>> commands{
                {"constants", cmd_constants},     {"simulate", cmd_simulate},       {"invariance", cmd_invariance},
                {"hyperbolicity", cmd_hyperbolicity}, {"correlation", cmd_correlation}, {"gouezel", cmd_gouezel},
                {"covariance", cmd_covariance},   {"clt", cmd_clt},                 {"growth", cmd_growth}};
            outcome = commands.at(command)(ctx, table);
        }
    } catch (const std::exception& e) {
        std::cerr << "rbill: " << e.what() << '\n';
        return kExitUsage;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string mode = threads == 1 ? "serial" : "parallel";
    json result = {{"command", command},
                   {"config", to_json(ctx.cfg)},
                   {"execution", mode},
                   {"pass", outcome.pass},
                   {"result", outcome.result}};
    try {
        auto f = ctx.open("result.json");
        f << result.dump(2) << '\n';
        json run = {{"command", command},
                    {"config_path", config_path},
                    {"version", RBILL_VERSION},
                    {"execution", mode},
                    {"threads", threads},
                    {"started", started},
                    {"finished", utc_now()},
                    {"seconds", seconds},
                    {"outputs", ctx.outputs}};
        auto g = ctx.open("run.json");
        g << run.dump(2) << '\n';
    } catch (const std::exception& e) {
        std::cerr << "rbill: " << e.what() << '\n';
        return kExitUsage;
    }
    std::cout << command << ": " << (outcome.pass ? "pass" : "FAIL") << " (" << (ctx.out / "result.json").string()
              << ")\n";
    return outcome.pass ? kExitPass : kExitFail;
}
