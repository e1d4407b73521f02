#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cmlevy/additive_fluct.hpp"
#include "cmlevy/io.hpp"
#include "cmlevy/levy_criteria.hpp"
#include "cmlevy/mc_lab.hpp"
#include "cmlevy/minorant.hpp"
#include "cmlevy/vertex_law.hpp"

namespace cmlevy {

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{
        "sample-path",         "minorant",      "phi-table", "vertex-sim",     "criteria-fs",  "criteria-is",
        "additive-conditions", "mc-fluctuation", "meander",  "audit-appendix", "asymptotics"};
    return kinds;
}

struct RunResult {
    std::string experiment;
    std::string hash;
    std::string json_path;
    std::string csv_path;
    bool indeterminate = false; //!< some required verdict came out indeterminate
    bool require_determinate = false;
    json summary;
    //! 0 success, 2 indeterminate where a verdict was required.
    int exit_code() const { return require_determinate && indeterminate ? 2 : 0; }
};

namespace detail {

struct RunContext {
    json config;
    std::string hash;
    std::uint64_t seed = 0;
    int threads = 1;
    json summary = json::object();
    json results = json::object();
    bool indeterminate = false;
};

inline void add_hash_columns(CsvTable::Row& row, const RunContext& ctx) {
    row << ctx.hash << static_cast<long long>(ctx.seed);
}

inline std::vector<std::string> header(std::vector<std::string> cols) {
    cols.emplace_back("config_hash");
    cols.emplace_back("seed");
    return cols;
}

inline Horizon horizon_from(ConfigBlock& n) {
    const std::string kind = n.text("horizon_kind", "fixed", {"fixed", "exponential"});
    const double v = n.number("horizon", 1.0);
    if (!(v > 0.0))
        throw ConfigError("numeric.horizon must be positive");
    return kind == "fixed" ? Horizon::fixed(v) : Horizon::exponential(v);
}

inline SamplerKind sampler_from(const std::string& s) {
    if (s == "stick-breaking")
        return SamplerKind::stick_breaking;
    if (s == "cauchy-exact")
        return SamplerKind::cauchy_exact;
    return SamplerKind::grid_hull;
}

inline Route route_from(const std::string& s) {
    if (s == "exact_scaling")
        return Route::exact_scaling;
    if (s == "generic")
        return Route::generic;
    return Route::automatic;
}

inline void condition_rows(CsvTable& csv, const RunContext& ctx, const std::string& name, const SeriesReport& r) {
    for (std::size_t i = 0; i < r.terms.size(); ++i) {
        auto row = csv.row();
        row << name << static_cast<int>(i + 1) << r.terms[i] << r.partial_sums[i] << to_string(r.verdict);
        add_hash_columns(row, ctx);
    }
}

inline void record(RunContext& ctx, const std::string& name, const SeriesReport& r, bool required) {
    ctx.summary[name] = to_string(r.verdict);
    ctx.results[name] = to_json(r);
    if (required && r.verdict == Verdict::indeterminate)
        ctx.indeterminate = true;
}

inline std::vector<std::string> condition_header() {
    return header({"condition", "shell", "term", "partial_sum", "verdict"});
}

inline double positive(ConfigBlock& n, const std::string& key, double fallback) {
    const double v = n.number(key, fallback);
    if (!(v > 0.0))
        throw ConfigError(n.path() + "." + key + " must be positive");
    return v;
}

inline int count(ConfigBlock& n, const std::string& key, long long fallback, long long lo = 1,
                 long long hi = 1LL << 30) {
    const long long v = n.integer(key, fallback);
    if (v < lo || v > hi)
        throw ConfigError(n.path() + "." + key + " out of range");
    return static_cast<int>(v);
}

// u_n from {"kind": "geometric", "scale": a, "base": b} -> a b^n or
// {"kind": "power", "scale": a, "exponent": e} -> a n^e
inline std::function<double(int)> sequence_from(ConfigBlock b) {
    const std::string kind = b.text("kind", "power", {"geometric", "power"});
    const double scale = b.number("scale", 1.0);
    const double base = kind == "geometric" ? b.number("base", 2.0) : 0.0;
    const double e = kind == "power" ? b.number("exponent", 1.0) : 0.0;
    b.finish();
    if (kind == "geometric")
        return [scale, base](int n) { return scale * std::pow(base, n); };
    return [scale, e](int n) { return scale * std::pow(static_cast<double>(n), e); };
}

inline CsvTable run_sample_path(RunContext& ctx, const LevyModel& m, ConfigBlock& n) {
    const double T = positive(n, "horizon", 1.0);
    const int pts = count(n, "n", 1025, 2);
    n.finish();
    RandomStream rng(ctx.seed);
    const SamplePath p = sample_path(m, T, static_cast<std::size_t>(pts), rng);
    CsvTable csv(header({"t", "x"}));
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto row = csv.row();
        row << p.times[i] << p.values[i];
        add_hash_columns(row, ctx);
    }
    ctx.summary["points"] = pts;
    ctx.summary["final_value"] = p.values.back();
    return csv;
}

inline CsvTable run_minorant(RunContext& ctx, const LevyModel& m, ConfigBlock& n) {
    const Horizon h = horizon_from(n);
    const std::string sampler = n.text("sampler", "grid-hull", {"grid-hull", "stick-breaking", "cauchy-exact"});
    const int size = count(n, "size", 1024);
    n.finish();
    SamplerSpec spec{sampler_from(sampler), size};
    RandomStream rng(ctx.seed);
    const ConvexMinorant cm = make_sampler(m, spec, h, Regime::is, 0.0)(rng);
    CsvTable csv(header({"start", "length", "slope"}));
    for (const auto& f : cm.faces()) {
        auto row = csv.row();
        row << f.start << f.length << f.slope;
        add_hash_columns(row, ctx);
    }
    ctx.summary["faces"] = static_cast<long long>(cm.size());
    ctx.summary["horizon"] = cm.horizon();
    ctx.summary["vertex_time_0"] = vertex_time(cm, 0.0).tau;
    return csv;
}

inline CsvTable run_phi_table(RunContext& ctx, const LevyModel& m, ConfigBlock& n) {
    const auto us = n.numbers("u", {-1.0, 0.0, 1.0});
    const auto ws = n.numbers("w", {0.5, 1.0, 2.0, 5.0});
    const double lambda = positive(n, "lambda", 1.0);
    QuadPolicy pol;
    pol.shell_rel_tol = positive(n, "shell_rel_tol", pol.shell_rel_tol);
    pol.cutoff = positive(n, "cutoff", pol.cutoff);
    n.finish();
    const LaplaceExponent lap(m, lambda, pol);
    CsvTable csv(header({"u", "w", "phi", "tolerance", "shells"}));
    for (double u : us)
        for (double w : ws) {
            const auto v = lap.phi_detail(u, w);
            auto row = csv.row();
            row << u << w << v.value << v.tolerance << v.shells;
            add_hash_columns(row, ctx);
        }
    ctx.summary["entries"] = static_cast<long long>(csv.size());
    return csv;
}

inline CsvTable run_vertex_sim(RunContext& ctx, const LevyModel& m, ConfigBlock& n) {
    const auto us = n.numbers("u", {-1.0, 0.0, 1.0});
    const auto ws = n.numbers("w", {0.5, 1.0, 2.0, 5.0});
    const double lambda = positive(n, "lambda", 1.0);
    const int draws = count(n, "n", 10000, 2);
    const double floor = positive(n, "floor", 1e-8);
    n.finish();
    const MeanJumpMeasure measure = MeanJumpMeasure::slope(m, lambda);
    const LaplaceExponent lap(m, lambda);
    RandomStream base(ctx.seed);
    CsvTable csv(header({"u", "w", "estimate", "standard_error", "target", "z"}));
    double max_z = 0.0;
    for (std::size_t i = 0; i < us.size(); ++i) {
        const AdditiveSampler sampler(measure, -inf, us[i], floor);
        RandomStream rng = base.child(i);
        std::vector<double> tau(static_cast<std::size_t>(draws));
        for (auto& t : tau)
            t = sampler.sample(rng).total + sampler.missed_mean();
        for (double w : ws) {
            const double target = lap.phi(us[i], w);
            const auto lm = laplace_match(tau, target, w);
            max_z = std::max(max_z, std::abs(lm.z));
            auto row = csv.row();
            row << us[i] << w << lm.estimate << lm.se << target << lm.z;
            add_hash_columns(row, ctx);
        }
    }
    ctx.summary["max_abs_z"] = max_z;
    return csv;
}

inline CsvTable run_criteria_fs(RunContext& ctx, const LevyModel& m, const TestFunction& f, ConfigBlock& n) {
    const double s = n.number("s", 0.0);
    const double c = positive(n, "c", 1.0);
    const int depth = count(n, "depth", 30, 9, 200);
    const Route route =
        route_from(n.text("route", "automatic", {"automatic", "exact_scaling", "generic"}));
    n.finish();
    const auto r = fs_conditions(m, s, f, c, depth, route);
    CsvTable csv(condition_header());
    for (const auto& [name, rep] : std::vector<std::pair<std::string, const SeriesReport*>>{
             {"large", &r.large}, {"var", &r.var}, {"mean", &r.mean}, {"suff_low", &r.suff_low}}) {
        record(ctx, name, *rep, name != "suff_low");
        condition_rows(csv, ctx, name, *rep);
    }
    ctx.summary["normalization_flag"] = r.normalization_flag;
    ctx.results["normalization"] = r.normalization;
    ctx.results["route"] = to_string(r.route);
    return csv;
}

inline CsvTable run_criteria_is(RunContext& ctx, const LevyModel& m, const TestFunction& f, ConfigBlock& n) {
    const double c = positive(n, "c", 1.0);
    const int depth = count(n, "depth", 30, 9, 200);
    const Route route =
        route_from(n.text("route", "automatic", {"automatic", "exact_scaling", "generic"}));
    n.finish();
    const auto r = is_conditions(m, f, c, depth, route);
    CsvTable csv(condition_header());
    for (const auto& [name, rep] : std::vector<std::pair<std::string, const SeriesReport*>>{
             {"large", &r.large},
             {"var", &r.var},
             {"mean", &r.mean},
             {"suff_var", &r.suff_var},
             {"suff_mean", &r.suff_mean}}) {
        record(ctx, name, *rep, name == "large" || name == "var" || name == "mean");
        condition_rows(csv, ctx, name, *rep);
    }
    ctx.summary["concave"] = r.concave;
    ctx.summary["normalization_flag"] = r.normalization_flag;
    ctx.summary["sufficient_inconclusive"] = r.sufficient_inconclusive();
    ctx.results["normalization"] = r.normalization;
    ctx.results["route"] = to_string(r.route);
    return csv;
}

inline CsvTable run_additive(RunContext& ctx, const std::optional<LevyModel>& m, const TestFunction& h,
                             ConfigBlock& n) {
    const std::string source = n.text("source", "fs", {"fs", "is", "sparse-atoms"});
    const double s = n.number("s", 0.0);
    const double lambda = positive(n, "lambda", 1.0);
    const int depth = count(n, "depth", 30, 9, 200);
    const int atoms = count(n, "atoms", 60, 2, 1000);
    const bool inverse = n.boolean("inverse", false);
    n.finish();
    AdditiveSpec spec;
    if (source == "sparse-atoms") {
        spec = AdditiveSpec::from_atoms(sparse_atoms(atoms));
    } else {
        if (!m)
            throw ConfigError("additive-conditions with a model source needs a model block");
        spec = AdditiveSpec::from_measure(source == "fs" ? MeanJumpMeasure::fs(*m, s, lambda)
                                                         : MeanJumpMeasure::is(*m, lambda));
    }
    CsvTable csv(condition_header());
    const auto v = jump_conditions(spec, h, depth);
    for (const auto& [name, rep] : std::vector<std::pair<std::string, const SeriesReport*>>{
             {"large", &v.large.series}, {"var", &v.var.series}, {"mean_var", &v.mean_var.series}, {"mean", &v.mean}}) {
        record(ctx, name, *rep, true);
        condition_rows(csv, ctx, name, *rep);
    }
    ctx.results["large_head"] = v.large.head;
    if (inverse) {
        const auto w = inverse_jump_conditions(spec, h, depth);
        for (const auto& [name, rep] : std::vector<std::pair<std::string, const SeriesReport*>>{
                 {"var_inv", &w.var_inv.series}, {"mean_var_inv", &w.mean_var_inv.series}, {"mean_inv", &w.mean_inv}}) {
            record(ctx, name, *rep, true);
            condition_rows(csv, ctx, name, *rep);
        }
        ctx.summary["h_convex"] = w.h_convex;
    }
    return csv;
}

inline CsvTable statistic_csv(RunContext& ctx, const FluctuationStatistic& st) {
    CsvTable csv(header({"level", "quantile", "value"}));
    for (double q : {0.25, 0.5, 0.75}) {
        const auto v = st.quantiles(q);
        for (int j = 0; j < st.levels(); ++j) {
            auto row = csv.row();
            row << st.k_min + j << q << v[j];
            add_hash_columns(row, ctx);
        }
    }
    return csv;
}

inline void record_trend(RunContext& ctx, const TrendResult& tr) {
    ctx.summary["trend"] = to_string(tr.trend);
    ctx.summary["confidence"] = tr.confidence;
    ctx.results["slope"] = tr.slope;
    ctx.results["medians"] = tr.medians;
    if (tr.trend == Trend::indeterminate)
        ctx.indeterminate = true;
}

inline CsvTable run_mc(RunContext& ctx, const LevyModel& m, const TestFunction& f, ConfigBlock& n) {
    FluctuationOptions o;
    o.regime = n.text("regime", "is", {"is", "fs"}) == "fs" ? Regime::fs : Regime::is;
    o.s = n.number("s", 0.0);
    o.extremum = n.text("extremum", "sup", {"sup", "inf"}) == "inf" ? Extremum::inf : Extremum::sup;
    o.sampler.kind = sampler_from(n.text("sampler", "grid-hull", {"grid-hull", "stick-breaking", "cauchy-exact"}));
    o.sampler.size = count(n, "size", 1 << 16);
    o.horizon = horizon_from(n);
    o.k_min = count(n, "k_min", 4, 0, 60);
    o.k_max = count(n, "k_max", 14, 0, 60);
    o.n_paths = count(n, "n_paths", 500);
    o.override_slope_registry = n.boolean("override_slope_registry", false);
    const double theta = positive(n, "theta", 0.05);
    const int n_boot = count(n, "n_boot", 200, 0);
    n.finish();
    if (o.k_max - o.k_min < 3)
        throw ConfigError("numeric.k_max - numeric.k_min must be at least 3");
    o.threads = ctx.threads;
    const auto st = estimate_fluctuation(m, f, o, RandomStream(ctx.seed));
    record_trend(ctx, regime_classify(st, theta, n_boot, ctx.seed + 1));
    return statistic_csv(ctx, st);
}

inline CsvTable run_meander(RunContext& ctx, const LevyModel& m, const std::optional<TestFunction>& f,
                            ConfigBlock& n) {
    MeanderOptions o;
    const double p = n.number("p", 3.0);
    o.grid_steps = count(n, "grid_steps", 1 << 16, 2);
    o.k_min = count(n, "k_min", 4, 0, 60);
    o.k_max = count(n, "k_max", 14, 0, 60);
    o.n_paths = count(n, "n_paths", 500);
    const double theta = positive(n, "theta", 0.05);
    const int n_boot = count(n, "n_boot", 200, 0);
    n.finish();
    if (o.k_max - o.k_min < 3)
        throw ConfigError("numeric.k_max - numeric.k_min must be at least 3");
    o.threads = ctx.threads;
    const RandomStream rng(ctx.seed);
    // a function block replaces the default primitive and is used as f_tilde itself
    const auto st = f ? meander_growth(m, [&f](double t) { return (*f)(t); }, o, rng) : meander_growth(m, p, o, rng);
    record_trend(ctx, regime_classify(st, theta, n_boot, ctx.seed + 1));
    return statistic_csv(ctx, st);
}

inline CsvTable run_audit(RunContext& ctx, const LevyModel& m, ConfigBlock& n) {
    std::vector<AuditPoint> grid;
    if (n.has("grid")) {
        const json& g = n.raw("grid");
        if (!g.is_array())
            throw ConfigError("numeric.grid must be an array");
        for (std::size_t i = 0; i < g.size(); ++i) {
            ConfigBlock b(g[i], "numeric.grid[" + std::to_string(i) + "]");
            AuditPoint a;
            a.t = positive(b, "t", 1.0);
            a.k = positive(b, "K", 1.0);
            a.eps = positive(b, "eps", 1.0);
            a.p = positive(b, "p", 2.0);
            b.finish();
            grid.push_back(a);
        }
    } else {
        grid = {{0.1, 10.0, 1.0, 2.0}, {0.01, 1.0, 0.5, 1.0}, {1.0, 0.5, 0.1, 0.5}, {0.5, 2.0, 1.0, 1.5}};
    }
    const int n_mc = count(n, "n_mc", 100000, 2);
    n.finish();
    AuditReport rep;
    try {
        rep = truncated_moment_audit(m, grid, n_mc, RandomStream(ctx.seed), ctx.threads);
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("numeric.grid: ") + e.what());
    }
    CsvTable csv(header({"t", "K", "eps", "p", "estimate", "standard_error", "bound", "violation"}));
    for (const auto& r : rep.rows) {
        auto row = csv.row();
        row << r.point.t << r.point.k << r.point.eps << r.point.p << r.estimate << r.standard_error << r.bound
            << (r.violation ? 1 : 0);
        add_hash_columns(row, ctx);
    }
    ctx.summary["violations"] = rep.violations;
    return csv;
}

inline CsvTable run_asymptotics(RunContext& ctx, const LevyModel& m, ConfigBlock& n) {
    const ExponentKind kind = n.text("exponent", "phi", {"phi", "psi"}) == "psi" ? ExponentKind::psi : ExponentKind::phi;
    const AsymptoticRegime regime = n.text("regime", "growing", {"growing", "vanishing"}) == "vanishing"
                                        ? AsymptoticRegime::vanishing
                                        : AsymptoticRegime::growing;
    auto u = n.has("u") ? sequence_from(n.child("u")) : [](int k) { return std::ldexp(1.0, k); };
    auto s = n.has("s") ? sequence_from(n.child("s")) : [](int k) { return -static_cast<double>(k); };
    const int n_max = count(n, "n_max", 30, 4, 2000);
    const double tol = positive(n, "tolerance", 0.1);
    const int from = count(n, "settled_from", n_max, 1, 2000);
    n.finish();
    const auto rep = exponent_asymptotics(m, kind, regime, u, s, n_max);
    CsvTable csv(header({"n", "u", "s", "product", "exponent", "reference", "ratio"}));
    for (const auto& r : rep.rows) {
        auto row = csv.row();
        row << r.n << r.u << r.s << r.product << r.exponent << r.reference << r.ratio;
        add_hash_columns(row, ctx);
    }
    ctx.summary["trend"] = to_string(rep.trend.verdict);
    ctx.results["trend"] = to_json(rep.trend);
    if (regime == AsymptoticRegime::growing) {
        ctx.summary["settled"] = rep.settled(tol, from);
        if (rep.trend.verdict == Verdict::indeterminate)
            ctx.indeterminate = true;
    } else {
        ctx.summary["bounded"] = rep.bounded;
    }
    ctx.summary["last_ratio"] = rep.rows.back().ratio;
    return csv;
}

} // namespace detail

/*!
 * Runs one experiment config and writes <experiment>-<hash>.json and .csv
 * into out_dir. ConfigError signals a schema problem; other Errors are
 * failures of the computation itself.
 */
inline RunResult run_experiment(json config, const std::filesystem::path& out_dir, int threads = 1,
                                std::optional<std::uint64_t> seed_override = std::nullopt) {
    if (!config.is_object())
        throw ConfigError("config must be a JSON object");
    if (seed_override)
        config["seed"] = *seed_override;
    detail::RunContext ctx;
    ctx.threads = std::max(1, threads);
    ctx.config = config;
    ctx.hash = config_hash(config);

    ConfigBlock top(config, "config");
    RunResult res;
    res.experiment = top.text("experiment", "", experiment_kinds());
    const long long seed = top.integer("seed", 0);
    if (seed < 0)
        throw ConfigError("config.seed must be non-negative");
    ctx.seed = static_cast<std::uint64_t>(seed);
    res.require_determinate = top.boolean("require_determinate", false);
    std::optional<LevyModel> model;
    if (top.has("model"))
        model = model_from(top.child("model"));
    std::optional<TestFunction> function;
    if (top.has("function"))
        function = function_from(top.child("function"));
    json empty = json::object();
    ConfigBlock numeric = top.has("numeric") ? top.child("numeric") : ConfigBlock(empty, "config.numeric");
    top.finish();

    const std::string& e = res.experiment;
    auto need_model = [&]() -> const LevyModel& {
        if (!model)
            throw ConfigError(e + " needs a model block");
        return *model;
    };
    auto need_function = [&]() -> const TestFunction& {
        if (!function)
            throw ConfigError(e + " needs a function block");
        return *function;
    };
    auto no_function = [&] {
        if (function)
            throw ConfigError("unknown field config.function for " + e);
    };

    CsvTable csv({});
    if (e == "sample-path") {
        no_function();
        csv = detail::run_sample_path(ctx, need_model(), numeric);
    } else if (e == "minorant") {
        no_function();
        csv = detail::run_minorant(ctx, need_model(), numeric);
    } else if (e == "phi-table") {
        no_function();
        csv = detail::run_phi_table(ctx, need_model(), numeric);
    } else if (e == "vertex-sim") {
        no_function();
        csv = detail::run_vertex_sim(ctx, need_model(), numeric);
    } else if (e == "criteria-fs") {
        csv = detail::run_criteria_fs(ctx, need_model(), need_function(), numeric);
    } else if (e == "criteria-is") {
        csv = detail::run_criteria_is(ctx, need_model(), need_function(), numeric);
    } else if (e == "additive-conditions") {
        csv = detail::run_additive(ctx, model, need_function(), numeric);
    } else if (e == "mc-fluctuation") {
        csv = detail::run_mc(ctx, need_model(), need_function(), numeric);
    } else if (e == "meander") {
        csv = detail::run_meander(ctx, need_model(), function, numeric);
    } else if (e == "audit-appendix") {
        no_function();
        csv = detail::run_audit(ctx, need_model(), numeric);
    } else {
        no_function();
        csv = detail::run_asymptotics(ctx, need_model(), numeric);
    }

    std::filesystem::create_directories(out_dir);
    const std::string stem = e + "-" + ctx.hash;
    res.hash = ctx.hash;
    res.summary = ctx.summary;
    res.indeterminate = ctx.indeterminate;
    res.json_path = (out_dir / (stem + ".json")).string();
    res.csv_path = (out_dir / (stem + ".csv")).string();
    json doc{{"experiment", e},
             {"config_hash", ctx.hash},
             {"seed", ctx.seed},
             {"config", config},
             {"summary", ctx.summary},
             {"results", ctx.results},
             {"csv", stem + ".csv"}};
    write_text(res.csv_path, csv.str());
    write_text(res.json_path, doc.dump(2) + "\n");
    return res;
}

struct ReportRow {
    std::string file;
    std::string experiment;
    std::string hash;
    std::string status; //!< ok, corrupt: ..., hash mismatch, csv missing, csv hash mismatch
    std::string summary;
};

/*!
 * One row per JSON artifact in dir, sorted by file name. Unreadable or
 * inconsistent artifacts are listed with their status, never fatal.
 */
inline std::vector<ReportRow> report_directory(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(dir))
        for (const auto& entry : std::filesystem::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<ReportRow> rows;
    for (const auto& p : files) {
        ReportRow r;
        r.file = p.filename().string();
        try {
            const json doc = json::parse(read_text(p.string()));
            r.experiment = doc.at("experiment").get<std::string>();
            r.hash = doc.at("config_hash").get<std::string>();
            std::string s;
            for (auto it = doc.at("summary").begin(); it != doc.at("summary").end(); ++it) {
                const auto& v = it.value();
                s += (s.empty() ? "" : "; ") + it.key() + "=" +
                     (v.is_string() ? v.get<std::string>() : v.is_number_float() ? format_real(v.get<double>()) : v.dump());
            }
            r.summary = s;
            r.status = "ok";
            if (config_hash(doc.at("config")) != r.hash) {
                r.status = "hash mismatch";
            } else {
                const auto csv = p.parent_path() / doc.at("csv").get<std::string>();
                if (!std::filesystem::exists(csv)) {
                    r.status = "csv missing";
                } else {
                    const std::string text = read_text(csv.string());
                    const auto first = text.find('\n');
                    const auto second = first == std::string::npos ? std::string::npos : text.find('\n', first + 1);
                    if (second != std::string::npos) {
                        const std::string line = text.substr(first + 1, second - first - 1);
                        const auto last = line.rfind(',');
                        const auto prev = line.rfind(',', last - 1);
                        if (last == std::string::npos || prev == std::string::npos ||
                            line.substr(prev + 1, last - prev - 1) != r.hash)
                            r.status = "csv hash mismatch";
                    }
                }
            }
        } catch (const std::exception& e) {
            r.status = std::string("corrupt: ") + e.what();
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

inline CsvTable report_csv(const std::vector<ReportRow>& rows) {
    CsvTable csv({"file", "experiment", "config_hash", "status", "summary"});
    auto clean = [](std::string s) {
        std::replace(s.begin(), s.end(), ',', ' ');
        std::replace(s.begin(), s.end(), '\n', ' ');
        return s;
    };
    for (const auto& r : rows)
        csv.row() << clean(r.file) << clean(r.experiment) << clean(r.hash) << clean(r.status) << clean(r.summary);
    return csv;
}

} // namespace cmlevy
