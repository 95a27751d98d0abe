#include "bslab/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "bslab/error.hpp"
#include "bslab/parallel.hpp"
#include "bslab/resolvent.hpp"
#include "bslab/tolerances.hpp"

namespace bslab {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// CSV tables

std::string cell(double v) { return format_double(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }
std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }

    std::string render() const {
        std::string out = "schema_version";
        for (const auto& c : columns) out += "," + c;
        out += "\n";
        const std::string version = std::to_string(kCsvSchemaVersion);
        for (const auto& row : rows) {
            out += version;
            for (const auto& c : row) out += "," + c;
            out += "\n";
        }
        return out;
    }
};

void matrix_rows(Table& t, const std::vector<std::string>& prefix, const ComplexMatrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            auto row = prefix;
            row.insert(row.end(), {cell(i), cell(j), cell(m(i, j).real()), cell(m(i, j).imag())});
            t.add(std::move(row));
        }
}

// ---------------------------------------------------------------------------

struct Context {
    const OperatorModel& model;
    ParamReader& params;
    int threads;
    std::deque<Table> tables;
    json result = json::object();
    json* echo_sink = nullptr;
    bool parsed = false;

    /// Called once every parameter has been read, before any compute.
    void ready() {
        *echo_sink = params.finish();
        parsed = true;
    }

    Table& table(std::string name, std::vector<std::string> columns) {
        tables.push_back({std::move(name), std::move(columns), {}});
        return tables.back();
    }
};

PoleTrackingParams read_tracking(ParamReader& p, bool with_y_min) {
    PoleTrackingParams out;
    out.tracking.y0 = p.number("y0", 1.0);
    if (with_y_min) out.tracking.y_min = p.number("y_min", 1e-6);
    out.tracking.shrink = p.number("shrink", 0.5);
    out.tracking.box = p.box("box", CouplingBox{-2.0, 2.0, -2.0, 2.0});
    const auto window = p.reals("window", std::vector<double>{0.0, 1.0});
    if (window.size() != 2 || !(window[0] <= window[1])) {
        fail(ErrorCode::InvalidConfig, "config", p.field("window") + ": expected [lo, hi] with lo <= hi");
    }
    out.window_lo = window[0];
    out.window_hi = window[1];
    out.delta = p.number("delta", default_tolerances().impacting_delta);
    return out;
}

int numerical_rank(const ComplexMatrix& a, double rel) {
    const auto ev = hermitian_eig((a.adjoint() * a).real_part()).eigenvalues;
    const double top = std::sqrt(std::max(ev.back(), 0.0));
    int rank = 0;
    for (double e : ev) rank += std::sqrt(std::max(e, 0.0)) > rel * top;
    return rank;
}

// ---------------------------------------------------------------------------
// commands

void cmd_validate(Context& c) {
    const auto rep = validate(c.model);
    c.result = {{"pass", rep.pass},
                {"reasons", rep.reasons},
                {"h0_hermiticity", rep.h0_hermiticity},
                {"j_hermiticity", rep.j_hermiticity},
                {"f_min_singular", rep.f_min_singular},
                {"f_min_pivot", rep.f_min_pivot},
                {"interval_ok", rep.interval_ok},
                {"dim", c.model.dim()}};
}

void cmd_lap_probe(Context& c) {
    const auto grid = c.params.grid("lambda_grid");
    const auto ys = c.params.grid("y_schedule", json{{"start", 0.1}, {"ratio", 0.5}, {"count", 20}});
    c.ready();
    const auto rep = lap_probe(c.model, grid, ys, c.threads);

    auto& pts = c.table("lap_points", {"lambda", "converged", "last_increment", "distance_to_spectrum", "level_spacing", "limit_frobenius"});
    auto& inc = c.table("lap_increments", {"lambda", "step", "y_from", "y_to", "increment"});
    auto& lim = c.table("lap_limits", {"lambda", "i", "j", "re", "im"});
    int converged = 0;
    for (const auto& p : rep.points) {
        converged += p.converged;
        const double last = p.increments.empty() ? 0.0 : p.increments.back();
        pts.add({cell(p.lambda), cell(p.converged), cell(last), cell(p.distance_to_spectrum), cell(p.level_spacing),
                 cell(frobenius_norm(p.limit))});
        for (std::size_t k = 0; k < p.increments.size(); ++k)
            inc.add({cell(p.lambda), cell(k), cell(ys[k]), cell(ys[k + 1]), cell(p.increments[k])});
        matrix_rows(lim, {cell(p.lambda)}, p.limit);
    }
    c.result = {{"modulus_of_continuity", rep.modulus_of_continuity},
                {"tol_lap", rep.tol_lap},
                {"monotone_steps", rep.monotone_steps},
                {"converged_points", converged},
                {"points", rep.points.size()}};
}

void write_points(Context& c, const std::vector<ResonancePoint>& pts, bool with_riesz) {
    auto& t = c.table("resonances", {"point", "re_r", "im_r", "multiplicity", "det_residual", "riesz_frobenius"});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        t.add({cell(i), cell(p.r.real()), cell(p.r.imag()), cell(p.multiplicity), cell(p.det_residual),
               cell(p.riesz.empty() ? 0.0 : frobenius_norm(p.riesz))});
    }
    if (!with_riesz) return;
    auto& k = c.table("riesz", {"point", "i", "j", "re", "im"});
    for (std::size_t i = 0; i < pts.size(); ++i) matrix_rows(k, {cell(i)}, pts[i].riesz);
}

void cmd_resonance_locate(Context& c) {
    const SpectralParameter z{c.params.number("lambda"), c.params.number("y")};
    const auto box = c.params.box("box", CouplingBox{-2.0, 2.0, -2.0, 2.0});
    const bool with_riesz = c.params.boolean("riesz", true);
    c.ready();
    const auto res = locate_resonances_robust(c.model, z, box, {.with_riesz = with_riesz});
    write_points(c, res.points, with_riesz);
    auto& u = c.table("unresolved", {"re_min", "re_max", "im_min", "im_max", "winding", "reason"});
    for (const auto& b : res.unresolved)
        u.add({cell(b.box.re_min), cell(b.box.re_max), cell(b.box.im_min), cell(b.box.im_max), cell(b.winding), cell(b.reason)});
    int total = 0;
    for (const auto& p : res.points) total += p.multiplicity;
    c.result = {{"points", res.points.size()}, {"multiplicity_sum", total}, {"unresolved", res.unresolved.size()},
                {"det_scale", res.det_scale}};
}

void cmd_resonance_track(Context& c) {
    const auto grid = c.params.grid("lambda_grid");
    const auto tp = read_tracking(c.params, true);
    c.ready();
    std::vector<TrajectorySet> sets(grid.size());
    parallel_for(grid.size(), c.threads, [&](std::size_t i) {
        sets[i] = classify_impacting(track_trajectories(c.model, grid[i], tp.tracking), tp.window_lo, tp.window_hi, tp.delta);
    });
    auto& tr = c.table("trajectories", {"lambda", "branch", "y", "re_r", "im_r", "multiplicity"});
    auto& br = c.table("branches", {"lambda", "branch", "re_endpoint", "im_endpoint", "window_distance", "impacting",
                                    "branching_suspected", "lost", "points"});
    int impacting = 0, flagged = 0, inserted = 0;
    for (const auto& s : sets) {
        inserted += s.inserted_rungs;
        for (std::size_t b = 0; b < s.branches.size(); ++b) {
            const auto& branch = s.branches[b];
            impacting += branch.impacting;
            flagged += branch.branching_suspected || branch.lost;
            for (const auto& p : branch.points)
                tr.add({cell(s.lambda), cell(b), cell(p.y), cell(p.r.real()), cell(p.r.imag()), cell(p.multiplicity)});
            br.add({cell(s.lambda), cell(b), cell(branch.endpoint.real()), cell(branch.endpoint.imag()), cell(branch.window_distance),
                    cell(branch.impacting), cell(branch.branching_suspected), cell(branch.lost), cell(branch.points.size())});
        }
    }
    c.result = {{"impacting_branches", impacting}, {"flagged_branches", flagged}, {"inserted_rungs", inserted}};
}

void cmd_riesz(Context& c) {
    const SpectralParameter z{c.params.number("lambda"), c.params.number("y")};
    const cplx r = c.params.complex("r");
    const double radius = c.params.number("radius");
    const int nodes = c.params.integer("nodes", default_tolerances().contour_nodes);
    c.ready();
    const auto k = riesz_operator(c.model, z, r, radius, nodes);
    matrix_rows(c.table("riesz", {"i", "j", "re", "im"}), {}, k);
    const auto kj = k * c.model.j();
    const double kj_norm = frobenius_norm(kj);
    c.result = {{"frobenius", frobenius_norm(k)},
                {"idempotency_residual", kj_norm > 0.0 ? frobenius_norm(kj * kj - kj) / kj_norm : 0.0},
                {"rank", numerical_rank(k, 1e-8)}};
}

void cmd_resonance_index(Context& c) {
    const double lambda = c.params.number("lambda");
    const double r = c.params.number("r");
    const double y_probe = c.params.number("y_probe", 1e-4);
    const auto box = c.params.box("box", CouplingBox{r - 1.0, r + 1.0, -1.0, 1.0});
    const double h = c.params.number("crossing_h", 1e-3);
    c.ready();
    const auto rep = resonance_index(c.model, lambda, r, y_probe, box);
    auto& t = c.table("resonance_index", {"lambda", "r", "y_probe", "n_plus", "n_minus", "index", "crossing_count"});
    std::string crossing;
    if (h > 0.0) {
        const int cc = crossing_count(c.model, lambda, r - h, r + h);
        crossing = cell(cc);
        c.result["crossing_count"] = cc;
    }
    t.add({cell(rep.lambda), cell(rep.r), cell(rep.y_min), cell(rep.n_plus), cell(rep.n_minus), cell(rep.index), crossing});
    c.result["index"] = rep.index;
}

void cmd_stone_check(Context& c) {
    const double r = c.params.number("r");
    const auto phi = c.params.test_function("phi");
    const auto ys = c.params.grid("y_schedule", json{{"start", 0.08}, {"ratio", 0.5}, {"count", 4}});
    c.ready();
    const auto rep = stone_convergence(c.model, r, phi, ys);
    auto& e = c.table("stone_errors", {"y", "error", "value_frobenius"});
    auto& v = c.table("stone_values", {"kind", "y", "i", "j", "re", "im"});
    for (std::size_t k = 0; k < ys.size(); ++k) {
        e.add({cell(ys[k]), cell(rep.errors[k]), cell(frobenius_norm(rep.values[k]))});
        matrix_rows(v, {"value", cell(ys[k])}, rep.values[k]);
    }
    matrix_rows(v, {"reference", cell(0.0)}, rep.reference);
    c.result = {{"order", rep.order}, {"reference_frobenius", frobenius_norm(rep.reference)}};
}

void cmd_stone_split(Context& c) {
    const double r = c.params.number("r");
    const auto phi = c.params.test_function("phi");
    const double y = c.params.number("y");
    const auto tp = read_tracking(c.params, false);
    c.ready();
    const auto split = split_stone(c.model, r, phi, y, tracking_pole_provider(c.model, y, tp));
    auto& t = c.table("stone_split", {"part", "i", "j", "re", "im"});
    matrix_rows(t, {"ac"}, split.ac_part);
    matrix_rows(t, {"pole"}, split.pole_part);
    matrix_rows(t, {"total"}, split.total);
    const double total = frobenius_norm(split.total);
    c.result = {{"additivity_residual", frobenius_norm(split.ac_part + split.pole_part - split.total) / std::max(total, 1e-300)},
                {"ac_frobenius", frobenius_norm(split.ac_part)},
                {"pole_frobenius", frobenius_norm(split.pole_part)},
                {"total_frobenius", total},
                {"evaluations", split.nodes}};
}

struct SelectionRequest {
    double epsilon = 0.0;
    std::vector<double> grid;
    PoleTrackingParams tracking;
};

SelectionRequest read_selection(ParamReader& p) {
    SelectionRequest req;
    req.epsilon = p.number("epsilon");
    req.grid = p.grid("lambda_grid");
    req.tracking = read_tracking(p, true);
    return req;
}

CompactSelection run_selection(Context& c, const SelectionRequest& req) {
    auto sel = select_compact_k(c.model, req.epsilon, req.grid, req.tracking, c.threads);

    auto& k = c.table("k_set", {"interval", "a", "b"});
    for (std::size_t i = 0; i < sel.k_set.intervals.size(); ++i)
        k.add({cell(i), cell(sel.k_set.intervals[i].a), cell(sel.k_set.intervals[i].b)});
    auto& ex = c.table("exclusions", {"lambda", "lo", "hi", "reason"});
    for (const auto& e : sel.k_set.exclusions) ex.add({cell(e.lambda), cell(e.lo), cell(e.hi), cell(e.reason)});
    auto& ic = c.table("impacting_counts", {"lambda", "impacting_branches"});
    for (std::size_t i = 0; i < req.grid.size(); ++i) ic.add({cell(req.grid[i]), cell(sel.impacting_counts[i])});
    c.result["epsilon"] = req.epsilon;
    c.result["excised_measure"] = sel.excised_measure;
    c.result["k_measure"] = sel.k_set.measure();
    c.result["exclusions"] = sel.k_set.exclusions.size();
    return sel;
}

void cmd_select_k(Context& c) {
    const auto req = read_selection(c.params);
    c.ready();
    run_selection(c, req);
}

void cmd_stability_scan(Context& c) {
    const auto rs = c.params.grid("r_grid");
    KSet k;
    if (c.params.has("k_set")) {
        if (c.params.has("select")) {
            fail(ErrorCode::InvalidConfig, "config", c.params.field("select") + ": give either k_set or select, not both");
        }
        k = c.params.intervals("k_set");
        c.ready();
    } else if (c.params.has("select")) {
        ParamReader sel(c.params.object("select"), c.params.field("select"));
        const auto req = read_selection(sel);
        c.params.attach("select", sel.finish());
        c.ready();
        k = run_selection(c, req).k_set;
    } else {
        fail(ErrorCode::InvalidConfig, "config", c.params.field("k_set") + ": required unless select is given");
    }
    const auto rep = stability_scan(c.model, k, rs, c.threads);
    auto& t = c.table("stability_scan", {"r", "hs_norm", "eig_count"});
    for (std::size_t i = 0; i < rs.size(); ++i) t.add({cell(rs[i]), cell(rep.hs_norms[i]), cell(rep.eig_counts[i])});
    c.result["max_hs"] = rep.max_hs;
    c.result["f_frobenius"] = frobenius_norm(c.model.f());
    c.result["k_measure"] = k.measure();
}

using Handler = std::function<void(Context&)>;

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table{
        {"validate", cmd_validate},
        {"lap-probe", cmd_lap_probe},
        {"resonance-locate", cmd_resonance_locate},
        {"resonance-track", cmd_resonance_track},
        {"riesz", cmd_riesz},
        {"resonance-index", cmd_resonance_index},
        {"stone-check", cmd_stone_check},
        {"stone-split", cmd_stone_split},
        {"select-k", cmd_select_k},
        {"stability-scan", cmd_stability_scan},
    };
    return table;
}

// ---------------------------------------------------------------------------

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json tolerances_json() {
    const auto& t = default_tolerances();
    return {{"singular_pivot", t.singular_pivot},
            {"hermitian", t.hermitian},
            {"lap_tol", t.lap_tol},
            {"lap_monotone_steps", t.lap_monotone_steps},
            {"boundary_zero_rel", t.boundary_zero_rel},
            {"cluster", t.cluster},
            {"quadtree_depth", t.quadtree_depth},
            {"contour_nodes", t.contour_nodes},
            {"contour_nodes_max", t.contour_nodes_max},
            {"contour_rel", t.contour_rel},
            {"impacting_delta", t.impacting_delta},
            {"halving_max", t.halving_max},
            {"membership", t.membership},
            {"stone_rel", t.stone_rel},
            {"stone_max_evals", t.stone_max_evals}};
}

RunStatus status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidConfig:
        case ErrorCode::NonHermitianInput:
        case ErrorCode::InvalidArgument:
            return RunStatus::InvalidConfig;
        case ErrorCode::IoError:
            return RunStatus::IoError;
        default:
            return RunStatus::ComputeError;
    }
}

const char* category(RunStatus s) {
    switch (s) {
        case RunStatus::Ok: return "ok";
        case RunStatus::InvalidConfig: return "InvalidConfig";
        case RunStatus::ComputeError: return "ComputeError";
        case RunStatus::IoError: return "IoError";
    }
    return "unknown";
}

json load_model_json(const json& spec, const fs::path& base_dir) {
    if (!spec.is_string()) return spec;
    const fs::path p = fs::path(spec.get<std::string>()).is_absolute() ? fs::path(spec.get<std::string>())
                                                                       : base_dir / spec.get<std::string>();
    std::ifstream in(p);
    if (!in) fail(ErrorCode::IoError, "run", "cannot read model file " + p.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidConfig, "config", "model file " + p.string() + ": " + e.what());
    }
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) fail(ErrorCode::IoError, "run", "cannot write " + p.string());
}

/// Removes files a previous manifest in this directory listed, so the
/// directory only ever holds the current run's outputs.
void clear_previous(const fs::path& dir) {
    const fs::path manifest = dir / "manifest.json";
    std::ifstream in(manifest);
    if (!in) return;
    try {
        const json old = json::parse(in);
        for (const auto& f : old.value("files", json::array())) {
            const auto name = f.value("name", std::string{});
            if (!name.empty() && name.find('/') == std::string::npos) fs::remove(dir / name);
        }
    } catch (const json::exception&) {
        // unreadable manifest from someone else: leave the directory alone
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const std::vector<std::string>& experiment_commands() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, h] : handlers()) out.push_back(name);
        return out;
    }();
    return names;
}

RunOutcome run_experiment(const json& config, const RunOptions& options) {
    RunOutcome outcome;
    json& m = outcome.manifest;
    m["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    m["started_at"] = utc_now();
    m["threads"] = options.threads;
    m["tolerances"] = tolerances_json();
    m["files"] = json::array();
    m["failure"] = nullptr;
    m["result"] = json::object();
    json echo = json::object();
    json params_echo;

    std::deque<Table> tables;
    try {
        ParamReader top(config, "config");
        const std::string command = top.string("command", options.command);
        if (!options.command.empty() && command != options.command) {
            fail(ErrorCode::InvalidConfig, "config", "config.command: \"" + command + "\" does not match the invoked command \"" +
                                                         options.command + "\"");
        }
        const auto it = handlers().find(command);
        if (it == handlers().end()) fail(ErrorCode::InvalidConfig, "config", "config.command: unknown command \"" + command + "\"");
        echo["command"] = command;

        if (!top.has("model")) fail(ErrorCode::InvalidConfig, "config", "config.model: required");
        const json model_json = load_model_json(top.object("model", true), options.base_dir);
        ModelConfig mc = model_config_from_json(model_json, "config.model");
        const std::uint64_t seed = options.seed ? *options.seed : top.u64("seed", mc.seed);
        mc.seed = seed;
        echo["seed"] = seed;
        echo["model"] = model_config_to_json(mc);
        m["seed"] = seed;
        if (top.has("out")) top.string("out");
        const json params_json = top.has("params") ? top.object("params") : json::object();
        top.finish();

        const OperatorModel model = build_model(mc);
        ParamReader params(params_json, "config.params");
        Context ctx{model, params, options.threads, {}, json::object(), &params_echo};
        it->second(ctx);
        if (!ctx.parsed) ctx.ready();
        tables = std::move(ctx.tables);
        m["result"] = ctx.result;
        outcome.status = RunStatus::Ok;
    } catch (const Error& e) {
        outcome.status = status_for(e.code());
        m["failure"] = {{"category", category(outcome.status)}, {"code", std::string(to_string(e.code()))},
                        {"operation", e.operation()}, {"message", e.what()}};
        tables.clear();
    } catch (const json::exception& e) {
        outcome.status = RunStatus::InvalidConfig;
        m["failure"] = {{"category", "InvalidConfig"}, {"code", "InvalidConfig"}, {"operation", "config"}, {"message", e.what()}};
        tables.clear();
    } catch (const std::exception& e) {
        outcome.status = RunStatus::ComputeError;
        m["failure"] = {{"category", "ComputeError"}, {"code", "Internal"}, {"operation", "run"}, {"message", e.what()}};
        tables.clear();
    }
    if (!params_echo.is_null()) echo["params"] = params_echo;
    m["config"] = echo;

    // outputs are written once, after the command has finished
    fs::path out_dir = "out";
    if (options.out_dir) {
        out_dir = *options.out_dir;
    } else if (config.is_object() && config.contains("out") && config["out"].is_string()) {
        out_dir = options.base_dir / config["out"].get<std::string>();
    }
    try {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec || !fs::is_directory(out_dir)) {
            fail(ErrorCode::IoError, "run", "cannot create output directory " + out_dir.string());
        }
        clear_previous(out_dir);
        for (const auto& t : tables) {
            const std::string name = t.name + ".csv";
            write_text(out_dir / name, t.render());
            json cols = json::array({"schema_version"});
            for (const auto& col : t.columns) cols.push_back(col);
            m["files"].push_back({{"name", name}, {"rows", t.rows.size()}, {"columns", cols}});
        }
        m["status"] = outcome.status == RunStatus::Ok ? "ok" : "failed";
        m["exit_code"] = static_cast<int>(outcome.status);
        m["finished_at"] = utc_now();
        outcome.manifest_path = out_dir / "manifest.json";
        write_text(outcome.manifest_path, m.dump(2) + "\n");
    } catch (const Error& e) {
        outcome.status = RunStatus::IoError;
        m["status"] = "failed";
        m["exit_code"] = static_cast<int>(outcome.status);
        m["failure"] = {{"category", "IoError"}, {"code", "IoError"}, {"operation", e.operation()}, {"message", e.what()}};
        outcome.manifest_path.clear();
    }
    return outcome;
}

std::vector<RunOutcome> run_config(const json& config, const RunOptions& options) {
    if (!config.is_array()) return {run_experiment(config, options)};
    std::vector<RunOutcome> out;
    for (std::size_t i = 0; i < config.size(); ++i) {
        RunOptions o = options;
        char dir[32];
        std::snprintf(dir, sizeof dir, "run-%03zu", i);
        if (options.out_dir) {
            o.out_dir = *options.out_dir / dir;
        } else if (!(config[i].is_object() && config[i].contains("out"))) {
            o.out_dir = fs::path("out") / dir;
        }
        out.push_back(run_experiment(config[i], o));
    }
    return out;
}

RunStatus combined_status(const std::vector<RunOutcome>& outcomes) {
    RunStatus worst = RunStatus::Ok;
    for (const auto& o : outcomes)
        if (static_cast<int>(o.status) > static_cast<int>(worst)) worst = o.status;
    return worst;
}

}  // namespace bslab
