#include "hkflow/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "hkflow/sphere_exact.hpp"
#include "hkflow/text_io.hpp"

namespace hkflow {

double ScenarioConfig::sample_every_value() const {
    if (sample_every) return *sample_every;
    if (t_end) return *t_end / 50.0;
    return 1e-3;
}

ScenarioConfig config_from_json(const nlohmann::json& j) {
    ScenarioConfig c;
    if (j.contains("shape")) {
        const auto& s = j["shape"];
        std::string kind = s.value("kind", "sphere");
        if (kind == "sphere") {
            c.shape.kind = ShapeSpec::Kind::sphere;
            c.shape.R0 = s.value("R0", 1.0);
        } else if (kind == "spheroid") {
            c.shape.kind = ShapeSpec::Kind::spheroid;
            c.shape.a = s.value("a", 1.0);
            c.shape.c = s.value("c", 2.0);
        } else if (kind == "profile_file") {
            c.shape.kind = ShapeSpec::Kind::profile_file;
            c.shape.path = s.value("path", "");
        } else {
            throw ConfigError("unknown shape kind: " + kind);
        }
    }
    c.n = j.value("n", 2);
    c.k = j.value("k", 3);
    if (j.contains("alpha") && !j["alpha"].is_null()) c.alpha = j["alpha"].get<double>();
    c.N = j.value("N", 400);
    c.safety = j.value("safety", 0.2);
    c.dt_min = j.value("dt_min", 1e-15);
    if (j.contains("t_end") && !j["t_end"].is_null()) c.t_end = j["t_end"].get<double>();
    c.run_to_blowup = j.value("run_to_blowup", false);
    if (j.contains("H_cap") && !j["H_cap"].is_null()) c.H_cap = j["H_cap"].get<double>();
    if (j.contains("sample_every") && !j["sample_every"].is_null())
        c.sample_every = j["sample_every"].get<double>();
    c.stepper = j.value("stepper", "euler");
    c.resample_ratio = j.value("resample_ratio", 2.0);
    c.resample_enabled = j.value("resample_enabled", true);
    c.blowup_H_threshold = j.value("blowup_H_threshold", 1e6);
    c.blowup_A2_threshold = j.value("blowup_A2_threshold", 1e12);
    if (j.contains("ell_override") && !j["ell_override"].is_null())
        c.ell_override = j["ell_override"].get<int>();
    c.allow_outside_theorem = j.value("allow_outside_theorem", false);
    c.checkpoint_every_steps = j.value("checkpoint_every_steps", 0LL);
    c.out_dir = j.value("out_dir", ".");
    c.prefix = j.value("prefix", "run");
    c.emit_gnuplot = j.value("emit_gnuplot", false);
    if (j.contains("identities")) c.identities = j["identities"].get<std::vector<std::string>>();
    if (j.contains("verify_levels"))
        for (const auto& l : j["verify_levels"])
            c.verify_levels.emplace_back(l[0].get<int>(), l[1].get<double>());
    if (j.contains("tweak_term") && !j["tweak_term"].is_null()) {
        c.tweak_term = j["tweak_term"].get<std::string>();
        c.tweak_factor = j.value("tweak_factor", 1.0);
    }
    return c;
}

nlohmann::json config_to_json(const ScenarioConfig& c) {
    nlohmann::json j;
    nlohmann::json s;
    switch (c.shape.kind) {
        case ShapeSpec::Kind::sphere:
            s["kind"] = "sphere";
            s["R0"] = c.shape.R0;
            break;
        case ShapeSpec::Kind::spheroid:
            s["kind"] = "spheroid";
            s["a"] = c.shape.a;
            s["c"] = c.shape.c;
            break;
        case ShapeSpec::Kind::profile_file:
            s["kind"] = "profile_file";
            s["path"] = c.shape.path;
            break;
    }
    j["shape"] = s;
    j["n"] = c.n;
    j["k"] = c.k;
    j["alpha"] = c.alpha_value();
    j["N"] = c.N;
    j["safety"] = c.safety;
    j["dt_min"] = c.dt_min;
    j["t_end"] = c.t_end ? nlohmann::json(*c.t_end) : nlohmann::json(nullptr);
    j["run_to_blowup"] = c.run_to_blowup;
    j["H_cap"] = c.H_cap ? nlohmann::json(*c.H_cap) : nlohmann::json(nullptr);
    j["sample_every"] = c.sample_every_value();
    j["stepper"] = c.stepper;
    j["resample_ratio"] = c.resample_ratio;
    j["resample_enabled"] = c.resample_enabled;
    j["blowup_H_threshold"] = c.blowup_H_threshold;
    j["blowup_A2_threshold"] = c.blowup_A2_threshold;
    j["ell_override"] = c.ell_override ? nlohmann::json(*c.ell_override) : nlohmann::json(nullptr);
    j["allow_outside_theorem"] = c.allow_outside_theorem;
    j["checkpoint_every_steps"] = c.checkpoint_every_steps;
    j["emit_gnuplot"] = c.emit_gnuplot;
    return j;
}

std::string config_hash(const ScenarioConfig& c) {
    std::string s = config_to_json(c).dump();
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void validate_config(const ScenarioConfig& c, bool discrete_backend) {
    if (c.k % 2 == 0) throw ConfigError("k must be odd");
    if (c.k < 3) throw ConfigError("k must be >= 3");
    if (c.n < 2) throw ConfigError("n must be >= 2");
    if (c.alpha_value() < 1.0) throw ConfigError("alpha must be >= 1");
    if (!(c.safety > 0.0 && c.safety <= 1.0)) throw ConfigError("safety must be in (0,1]");
    if (!(c.dt_min > 0.0)) throw ConfigError("dt_min must be positive");
    if (c.stepper != "euler" && c.stepper != "midpoint")
        throw ConfigError("stepper must be euler or midpoint");
    if (!c.allow_outside_theorem && c.n + 1 < c.k)
        throw ConfigError("hypotheses require n+1 >= k (use --allow-outside-theorem to explore)");
    if (discrete_backend) {
        if (c.n != 2) throw ConfigError("the discrete backend is n=2 only");
        if (c.N < 64) throw ConfigError("N must be >= 64");
        if (!c.allow_outside_theorem && c.k != 3)
            throw ConfigError("n=2 requires k=3 inside the hypotheses (use --allow-outside-theorem)");
        if (c.ell_override && !ell_in_window(*c.ell_override, c.k))
            throw ConfigError("ell override outside the window -1/2-(3/2)k <= ell <= -1-k");
    }
}

ProfileSurface build_initial_surface(const ScenarioConfig& c) {
    switch (c.shape.kind) {
        case ShapeSpec::Kind::sphere: return sphere_profile(c.shape.R0, c.N);
        case ShapeSpec::Kind::spheroid: return spheroid_profile(c.shape.a, c.shape.c, c.N);
        case ShapeSpec::Kind::profile_file: {
            ProfileSurface s = read_profile_file(c.shape.path);
            s.validate();
            return s;
        }
    }
    throw ConfigError("bad shape");
}

namespace {

nlohmann::json ledger_json(const ConstantsLedger& L) {
    nlohmann::json j;
    j["n"] = L.n;
    j["k"] = L.k;
    j["alpha"] = L.alpha;
    j["ell"] = L.ell;
    j["H_min0"] = L.H_min0;
    j["C0"] = L.C0;
    j["C1"] = L.C1;
    j["C2"] = L.C2;
    j["C3"] = L.C3;
    j["C4"] = L.C4 ? nlohmann::json(*L.C4) : nlohmann::json(nullptr);
    j["H_cap"] = L.H_cap ? nlohmann::json(*L.H_cap) : nlohmann::json(nullptr);
    return j;
}

} // namespace

RunArtifacts run_scenario(const ScenarioConfig& c) {
    validate_config(c, true);
    if (!c.t_end && !c.run_to_blowup)
        throw ConfigError("set t_end or run_to_blowup");

    ProfileSurface initial = build_initial_surface(c);
    GeometryFields g0 = build_geometry(initial);
    if (!(g0.H_min() > 0.0))
        throw ConfigError("initial surface has H <= 0 somewhere; the flow requires "
                          "hypothesis (a): H(.) > 0 on M");

    RunArtifacts art;
    art.initial_convex = g0.convex;
    art.ledger = build_ledger(c.n, c.k, g0.H_min(), c.H_cap, c.alpha_value(), c.ell_override);

    StepControl ctl;
    ctl.k = c.k;
    ctl.alpha = c.alpha_value();
    ctl.safety = c.safety;
    ctl.dt_min = c.dt_min;
    ctl.H_cap = c.H_cap;
    ctl.midpoint = c.stepper == "midpoint";
    ctl.resample_ratio = c.resample_ratio;
    ctl.resample_enabled = c.resample_enabled;
    ctl.blowup_H_threshold = c.blowup_H_threshold;
    ctl.blowup_A2_threshold = c.blowup_A2_threshold;
    ctl.record_ledger = art.ledger;

    RunControl rc;
    rc.t_end = c.t_end;
    rc.run_to_blowup = c.run_to_blowup;
    rc.sample_every = c.sample_every_value();
    rc.checkpoint_every_steps = c.checkpoint_every_steps;

    std::string hash = config_hash(c);
    FlowEngine engine(std::move(initial), ctl, hash);
    RunResult res = engine.run(rc);
    art.checkpoint = engine.checkpoint();
    art.periodic_checkpoints = res.checkpoints;

    art.status = res.final_state.status;
    art.T_declared = res.final_state.t;
    art.steps = res.final_state.step_index;
    art.resample_events = res.resample_events;
    art.abort_reason = res.abort_reason;
    art.blowup = res.blowup;

    bool blew_up = art.status == FlowStatus::blown_up;
    art.analysis = analyze_records(res.records, art.ledger, c.alpha_value(), art.T_declared,
                                   blew_up);
    art.monitor_csv = art.analysis.csv;

    nlohmann::json v;
    v["config"] = config_to_json(c);
    v["config_hash"] = hash;
    v["ledger"] = ledger_json(art.ledger);
    v["status"] = art.status == FlowStatus::completed ? "completed"
                  : art.status == FlowStatus::blown_up ? "blown_up"
                  : art.status == FlowStatus::aborted  ? "aborted"
                                                       : "running";
    v["T_declared"] = art.T_declared;
    v["steps"] = art.steps;
    v["resample_events"] = art.resample_events;
    v["abort_reason"] = art.abort_reason;
    v["initial_convex"] = art.initial_convex;

    const auto& an = art.analysis;
    v["min_h"] = {{"pass", an.min_h.pass},
                  {"worst_slack", an.min_h.worst_slack},
                  {"tol", an.min_h.tol}};
    std::string qs = an.q_bound.status == QBoundVerdict::Status::pass ? "pass"
                     : an.q_bound.status == QBoundVerdict::Status::fail ? "fail"
                                                                        : "inconclusive";
    v["q_bound"] = {{"status", qs},
                    {"C5", an.q_bound.C5},
                    {"C6", an.q_bound.C6},
                    {"worst_violation", an.q_bound.worst_violation},
                    {"eligible_records", an.q_bound.eligible_records}};
    v["l_alpha"] = {{"alpha", c.alpha_value()},
                    {"accum", an.l_alpha.accum},
                    {"norm", an.l_alpha.norm},
                    {"divergent", an.l_alpha.divergent},
                    {"tail_ratio", an.l_alpha.tail_ratio},
                    {"log_slope", an.l_alpha.log_slope},
                    {"decades_used", an.l_alpha.decades_used}};
    v["ineq36"] = {{"min_slack", an.ineq36_min_slack}, {"pass", an.ineq36_pass}};
    v["blowup"] = blowup_report_json(art.blowup);

    bool fail = !an.min_h.pass || an.q_bound.status == QBoundVerdict::Status::fail ||
                art.blowup.lemma31_violation || art.status == FlowStatus::aborted;
    art.exit_code = fail ? 1 : 0;
    v["exit_code"] = art.exit_code;
    art.verdicts = std::move(v);
    return art;
}

std::vector<std::string> write_run_artifacts(const RunArtifacts& a, const ScenarioConfig& c) {
    namespace fs = std::filesystem;
    fs::create_directories(c.out_dir);
    std::vector<std::string> paths;
    auto emit = [&](const std::string& name, const std::string& content) {
        std::string p = (fs::path(c.out_dir) / (c.prefix + name)).string();
        std::ofstream f(p, std::ios::binary);
        f << content;
        paths.push_back(p);
    };
    emit("_monitor.csv", a.monitor_csv);
    emit("_verdicts.json", a.verdicts.dump(2) + "\n");
    emit("_blowup.json", blowup_report_json(a.blowup).dump(2) + "\n");
    if (!a.checkpoint.is_null()) emit("_checkpoint.json", a.checkpoint.dump(2) + "\n");
    for (size_t i = 0; i < a.periodic_checkpoints.size(); ++i)
        emit("_ckpt_" + std::to_string(i) + ".json", a.periodic_checkpoints[i].dump(2) + "\n");
    if (c.emit_gnuplot) emit("_plots.gp", gnuplot_script(c.prefix + "_monitor.csv", c.prefix));
    return paths;
}

VerifyArtifacts verify_scenario(const ScenarioConfig& c) {
    validate_config(c, true);
    VerifyArtifacts out;
    out.reports = nlohmann::json::array();

    StateSource source = StateSource::spheroid;
    switch (c.shape.kind) {
        case ShapeSpec::Kind::sphere: source = StateSource::analytic_sphere; break;
        case ShapeSpec::Kind::spheroid: source = StateSource::spheroid; break;
        case ShapeSpec::Kind::profile_file: source = StateSource::perturbed_spheroid; break;
    }

    std::vector<std::string> names = c.identities;
    if (names.empty()) names = {"H_evo", "A2_evo", "Hpow_evo", "ratio_evo", "ratio_evo_2k"};

    std::vector<RefinementLevel> levels;
    for (auto& [N, dt] : c.verify_levels) levels.push_back({N, dt});
    if (levels.empty()) {
        double dt0 = source == StateSource::analytic_sphere ? 1e-6 : 2e-3;
        levels = {{200, dt0}, {400, dt0 / 4.0}, {800, dt0 / 16.0}};
    }

    std::optional<IdentityTweak> tweak;
    if (c.tweak_term) tweak = IdentityTweak{*c.tweak_term, c.tweak_factor};

    int ell = c.ell_override.value_or(-2 - c.k);
    bool any_fail = false;
    for (const auto& name : names) {
        IdentitySpec spec{identity_from_name(name), ell};
        RefinementResult r = refinement_study(spec, source, levels, c.k, tweak);
        nlohmann::json rep;
        rep["identity"] = name;
        rep["nodes"] = levels.back().N;
        rep["dt"] = levels.back().dt;
        rep["max_residual"] = r.max_residual;
        rep["l2_residual"] = r.l2_residual;
        rep["orders"] = {{"p_h", r.h_floor ? nlohmann::json("floor") : nlohmann::json(r.p_h)},
                         {"p_t", r.t_floor ? nlohmann::json("floor") : nlohmann::json(r.p_t)}};
        rep["verdict"] = r.verdict;
        if (!r.pass) any_fail = true;
        out.reports.push_back(std::move(rep));
    }

    // Lemma 2.3 two-form consistency on the scenario surface at the finest N
    {
        int N = levels.back().N;
        GeometryFields g;
        switch (source) {
            case StateSource::analytic_sphere:
            case StateSource::sphere: g = build_geometry(sphere_profile(1.0, N)); break;
            case StateSource::spheroid: g = build_geometry(spheroid_profile(1.0, 2.0, N)); break;
            case StateSource::perturbed_spheroid:
                g = build_geometry(perturbed_spheroid_profile(1.0, 2.0, 0.01, N));
                break;
        }
        ConsistencyReport cr = verify_lemma23_consistency(g, c.k, ell);
        nlohmann::json rep;
        rep["identity"] = "lemma23_consistency";
        rep["nodes"] = N;
        rep["dt"] = 0.0;
        rep["max_residual"] = cr.max_interior;
        rep["l2_residual"] = nullptr;
        rep["orders"] = nullptr;
        bool pass = cr.max_interior <= 1e-10;
        rep["verdict"] = pass ? "pass" : "fail";
        if (!pass) any_fail = true;
        out.reports.push_back(std::move(rep));
    }

    out.exit_code = any_fail ? 1 : 0;
    return out;
}

namespace {

int sweep_thread_budget(size_t jobs) {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("HKFLOW_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) hw = static_cast<unsigned>(v);
    }
    return static_cast<int>(std::min<size_t>(hw, jobs));
}

} // namespace

SweepArtifacts sweep_scenarios(const ScenarioConfig& base, const std::string& axis,
                               const std::vector<double>& values) {
    static const std::vector<std::string> axes = {"alpha", "N", "safety", "c", "k"};
    if (std::find(axes.begin(), axes.end(), axis) == axes.end())
        throw ConfigError("invalid sweep axis: " + axis);

    SweepArtifacts out;
    std::string header =
        "axis,value,status,exit_code,T_declared,minh_pass,minh_worst_slack,qbound_status,"
        "lalpha_accum,lalpha_norm,lalpha_divergent,lemma31_violation\n";

    struct Row {
        std::string text;
        int exit_code = 0;
    };
    std::vector<Row> rows(values.size());

    auto run_one = [&](size_t i) {
        ScenarioConfig c = base;
        double v = values[i];
        if (axis == "alpha") c.alpha = v;
        else if (axis == "N") c.N = static_cast<int>(v);
        else if (axis == "safety") c.safety = v;
        else if (axis == "c") { c.shape.kind = ShapeSpec::Kind::spheroid; c.shape.c = v; }
        else if (axis == "k") c.k = static_cast<int>(v);
        Row row;
        try {
            RunArtifacts a = run_scenario(c);
            const auto& an = a.analysis;
            std::string status = a.status == FlowStatus::completed ? "completed"
                                 : a.status == FlowStatus::blown_up ? "blown_up"
                                                                    : "aborted";
            std::string qs = an.q_bound.status == QBoundVerdict::Status::pass ? "pass"
                             : an.q_bound.status == QBoundVerdict::Status::fail ? "fail"
                                                                                : "inconclusive";
            row.text = csv_row({axis, fmt_double(v), status, std::to_string(a.exit_code),
                                fmt_double(a.T_declared), an.min_h.pass ? "1" : "0",
                                fmt_double(an.min_h.worst_slack), qs,
                                fmt_double(an.l_alpha.accum), fmt_double(an.l_alpha.norm),
                                an.l_alpha.divergent ? "1" : "0",
                                a.blowup.lemma31_violation ? "1" : "0"});
            row.exit_code = a.exit_code;
        } catch (const std::exception& e) {
            row.text = csv_row({axis, fmt_double(v), std::string("error:") + e.what(), "2", "nan",
                                "0", "nan", "inconclusive", "nan", "nan", "0", "0"});
            row.exit_code = 2;
        }
        rows[i] = std::move(row);
    };

    int threads = sweep_thread_budget(values.size());
    if (threads <= 1 || values.size() <= 1) {
        for (size_t i = 0; i < values.size(); ++i) run_one(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < values.size(); i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto& th : pool) th.join();
    }

    out.csv = header;
    for (const auto& row : rows) out.csv += row.text;
    for (const auto& row : rows) out.exit_code = std::max(out.exit_code, row.exit_code == 0 ? 0 : 1);
    return out;
}

SphereExactArtifacts sphere_exact_table(const ScenarioConfig& c) {
    validate_config(c, false);
    if (c.shape.kind != ShapeSpec::Kind::sphere)
        throw ConfigError("sphere-exact needs shape=sphere");

    SphereSolution sol{c.n, c.k, c.shape.R0};
    ConstantsLedger L = build_ledger(c.n, c.k, c.n / c.shape.R0, c.H_cap, c.alpha_value(),
                                     c.ell_override);
    double T = sol.T_max();
    double alpha = c.alpha_value();

    SphereExactArtifacts out;
    out.csv = "t,R,H,A2,Q,area,lalpha_accum\n";
    const int M = 100;
    for (int i = 0; i <= M; ++i) {
        // last row just shy of T_max; the closed forms blow up at T
        double t = i < M ? T * i / M : T * (1.0 - 1e-9);
        SphereMonitors m = exact_monitors(sol, L, t);
        LAlphaResult la = l_alpha_norm(sol, alpha, t);
        out.csv += csv_row({fmt_double(t), fmt_double(sol.radius_at(t)), fmt_double(m.H),
                            fmt_double(m.A2), fmt_double(m.Q), fmt_double(m.area),
                            fmt_double(la.value)});
    }

    LAlphaResult full = l_alpha_norm(sol, alpha, T);
    out.summary["config"] = config_to_json(c);
    out.summary["ledger"] = ledger_json(L);
    out.summary["T_max"] = T;
    out.summary["alpha"] = alpha;
    out.summary["l_alpha_value"] = full.divergent ? nlohmann::json(nullptr)
                                                  : nlohmann::json(full.value);
    out.summary["l_alpha_norm"] = full.divergent ? nlohmann::json(nullptr)
                                                 : nlohmann::json(full.norm);
    out.summary["l_alpha_divergent"] = full.divergent;
    if (alpha == static_cast<double>(c.n + c.k + 1))
        out.summary["log_slope_per_decade"] = l_alpha_log_slope(sol);
    return out;
}

std::string gnuplot_script(const std::string& csv_name, const std::string& prefix) {
    std::string s;
    s += "set datafile separator ','\n";
    s += "set key autotitle columnhead\n";
    s += "set logscale y\n";
    s += "set xlabel 't'\n";
    s += "set terminal pngcairo size 1000,700\n";
    s += "set output '" + prefix + "_curvature.png'\n";
    s += "plot '" + csv_name + "' using 1:3 with lines, '' using 1:4 with lines, '' using 1:5 with lines\n";
    s += "set output '" + prefix + "_q.png'\n";
    s += "unset logscale y\n";
    s += "plot '" + csv_name + "' using 1:6 with lines, '' using 1:7 with lines\n";
    return s;
}

} // namespace hkflow
