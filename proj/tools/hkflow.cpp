#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hkflow/scenario.hpp"
#include "hkflow/text_io.hpp"

using namespace hkflow;
namespace fs = std::filesystem;

namespace {

struct CliOverrides {
    std::optional<std::string> shape;
    std::optional<double> R0, a, c;
    std::optional<std::string> profile_path;
    std::optional<int> n, k, N;
    std::optional<double> alpha, safety, dt_min, t_end, H_cap, sample_every;
    bool run_to_blowup = false;
    std::optional<std::string> stepper;
    std::optional<double> resample_ratio;
    std::optional<int> ell;
    bool allow_outside_theorem = false;
    bool emit_gnuplot = false;
    std::optional<long long> checkpoint_every;
    std::optional<std::string> out_dir, prefix;
};

void add_common(CLI::App* cmd, std::string& config_path, CliOverrides& ov) {
    cmd->add_option("--config", config_path, "scenario config JSON");
    cmd->add_option("--shape", ov.shape, "sphere|spheroid|profile");
    cmd->add_option("--R0", ov.R0, "sphere radius");
    cmd->add_option("--a", ov.a, "spheroid equatorial semi-axis");
    cmd->add_option("--c", ov.c, "spheroid polar semi-axis");
    cmd->add_option("--profile", ov.profile_path, "profile file path");
    cmd->add_option("--n", ov.n, "dimension (discrete backend: 2)");
    cmd->add_option("--k", ov.k, "flow exponent, odd >= 3");
    cmd->add_option("--alpha", ov.alpha, "space-time norm exponent");
    cmd->add_option("--N", ov.N, "profile node count");
    cmd->add_option("--safety", ov.safety, "time step safety factor");
    cmd->add_option("--dt-min", ov.dt_min, "step-collapse threshold");
    cmd->add_option("--t-end", ov.t_end, "stop time");
    cmd->add_flag("--run-to-blowup", ov.run_to_blowup, "run until blow-up is declared");
    cmd->add_option("--H-cap", ov.H_cap, "eligibility cap C for the Q-bound checks");
    cmd->add_option("--sample-every", ov.sample_every, "monitor sample interval");
    cmd->add_option("--stepper", ov.stepper, "euler|midpoint");
    cmd->add_option("--resample-ratio", ov.resample_ratio, "spacing ratio triggering resample");
    cmd->add_option("--ell", ov.ell, "override the exponent ell");
    cmd->add_flag("--allow-outside-theorem", ov.allow_outside_theorem,
                  "permit (n,k) outside the hypothesis window");
    cmd->add_flag("--emit-gnuplot", ov.emit_gnuplot, "write a companion gnuplot script");
    cmd->add_option("--checkpoint-every", ov.checkpoint_every, "periodic checkpoint stride (steps)");
    cmd->add_option("--out-dir", ov.out_dir, "output directory");
    cmd->add_option("--prefix", ov.prefix, "output file prefix");
}

ScenarioConfig load_config(const std::string& config_path, const CliOverrides& ov) {
    ScenarioConfig c;
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw ConfigError("cannot open config: " + config_path);
        nlohmann::json j;
        f >> j;
        c = config_from_json(j);
    }
    if (ov.shape) {
        if (*ov.shape == "sphere") c.shape.kind = ShapeSpec::Kind::sphere;
        else if (*ov.shape == "spheroid") c.shape.kind = ShapeSpec::Kind::spheroid;
        else if (*ov.shape == "profile") c.shape.kind = ShapeSpec::Kind::profile_file;
        else throw ConfigError("unknown shape: " + *ov.shape);
    }
    if (ov.R0) c.shape.R0 = *ov.R0;
    if (ov.a) c.shape.a = *ov.a;
    if (ov.c) c.shape.c = *ov.c;
    if (ov.profile_path) c.shape.path = *ov.profile_path;
    if (ov.n) c.n = *ov.n;
    if (ov.k) c.k = *ov.k;
    if (ov.alpha) c.alpha = *ov.alpha;
    if (ov.N) c.N = *ov.N;
    if (ov.safety) c.safety = *ov.safety;
    if (ov.dt_min) c.dt_min = *ov.dt_min;
    if (ov.t_end) c.t_end = *ov.t_end;
    if (ov.run_to_blowup) c.run_to_blowup = true;
    if (ov.H_cap) c.H_cap = *ov.H_cap;
    if (ov.sample_every) c.sample_every = *ov.sample_every;
    if (ov.stepper) c.stepper = *ov.stepper;
    if (ov.resample_ratio) c.resample_ratio = *ov.resample_ratio;
    if (ov.ell) c.ell_override = *ov.ell;
    if (ov.allow_outside_theorem) c.allow_outside_theorem = true;
    if (ov.emit_gnuplot) c.emit_gnuplot = true;
    if (ov.checkpoint_every) c.checkpoint_every_steps = *ov.checkpoint_every;
    if (ov.out_dir) c.out_dir = *ov.out_dir;
    if (ov.prefix) c.prefix = *ov.prefix;
    return c;
}

void write_text(const fs::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    f << content;
}

void write_meta(const ScenarioConfig& c, const std::string& command, double wall_seconds) {
    nlohmann::json j;
    j["tool"] = "hkflow";
    j["command"] = command;
    j["wall_seconds"] = wall_seconds;
    fs::create_directories(c.out_dir);
    write_text(fs::path(c.out_dir) / (c.prefix + "_meta.json"), j.dump(2) + "\n");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hkflow: H^k mean curvature flow simulator and verifier"};
    app.require_subcommand(1);

    std::string config_path;
    CliOverrides ov;

    auto* run_cmd = app.add_subcommand("run", "integrate a flow scenario");
    add_common(run_cmd, config_path, ov);

    auto* verify_cmd = app.add_subcommand("verify", "run the evolution-identity residual suite");
    add_common(verify_cmd, config_path, ov);
    std::vector<std::string> identities;
    verify_cmd->add_option("--identity", identities, "identity names (default: all)");

    auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario family over one parameter");
    add_common(sweep_cmd, config_path, ov);
    std::string axis;
    std::vector<double> values;
    sweep_cmd->add_option("--axis", axis, "alpha|N|safety|c|k")->required();
    sweep_cmd->add_option("--values", values, "axis values");

    auto* exact_cmd = app.add_subcommand("sphere-exact", "emit exact sphere trajectories");
    add_common(exact_cmd, config_path, ov);

    CLI11_PARSE(app, argc, argv);
    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    try {
        ScenarioConfig c = load_config(config_path, ov);

        if (run_cmd->parsed()) {
            RunArtifacts a = run_scenario(c);
            auto paths = write_run_artifacts(a, c);
            write_meta(c, "run", elapsed());
            std::cout << "status=" << a.verdicts["status"].get<std::string>()
                      << " T=" << fmt_double(a.T_declared)
                      << " minH=" << (a.analysis.min_h.pass ? "pass" : "fail")
                      << " exit=" << a.exit_code << "\n";
            for (const auto& p : paths) std::cout << "wrote " << p << "\n";
            return a.exit_code;
        }

        if (verify_cmd->parsed()) {
            if (!identities.empty()) c.identities = identities;
            VerifyArtifacts a = verify_scenario(c);
            fs::create_directories(c.out_dir);
            write_text(fs::path(c.out_dir) / (c.prefix + "_verify.json"), a.reports.dump(2) + "\n");
            write_meta(c, "verify", elapsed());
            for (const auto& rep : a.reports)
                std::cout << rep["identity"].get<std::string>() << ": "
                          << rep["verdict"].get<std::string>() << "\n";
            return a.exit_code;
        }

        if (sweep_cmd->parsed()) {
            SweepArtifacts a = sweep_scenarios(c, axis, values);
            fs::create_directories(c.out_dir);
            write_text(fs::path(c.out_dir) / (c.prefix + "_sweep.csv"), a.csv);
            write_meta(c, "sweep", elapsed());
            std::cout << a.csv;
            return a.exit_code;
        }

        if (exact_cmd->parsed()) {
            SphereExactArtifacts a = sphere_exact_table(c);
            fs::create_directories(c.out_dir);
            write_text(fs::path(c.out_dir) / (c.prefix + "_exact.csv"), a.csv);
            write_text(fs::path(c.out_dir) / (c.prefix + "_exact.json"), a.summary.dump(2) + "\n");
            write_meta(c, "sphere-exact", elapsed());
            std::cout << "T_max=" << fmt_double(a.summary["T_max"].get<double>()) << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
