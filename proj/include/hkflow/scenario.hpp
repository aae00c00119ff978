#pragma once
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hkflow/constants_ledger.hpp"
#include "hkflow/flow_engine.hpp"
#include "hkflow/monitors.hpp"
#include "hkflow/profile.hpp"
#include "hkflow/residuals.hpp"

// Batch front-end plumbing shared by the CLI and the test suites: scenario
// configuration, the run/verify/sweep/sphere-exact drivers, and their file
// artifacts. Everything here is deterministic: identical configs produce
// byte-identical CSV/JSON (run metadata with timing lives in a sidecar).

namespace hkflow {

// Invalid input (exit code 2 at the CLI).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeSpec {
    enum class Kind { sphere, spheroid, profile_file };
    Kind kind = Kind::sphere;
    double R0 = 1.0;
    double a = 1.0, c = 2.0;
    std::string path;
};

struct ScenarioConfig {
    ShapeSpec shape;
    int n = 2;
    int k = 3;
    std::optional<double> alpha;       // default n+k+1
    int N = 400;
    double safety = 0.2;
    double dt_min = 1e-15;
    std::optional<double> t_end;
    bool run_to_blowup = false;
    std::optional<double> H_cap;
    std::optional<double> sample_every;  // default t_end/50, else 1e-3
    std::string stepper = "euler";       // euler | midpoint
    double resample_ratio = 2.0;
    bool resample_enabled = true;
    double blowup_H_threshold = 1e6;
    double blowup_A2_threshold = 1e12;
    std::optional<int> ell_override;
    bool allow_outside_theorem = false;
    long long checkpoint_every_steps = 0;
    std::string out_dir = ".";
    std::string prefix = "run";
    bool emit_gnuplot = false;

    // verify subcommand
    std::vector<std::string> identities;            // default: all five
    std::vector<std::pair<int, double>> verify_levels;  // default per shape
    std::optional<std::string> tweak_term;          // negative-control hook
    double tweak_factor = 1.0;

    double alpha_value() const { return alpha.value_or(static_cast<double>(n + k + 1)); }
    double sample_every_value() const;
};

ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& c);  // resolved echo
std::string config_hash(const ScenarioConfig& c);        // FNV-1a 64 over the echo

// Throws ConfigError on invalid input; discrete_backend enforces the
// theorem-hypothesis window (n = 2, k = 3 without the override flag).
void validate_config(const ScenarioConfig& c, bool discrete_backend);

ProfileSurface build_initial_surface(const ScenarioConfig& c);

struct RunArtifacts {
    int exit_code = 0;
    FlowStatus status = FlowStatus::running;
    double T_declared = 0.0;
    ConstantsLedger ledger;
    MonitorAnalysis analysis;
    BlowupReport blowup;
    nlohmann::json verdicts;
    nlohmann::json checkpoint;
    std::vector<nlohmann::json> periodic_checkpoints;
    std::string monitor_csv;
    long long steps = 0;
    int resample_events = 0;
    std::string abort_reason;
    bool initial_convex = false;
};

RunArtifacts run_scenario(const ScenarioConfig& c);
// Writes monitor CSV, verdicts/blow-up JSON, final + periodic checkpoints,
// and the optional gnuplot companion; returns the list of paths written.
std::vector<std::string> write_run_artifacts(const RunArtifacts& a, const ScenarioConfig& c);

struct VerifyArtifacts {
    int exit_code = 0;
    nlohmann::json reports;  // array of per-identity reports
};
VerifyArtifacts verify_scenario(const ScenarioConfig& c);

struct SweepArtifacts {
    int exit_code = 0;
    std::string csv;
};
SweepArtifacts sweep_scenarios(const ScenarioConfig& base, const std::string& axis,
                               const std::vector<double>& values);

struct SphereExactArtifacts {
    std::string csv;
    nlohmann::json summary;
};
SphereExactArtifacts sphere_exact_table(const ScenarioConfig& c);

std::string gnuplot_script(const std::string& csv_name, const std::string& prefix);

} // namespace hkflow
