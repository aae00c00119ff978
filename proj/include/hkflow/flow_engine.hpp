#pragma once
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hkflow/geometry_build.hpp"
#include "hkflow/monitors.hpp"
#include "hkflow/profile.hpp"

namespace hkflow {

enum class FlowStatus { running, blown_up, completed, aborted };

struct FlowState {
    double t = 0.0;
    ProfileSurface surface;
    int step_index = 0;
    double dt_last = 0.0;
    double lalpha_accum = 0.0;
    FlowStatus status = FlowStatus::running;
};

struct StepControl {
    int k = 3;
    double alpha = 6.0;
    double safety = 0.2;            // in (0,1]
    double dt_min = 1e-15;
    std::optional<double> H_cap;    // marks records eligible; never stops the run
    std::optional<double> fixed_dt; // test hook: bypass the adaptive rule
    bool midpoint = false;          // two-stage midpoint instead of explicit Euler
    double resample_ratio = 2.0;    // invoke resample above this spacing ratio
    bool resample_enabled = true;
    double blowup_H_threshold = 1e6;
    double blowup_A2_threshold = 1e12;
    std::optional<ConstantsLedger> record_ledger;  // fills Q on monitor records
};

struct RunControl {
    std::optional<double> t_end;    // stop at this time
    bool run_to_blowup = false;
    double sample_every = 1e-3;
    double tail_trigger = 1.1;      // extra sample when H_max grows by this factor
    long long max_steps = 200'000'000;
    long long checkpoint_every_steps = 0;  // harvest periodic checkpoints (0 = off)
};

struct BlowupReport {
    bool declared = false;
    std::string reason;             // "curvature threshold" | "step collapse"
    double t_declared = 0.0;
    long long steps = 0;
    double H_max_initial = 0.0, H_max_final = 0.0, H_max_peak = 0.0;
    double A2_max_initial = 0.0, A2_max_final = 0.0, A2_max_peak = 0.0;
    double H_growth_factor = 0.0, A2_growth_factor = 0.0;
    bool H_unbounded = false;       // exceeded blowup_H_threshold
    bool A2_unbounded = false;      // exceeded blowup_A2_threshold
    bool H_stayed_below_cap = false;
    bool lemma31_violation = false; // |A|^2 flagged unbounded while H <= H_cap
    bool enough_records = false;    // the assessment needs >= 10 records
};

struct RunResult {
    FlowState final_state;
    std::vector<MonitorRecord> records;
    BlowupReport blowup;
    int resample_events = 0;
    std::string abort_reason;
    std::vector<nlohmann::json> checkpoints;  // periodic, when requested
};

// Advances a ProfileSurface under dF/dt = -H^k nu with the adaptive explicit
// step dt = safety * h_min^2 / (k * H_max^{k-1}), clamped to land exactly on
// sample times; accumulates int int H^alpha dmu dt by the trapezoid rule in
// time. Deterministic: identical inputs give bit-identical trajectories.
class FlowEngine {
  public:
    FlowEngine(ProfileSurface initial, StepControl ctl, std::string config_hash = "");

    // One accepted step. Returns false once status != running.
    bool advance(const RunControl& rc);

    RunResult run(const RunControl& rc);

    const FlowState& state() const { return state_; }
    const GeometryFields& geometry() const { return geom_; }
    int resample_events() const { return resample_events_; }

    nlohmann::json checkpoint() const;
    static FlowEngine restore(const nlohmann::json& record, StepControl ctl,
                              const std::string& config_hash = "");

  private:
    void rebuild_geometry();
    void take_record(double dt, bool regular);

    FlowState state_;
    StepControl ctl_;
    std::string config_hash_;
    GeometryFields geom_;
    GeometryScratch scratch_;
    FlowVelocity vel_;
    ProfileSurface half_, next_;
    GeometryFields geom_half_;
    double integrand_ = 0.0;  // int_M H^alpha dmu at the current state
    double H_max_cache_ = 0.0;
    std::vector<MonitorRecord> records_;
    double last_sample_H_max_ = 0.0;
    long long sample_idx_ = 1;  // next regular sample index on the t-grid
    int resample_events_ = 0;
    bool resampled_since_record_ = false;
    std::string abort_reason_;
};

// Operational blow-up assessment over the recorded history (needs >= 10
// records). The Lemma 3.1 alarm fires only if |A|^2 was flagged unbounded
// while H stayed at or below the configured cap for the whole run; this must
// never happen and signals an implementation fault.
BlowupReport detect_blowup(const FlowState& final_state, const std::vector<MonitorRecord>& records,
                           const StepControl& ctl, const std::string& stop_reason);

nlohmann::json blowup_report_json(const BlowupReport& r);

} // namespace hkflow
