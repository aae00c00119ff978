#include "hkflow/flow_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hkflow/numeric.hpp"

namespace hkflow {

namespace {

double min_segment(const ProfileSurface& s) {
    double m2 = std::numeric_limits<double>::infinity();
    for (int j = 0; j < s.segments(); ++j) {
        double dr = s.r[j + 1] - s.r[j], dz = s.z[j + 1] - s.z[j];
        m2 = std::min(m2, dr * dr + dz * dz);
    }
    return std::sqrt(m2);
}

} // namespace

FlowEngine::FlowEngine(ProfileSurface initial, StepControl ctl, std::string config_hash)
    : ctl_(std::move(ctl)), config_hash_(std::move(config_hash)) {
    state_.surface = std::move(initial);
    state_.surface.validate();
    rebuild_geometry();
    last_sample_H_max_ = geom_.H_max();
}

void FlowEngine::rebuild_geometry() {
    build_geometry_into(state_.surface, {}, scratch_, geom_);
    integrand_ = surface_H_alpha_integral(geom_, ctl_.alpha);
    H_max_cache_ = geom_.H_max();
}

void FlowEngine::take_record(double dt, bool regular) {
    MonitorRecord rec;
    rec.t = state_.t;
    rec.dt_last = dt;
    rec.step_index = state_.step_index;
    rec.H_min = geom_.H_min();
    rec.H_max = geom_.H_max();
    rec.A2_max = geom_.A2_max();
    rec.lalpha_accum = state_.lalpha_accum;
    rec.eligible = ctl_.H_cap && rec.H_max <= *ctl_.H_cap;
    rec.convex = geom_.convex;
    rec.regular = regular && !resampled_since_record_;
    rec.r = state_.surface.r;
    rec.z = state_.surface.z;
    if (ctl_.record_ledger) {
        QField q = q_field(geom_, *ctl_.record_ledger);
        rec.Q = std::move(q.Q);
        rec.Q_max = q.max;
    }
    records_.push_back(std::move(rec));
    last_sample_H_max_ = geom_.H_max();
    if (regular) resampled_since_record_ = false;
}

bool FlowEngine::advance(const RunControl& rc) {
    if (state_.status != FlowStatus::running) return false;

    const int k = ctl_.k;
    double H_max = H_max_cache_;

    if (H_max >= ctl_.blowup_H_threshold) {
        state_.status = FlowStatus::blown_up;
        abort_reason_ = "curvature threshold";
        return false;
    }

    double h_min = min_segment(state_.surface);
    double dt_raw = ctl_.fixed_dt ? *ctl_.fixed_dt
                                  : ctl_.safety * h_min * h_min / (k * pow_i(H_max, k - 1));
    if (dt_raw < ctl_.dt_min) {
        state_.status = FlowStatus::blown_up;
        abort_reason_ = "step collapse";
        return false;
    }

    // clamp so sample times and t_end are hit exactly (events computed as
    // index * sample_every, so a restored run reproduces the same grid)
    double dt = dt_raw;
    double next_event = std::numeric_limits<double>::infinity();
    if (rc.sample_every > 0.0) next_event = static_cast<double>(sample_idx_) * rc.sample_every;
    if (rc.t_end) next_event = std::min(next_event, *rc.t_end);
    bool clamped = false;
    if (state_.t + dt >= next_event) {
        dt = next_event - state_.t;
        clamped = true;
    }
    if (dt <= 0.0) {
        dt = dt_raw;
        clamped = false;
    }

    try {
        vel_ = flow_displacement(state_.surface, geom_, k);
        if (ctl_.midpoint) {
            half_ = displaced(state_.surface, vel_, 0.5 * dt);
            build_geometry_into(half_, {}, scratch_, geom_half_);
            vel_ = flow_displacement(half_, geom_half_, k);
        }
    } catch (const std::exception& e) {
        state_.status = FlowStatus::aborted;
        abort_reason_ = e.what();
        return false;
    }

    next_ = state_.surface;
    const size_t nn = next_.r.size();
    for (size_t j = 0; j < nn; ++j) {
        next_.r[j] = state_.surface.r[j] + dt * vel_.vr[j];
        next_.z[j] = state_.surface.z[j] + dt * vel_.vz[j];
    }
    next_.r[0] = 0.0;
    next_.r[nn - 1] = 0.0;

    double I_prev = integrand_;
    std::swap(state_.surface, next_);
    state_.t += dt;
    if (clamped) state_.t = next_event;  // land bit-exactly on the event
    state_.dt_last = dt;
    state_.step_index += 1;

    if (ctl_.resample_enabled && spacing_ratio(state_.surface) > ctl_.resample_ratio) {
        state_.surface = resample(state_.surface);
        ++resample_events_;
        resampled_since_record_ = true;
    }

    // embeddedness: convexity certifies a simple profile; otherwise test pairwise
    try {
        rebuild_geometry();
    } catch (const std::exception& e) {
        state_.status = FlowStatus::aborted;
        abort_reason_ = e.what();
        return false;
    }
    if (!geom_.convex && !profile_is_simple(state_.surface)) {
        state_.status = FlowStatus::aborted;
        abort_reason_ = "profile self-intersection";
        return false;
    }

    state_.lalpha_accum += 0.5 * (I_prev + integrand_) * dt;

    // sampling: the regular grid plus curvature-triggered tail records
    bool regular_due =
        rc.sample_every > 0.0 && state_.t >= static_cast<double>(sample_idx_) * rc.sample_every;
    if (regular_due) {
        take_record(dt, true);
        ++sample_idx_;
    } else if (rc.tail_trigger > 1.0 && H_max_cache_ > rc.tail_trigger * last_sample_H_max_) {
        take_record(dt, false);
    }

    if (rc.t_end && state_.t >= *rc.t_end - 1e-15 * std::max(1.0, *rc.t_end)) {
        state_.status = FlowStatus::completed;
        return false;
    }
    return true;
}

RunResult FlowEngine::run(const RunControl& rc) {
    bool on_grid = true;
    if (rc.sample_every > 0.0) {
        sample_idx_ = static_cast<long long>(std::floor(state_.t / rc.sample_every + 1e-9)) + 1;
        on_grid = state_.t == static_cast<double>(sample_idx_ - 1) * rc.sample_every;
    }
    take_record(state_.dt_last, on_grid);  // record at t0

    RunResult out;
    long long steps = 0;
    while (state_.status == FlowStatus::running && steps < rc.max_steps) {
        advance(rc);
        ++steps;
        if (rc.checkpoint_every_steps > 0 && state_.step_index % rc.checkpoint_every_steps == 0 &&
            state_.status == FlowStatus::running)
            out.checkpoints.push_back(checkpoint());
    }
    if (state_.status == FlowStatus::running) {
        state_.status = FlowStatus::aborted;
        abort_reason_ = "max step budget exhausted";
    }

    // final record at the stop time (irregular unless it lands on the grid)
    if (records_.empty() || records_.back().t < state_.t) take_record(state_.dt_last, false);

    out.final_state = state_;
    out.records = records_;
    out.resample_events = resample_events_;
    out.abort_reason = abort_reason_;
    out.blowup = detect_blowup(state_, records_, ctl_, abort_reason_);
    return out;
}

nlohmann::json FlowEngine::checkpoint() const {
    nlohmann::json j;
    j["version"] = 1;
    j["t"] = state_.t;
    j["dt_last"] = state_.dt_last;
    j["step_index"] = state_.step_index;
    auto nodes = nlohmann::json::array();
    for (size_t i = 0; i < state_.surface.r.size(); ++i)
        nodes.push_back({state_.surface.r[i], state_.surface.z[i]});
    j["nodes"] = std::move(nodes);
    j["accumulators"] = {{"lalpha", state_.lalpha_accum},
                         {"alpha", ctl_.alpha},
                         {"sample_trigger_h_max", last_sample_H_max_}};
    j["config_hash"] = config_hash_;
    return j;
}

FlowEngine FlowEngine::restore(const nlohmann::json& rec, StepControl ctl,
                               const std::string& config_hash) {
    if (!rec.contains("version") || rec["version"] != 1)
        throw std::runtime_error("checkpoint version mismatch");
    if (!rec.contains("nodes") || !rec.contains("t") || !rec.contains("accumulators"))
        throw std::runtime_error("malformed checkpoint record");
    if (!config_hash.empty() && rec.value("config_hash", "") != config_hash)
        throw std::runtime_error("checkpoint config mismatch");

    ProfileSurface s;
    for (const auto& nd : rec["nodes"]) {
        s.r.push_back(nd[0].get<double>());
        s.z.push_back(nd[1].get<double>());
    }
    FlowEngine eng(std::move(s), std::move(ctl), rec.value("config_hash", ""));
    eng.state_.t = rec["t"].get<double>();
    eng.state_.dt_last = rec["dt_last"].get<double>();
    eng.state_.step_index = rec["step_index"].get<int>();
    eng.state_.lalpha_accum = rec["accumulators"]["lalpha"].get<double>();
    if (rec["accumulators"].contains("sample_trigger_h_max"))
        eng.last_sample_H_max_ = rec["accumulators"]["sample_trigger_h_max"].get<double>();
    return eng;
}

BlowupReport detect_blowup(const FlowState& final_state, const std::vector<MonitorRecord>& records,
                           const StepControl& ctl, const std::string& stop_reason) {
    BlowupReport r;
    r.steps = final_state.step_index;
    r.enough_records = records.size() >= 10;
    if (!records.empty()) {
        r.H_max_initial = records.front().H_max;
        r.A2_max_initial = records.front().A2_max;
        r.H_max_final = records.back().H_max;
        r.A2_max_final = records.back().A2_max;
        for (const auto& rec : records) {
            r.H_max_peak = std::max(r.H_max_peak, rec.H_max);
            r.A2_max_peak = std::max(r.A2_max_peak, rec.A2_max);
        }
        r.H_growth_factor = r.H_max_peak / r.H_max_initial;
        r.A2_growth_factor = r.A2_max_peak / r.A2_max_initial;
    }
    r.declared = final_state.status == FlowStatus::blown_up;
    if (r.declared) {
        r.reason = stop_reason;
        r.t_declared = final_state.t;
    }
    r.H_unbounded = r.H_max_peak >= ctl.blowup_H_threshold;
    r.A2_unbounded = r.A2_max_peak >= ctl.blowup_A2_threshold;
    r.H_stayed_below_cap = ctl.H_cap && r.H_max_peak <= *ctl.H_cap;
    r.lemma31_violation = r.A2_unbounded && r.H_stayed_below_cap;
    return r;
}

nlohmann::json blowup_report_json(const BlowupReport& r) {
    nlohmann::json j;
    j["declared"] = r.declared;
    j["reason"] = r.reason;
    j["t_declared"] = r.t_declared;
    j["steps"] = r.steps;
    j["H_max_initial"] = r.H_max_initial;
    j["H_max_final"] = r.H_max_final;
    j["H_max_peak"] = r.H_max_peak;
    j["A2_max_initial"] = r.A2_max_initial;
    j["A2_max_final"] = r.A2_max_final;
    j["A2_max_peak"] = r.A2_max_peak;
    j["H_growth_factor"] = r.H_growth_factor;
    j["A2_growth_factor"] = r.A2_growth_factor;
    j["H_unbounded"] = r.H_unbounded;
    j["A2_unbounded"] = r.A2_unbounded;
    j["H_stayed_below_cap"] = r.H_stayed_below_cap;
    j["lemma31_violation"] = r.lemma31_violation;
    j["enough_records"] = r.enough_records;
    return j;
}

} // namespace hkflow
