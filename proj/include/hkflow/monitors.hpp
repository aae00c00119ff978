#pragma once
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hkflow/constants_ledger.hpp"
#include "hkflow/geometry_build.hpp"

namespace hkflow {

// One sampled row of the tracked scalars, plus the per-node payload the
// time-stencil checks need (Q field and the surface nodes so geometry can be
// rebuilt at analysis time).
struct MonitorRecord {
    double t = 0.0;
    double dt_last = 0.0;
    int step_index = 0;
    double H_min = 0.0, H_max = 0.0, A2_max = 0.0, Q_max = 0.0;
    double lalpha_accum = 0.0;
    bool eligible = false;
    bool convex = false;
    bool regular = true;  // on the fixed sample_every grid (time stencils need this)
    std::vector<double> Q;       // per-node Q
    std::vector<double> r, z;    // surface nodes at sample time

    // filled by analysis
    double slack36_min = std::numeric_limits<double>::quiet_NaN();
    double qbound_slack = std::numeric_limits<double>::quiet_NaN();
};

// Q = |A|^2 / H^{2k} + C0 H^{ell+1} per node; hard error when H <= 0.
struct QField {
    std::vector<double> Q;
    double max = 0.0;
};
QField q_field(const GeometryFields& g, const ConstantsLedger& ledger);

struct MinHVerdict {
    bool pass = false;
    double worst_slack = 0.0;  // min over records of H_min(t) - H_min(0) + tol
    double tol = 0.0;
};
// Corollary-style minimum principle: H_min(t_j) >= H_min(t_0) - tol for all j,
// tol = 1e-4 * H_min(t_0). Returns fail rather than throwing.
MinHVerdict check_min_H(const std::vector<MonitorRecord>& records);

// Signed per-node slack of the differential inequality
//   (d_t - k H^{k-1} Delta) Q <= (2k^2/(k-1)) <grad H^{k-1}, grad Q>
//                                - C1 H^{2k-2} Q + C2 H^{k-3}
// evaluated with d_t Q by finite differences across three equispaced Q fields.
// slack = RHS - LHS; the inequality holds where slack >= -tol.
struct Ineq36Tol {
    double rhs_rel = 1e-3;  // floor: 1e-3 * |RHS| per node
    double c_h = 0.0;       // calibrated h^2 coefficient
    double c_t = 0.0;       // calibrated dt coefficient
};
struct Ineq36Result {
    std::vector<double> slack;      // per node
    double min_slack = 0.0;
    bool pass = true;               // all slack_j >= -tol_j
    double worst_margin = 0.0;      // min over nodes of slack_j + tol_j
};
Ineq36Result check_ineq_36(const GeometryFields& g_mid,
                           const std::vector<double>& Q_prev,
                           const std::vector<double>& Q_mid,
                           const std::vector<double>& Q_next,
                           double dt_records, const ConstantsLedger& ledger,
                           const Ineq36Tol& tol = {});

// dQ/dt stencil selector used on the boundary records.
enum class TimeStencil { central, forward, backward };
Ineq36Result check_ineq_36_stencil(const GeometryFields& g_at,
                                   const std::vector<double>& Q0,
                                   const std::vector<double>& Q1,
                                   const std::vector<double>& Q2,
                                   double dt_records, TimeStencil stencil,
                                   const ConstantsLedger& ledger, const Ineq36Tol& tol = {});

// Maximum-principle ODE bound: on eligible records,
//   Qmax(t) <= C4/C3 + (Qmax(0) - C4/C3) e^{-C3 t} + tol.
// C5 := max(C4/C3, Qmax(0)); C6 := sqrt(C5 * H_cap^{2k}).
struct QBoundVerdict {
    enum class Status { pass, fail, inconclusive } status = Status::inconclusive;
    double C5 = 0.0, C6 = 0.0;
    double worst_violation = 0.0;  // max over eligible records of Qmax - bound
    int eligible_records = 0;
};
QBoundVerdict q_ode_bound(const std::vector<MonitorRecord>& records, const ConstantsLedger& ledger,
                          double tol = 0.0);
double q_bound_curve(const ConstantsLedger& ledger, double Q0, double t);

// One trapezoid-in-time update of the space-time accumulator
// int int H^alpha dmu dt; integrand(t) = int_M H^alpha dmu from the grid.
double surface_H_alpha_integral(const GeometryFields& g, double alpha);

struct LAlphaAssessment {
    double accum = 0.0;
    double norm = 0.0;
    bool divergent = false;
    double tail_ratio = 0.0;   // growth ratio of per-decade increments
    double log_slope = 0.0;    // fitted accum-vs-decade slope near blow-up
    int decades_used = 0;
};
// Tail analysis of the accumulator near a declared blow-up time: samples the
// record stream at t_m = T (1 - 10^-m) and flags divergence when the
// per-decade increments stop decaying (log-type growth).
LAlphaAssessment assess_lalpha(const std::vector<MonitorRecord>& records, double alpha,
                               double T_declared, bool blew_up);

// Fills slack36/qbound columns on the records and returns the CSV text
// (columns: t,dt,H_min,H_max,A2_max,Q_max,lalpha_accum,slack_36_min,
//  qbound_slack,eligible,convex).
struct MonitorAnalysis {
    MinHVerdict min_h;
    QBoundVerdict q_bound;
    LAlphaAssessment l_alpha;
    double ineq36_min_slack = std::numeric_limits<double>::quiet_NaN();
    bool ineq36_pass = true;
    std::string csv;
};
MonitorAnalysis analyze_records(std::vector<MonitorRecord>& records, const ConstantsLedger& ledger,
                                double alpha, double T_declared, bool blew_up,
                                const Ineq36Tol& tol36 = {}, double qbound_tol = 0.0);

} // namespace hkflow
