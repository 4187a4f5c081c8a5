#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rotlim/grid.hpp"
#include "rotlim/nsc.hpp"

namespace rotlim {

/// Least-squares convergence-order fit of log(value) against log(eps).
struct OrderFit {
    double slope = 0.0;
    double r2 = 0.0;
    /// max/min of value / eps^slope_target across the sweep.
    double band = 0.0;
    /// set when a zero value short-circuits the fit (slope reported as +inf)
    bool zero_values = false;
};

/// pairs are (eps, value); requires >= 4 pairs with distinct positive eps.
OrderFit fit_order(const std::vector<std::pair<double, double>>& pairs,
                   double slope_target = 0.0);

/// Configuration of a convergence sweep. All members share one seed and one
/// (r0, u0) draw; only rho_{0,eps} = 1 + eps r0 varies with eps.
struct SweepConfig {
    std::vector<double> eps_list;  // strictly decreasing, >= 4 entries
    FlowParams params;             // template; eps is overridden per member
    std::uint64_t seed = 1;
    int n = 64;
    double T = 0.5;
    double dt = 0.0;        // 0: derive from cfl and the initial velocity
    double cfl = 0.2;       // advective CFL number used when dt == 0
    int stride = 1;         // recording stride, must divide round(T/dt)
    double amplitude = 0.25;
    double s_tilde = 3.0;   // sigma is measured in H^{-s_tilde}
    double t_skip = 0.0;    // initial-layer exclusion for the residual metric
    int band = 4;           // spectral band of the random initial data

    void validate() const;
};

/// Per-eps measurements; `ok == false` marks a failed member (vacuum, CFL,
/// runtime guard) whose metrics are left NaN.
struct SweepMember {
    double eps = 0.0;
    bool ok = false;
    std::string error;
    double div_l2t = 0.0;       // || eps^{-beta} div u ||_{L^2_T(L^2)}
    double limit0_resid = 0.0;  // max_t || R(t) ||_{H^{-3}}, t >= t_skip
    double sigma_sup = 0.0;     // sup_t || sigma ||_{H^{-s_tilde}}
    double limit_dist = 0.0;    // sup_t (||u_eps - u|| + ||sigma_eps - sigma||_{H^{-3}}); beta = 1 only
    double runtime_sec = 0.0;
};

struct SweepReport {
    SweepConfig config;
    std::uint64_t config_hash = 0;
    std::uint64_t data_hash = 0;  // hash of the shared (r0, u0) coefficients
    std::vector<SweepMember> members;  // sorted by decreasing eps
    bool complete = false;             // all members ok
    OrderFit div_fit;     // slope_target = beta (band is the ub:div-u check)
    OrderFit resid_fit;   // slope_target = 0
    OrderFit sigma_fit;   // slope_target = 0 (band is the uniformity check)
    OrderFit dist_fit;    // beta = 1 only; zero-initialized otherwise
    bool has_dist_fit = false;
};

/// Runs one nsc simulation per eps plus (for beta = 1) a reference run of
/// the limit system from the matched data, and collects the convergence
/// metrics. Member failures are recorded, not thrown; fits use the ok
/// members only and are skipped when fewer than 4 remain.
SweepReport run_convergence_suite(const SweepConfig& cfg);

/// One row per (eps, metric); header always emitted. Deterministic bytes.
void emit_report_csv(const SweepReport& rep, std::ostream& os);
/// Nested JSON carrying the full config, hashes, members, and fits.
void emit_report_json(const SweepReport& rep, std::ostream& os);
SweepReport parse_report_json(std::istream& is);

/// FNV-1a over the canonical key = value rendering of the config.
std::uint64_t sweep_config_hash(const SweepConfig& cfg);

}  // namespace rotlim
