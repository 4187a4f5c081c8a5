#pragma once

#include <cstdint>
#include <vector>

#include "rotlim/grid.hpp"
#include "rotlim/mat3.hpp"

namespace rotlim {

/// Parameters of the rescaled rotating compressible system. eps is the
/// Rossby number; the Mach number is eps^alpha and the bulk viscosity
/// eps^{-2 beta}. Pressure law P(rho) = a rho^gamma.
struct FlowParams {
    double eps = 0.25;
    double alpha = 0.0;
    double beta = 1.0;
    double mu = 0.05;
    double gamma = 2.0;
    double a = 1.0;
    bool coriolis_enabled = true;
    bool bulk_enabled = true;

    void validate() const;

    double pressure(double rho) const;
    double dpressure(double rho) const;
    /// H(rho) with H'' = P'/rho and H(1) = H'(1) chosen so H(rho) = a(rho^gamma - rho)/(gamma-1).
    double internal_energy(double rho) const;
    /// E(rho, 1) = H(rho) - H(1) - H'(1)(rho - 1).
    double relative_entropy(double rho) const;
    /// Pi(rho, 1) = P(rho) - P(1) - P'(1)(rho - 1).
    double pi_remainder(double rho) const;
};

/// Unknowns r = rho - 1 and m = rho u (the momentum variable).
struct FlowState {
    double time = 0.0;
    SpectralScalar r;
    SpectralVec2 m;

    FlowState() = default;
    explicit FlowState(const GridSpec& g) : r(g), m(g) {}
};

struct DiagnosticsRecord {
    double t = 0.0;
    double energy = 0.0;       // kinetic + eps^{-2 alpha} internal
    double dissipation = 0.0;  // running integral of mu|grad u|^2 + eps^{-2 beta}|div u|^2
    double div_norm = 0.0;     // ||eps^{-beta} div u||_{L^2}
    double div_time_integral = 0.0;  // running integral of ||eps^{-beta} div u||^2
    double sigma_neg_norm = 0.0;  // ||r/eps||_{H^{-3}}
    double eta = 0.0;             // ||curl m||_{L^2}
    double wave_residual = 0.0;
    double ess_res = 0.0;  // L^gamma mass of the residual density set
    double min_rho = 0.0;
};

/// Stiff per-mode linearization about (rho, u) = (1, 0) acting on
/// (r_k, m1_k, m2_k); k1, k2 are physical wavenumbers.
Mat3c linear_operator(double k1, double k2, const FlowParams& p);

/// Cached exact propagator exp(dt L_k) for every mode of a grid.
class LinearPropagator {
  public:
    LinearPropagator(const GridSpec& g, const FlowParams& p, double dt);
    void apply(SpectralScalar& r, SpectralVec2& m) const;
    double dt() const { return dt_; }

  private:
    GridSpec grid_;
    double dt_;
    std::vector<Mat3c> mats_;
};

/// Explicit (nonstiff) part of the momentum equation:
/// -div(m x u) - eps^{-2 alpha} grad Pi(rho, 1) + mu Lap(u - m),
/// with u = m / rho pointwise and all products dealiased. The mass
/// equation has no nonlinear part (dr = 0).
SpectralVec2 nonlinear_rhs(const FlowState& s, const FlowParams& p);

/// One Lawson-RK2 step using a prebuilt propagator (dt = prop.dt()).
FlowState step(const FlowState& s, const FlowParams& p, const LinearPropagator& prop);
/// Convenience overload building the propagator on the fly.
FlowState step(const FlowState& s, double dt, const FlowParams& p);

struct SimResult {
    std::vector<FlowState> frames;
    std::vector<DiagnosticsRecord> diags;
    double dt = 0.0;
    int stride = 1;
};

/// Integrate to time T with fixed dt, recording every `stride` steps
/// (frame 0 is the initial state). u0 is the physical velocity; the
/// momentum is formed as m0 = (1 + r0) u0.
SimResult simulate(const SpectralScalar& r0, const SpectralVec2& u0, const FlowParams& p,
                   double T, double dt, int stride);

struct InitialData {
    SpectralScalar r0;
    SpectralVec2 u0;
};

/// Random band-limited ill-prepared data: ||r0||_inf = ||u0_i||_inf =
/// amplitude, divergence part of u0 nonzero; deterministic in seed.
InitialData ill_prepared_data(const GridSpec& g, std::uint64_t seed, double amplitude,
                              int band = 4);

/// Max over the interior of the window of || eps d/dt(curl m) + div m
/// - eps curl f ||_{H^{-1}} with centered time differences at spacing
/// dt_rec; f = -eps^{-2 alpha} grad Pi + mu Lap u - div(rho u x u).
double wave_residual(const std::vector<FlowState>& window, const FlowParams& p, double dt_rec);

struct EssResSplit {
    double ess_l2 = 0.0;      // ||[rho - 1]_ess||_{L^2}
    double res_lgamma = 0.0;  // ||[rho]_res||_{L^gamma}^gamma
    double res_measure = 0.0;
};

/// Pointwise split by the essential density window rho in [1/2, 2].
EssResSplit ess_res_split(const std::vector<double>& rho_phys, const GridSpec& g, double gamma);

/// ||sigma||_{H^{-s_tilde}} with sigma = r / eps; requires s_tilde >= 3.
double sigma_diagnostics(const FlowState& s, const FlowParams& p, double s_tilde);

}  // namespace rotlim
