#pragma once

#include <vector>

#include "rotlim/grid.hpp"

namespace rotlim {

/// Parameters of the limit dynamics: shear viscosity and the Kronecker
/// flag distinguishing the critical bulk scaling (beta = 1) from the
/// supercritical one.
struct LimitParams {
    double mu = 0.05;
    bool beta_is_one = false;

    void validate() const;
};

/// State of the limit system in vorticity form: omega = curl u (with u
/// divergence-free by construction) and the transported density trace.
struct LimitState {
    double time = 0.0;
    SpectralScalar omega;
    SpectralScalar sigma;

    LimitState() = default;
    explicit LimitState(const GridSpec& g) : omega(g), sigma(g) {}
};

/// Biot-Savart reconstruction: theta = inv_laplacian(-omega), u =
/// -perp_grad(theta). div u vanishes with exactly zero coefficients; a
/// nonzero mean of omega is discarded with a warning.
SpectralVec2 velocity_from_vorticity(const SpectralScalar& omega);

/// One explicit RK2 step of the determined limit system with an exact
/// integrating factor for the viscous term; products dealiased.
LimitState dens_full_step(const LimitState& s, double dt, const LimitParams& p);

struct LimitResult {
    std::vector<LimitState> frames;
    double dt = 0.0;
    int stride = 1;
};

/// Integrate to time T with fixed dt, recording every `stride` steps
/// (frame 0 is the initial state).
LimitResult limit_simulate(const LimitState& init, const LimitParams& p, double T, double dt,
                           int stride);

struct ResidualSample {
    double t = 0.0;
    double value = 0.0;
};

/// Residual of the underdetermined limit vorticity equation along a
/// uniformly recorded trajectory: for each interior frame,
/// || centered-diff d/dt(omega - sigma) + u . grad omega - mu Lap omega ||
/// in H^{-s_neg}. The equation is never integrated forward.
std::vector<ResidualSample> limit0_residual(const std::vector<LimitState>& frames, double dt_rec,
                                            const LimitParams& p, double s_neg = 3.0);

/// Matched initial data: omega0 = curl of the Leray projection of u0,
/// sigma0 = r0.
LimitState limit_initial_data(const SpectralScalar& r0, const SpectralVec2& u0);

}  // namespace rotlim
