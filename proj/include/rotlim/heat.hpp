#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rotlim/grid.hpp"

namespace rotlim {

/// Heat equation with fast diffusion nu(eps) = eps^{2 beta}:
///   d/dt Phi - (1/nu) Laplacian Phi = g,
/// i.e. per mode  d/dt Phi_k + (|k|^2/nu) Phi_k = g_k.
struct HeatConfig {
    double eps = 0.5;
    double beta = 1.0;
    double s = 2.0;     // derivative order used in decay reports
    double delta = 0.1; // initial-layer cutoff
    double T = 1.0;
    SpectralScalar phi0;
    /// forcing samples at uniform times j * dt_g starting at t = 0;
    /// interpreted as the piecewise-linear interpolant (held constant
    /// beyond the last node). Empty means g = 0.
    std::vector<SpectralScalar> forcing;
    double dt_g = 0.0;

    double nu() const;
    void validate() const;
};

struct HeatTrajectory {
    std::vector<double> times;
    std::vector<SpectralScalar> frames;
};

/// Exact per-mode Duhamel propagation on the requested record times
/// (increasing, within [0, T]); no time-step stability restriction.
HeatTrajectory heat_propagate(const HeatConfig& cfg, const std::vector<double>& t_grid);

/// Uniform record grid with nodes exactly at delta and T.
std::vector<double> uniform_t_grid(double delta, double T, int intervals);

/// || (-Delta)^s Phi ||_{L^2(]delta,T[;L^2)} by composite Simpson
/// quadrature over the recorded frames (which must cover [delta, T]
/// uniformly with at least 64 intervals).
double decay_norm(const HeatTrajectory& traj, double s, double delta, double T);

/// Discrete L^2_T(H^s) norm of the forcing samples (trapezoid in time).
double forcing_hs_norm(const HeatConfig& cfg, double s);

enum class ForcingFamily { none, single, multi, estphi };
ForcingFamily parse_forcing_family(const std::string& name);

/// Fills phi0 / forcing / dt_g of cfg for the named family. `alpha` and
/// cfg.eps, cfg.beta only matter for the estphi family, whose amplitudes
/// are eps^{alpha-2beta}, eps^{-1}, eps^{1-2alpha} and 1 on fixed
/// seed-determined O(1) profiles.
void build_forcing(HeatConfig& cfg, const GridSpec& g, ForcingFamily family, double alpha,
                   std::uint64_t seed, int nt = 129);

struct DecayEntry {
    double eps = 0.0;
    double norm = 0.0;
    double bound_factor = 0.0;
    double ratio = 0.0;
};

struct DecayReport {
    std::vector<DecayEntry> entries;
    double slope = 0.0;
    double slope_target = 0.0;
    double band = 0.0;  // max/min of ratio across the sweep
    bool slope_ok = false;
    bool band_ok = false;
};

/// Decay-rate sweep for the sharp estimate: for each eps measures
/// decay_norm at cfg.s and compares with nu(eps)^s (||phi0||^2 + ||g||^2).
/// Data and forcing are eps-independent (except family estphi, which is
/// rebuilt per eps by construction). eps_list must be decreasing with at
/// least 4 values.
DecayReport rate_sweep(const std::vector<double>& eps_list, const HeatConfig& tmpl,
                       const GridSpec& g, ForcingFamily family, double alpha,
                       std::uint64_t seed);

/// Proof-internal scaling scenario: synthetic four-term forcing, measures
/// || (-Delta)^{s0} grad Phi || against eps^{beta(s0-2)+alpha}.
/// Requires s0 >= 2 + (1-alpha)/beta.
DecayReport est_phi_scenario(const std::vector<double>& eps_list, double alpha, double beta,
                             double s0, const GridSpec& g, std::uint64_t seed,
                             double delta = 0.1, double T = 1.0);

}  // namespace rotlim
