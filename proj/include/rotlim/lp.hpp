#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rotlim/grid.hpp"

namespace rotlim {

/// Radial cutoff pair (chi, phi) for the dyadic decomposition.
/// chi = 1 on [0, r1], 0 on [r2, inf), quintic smoothstep in between;
/// phi(x) = chi(x/2) - chi(x), so that chi(x) + sum_{j>=0} phi(2^-j x)
/// telescopes to 1.
class DyadicPartition {
  public:
    explicit DyadicPartition(double r1 = 1.1, double r2 = 1.9);

    double chi(double r) const;
    double phi(double r) const;
    double r1() const { return r1_; }
    double r2() const { return r2_; }

    /// Largest j with a nonempty block on this grid.
    int max_block_index(const GridSpec& g) const;

    /// Delta_j: j = -1 is chi(D), j >= 0 is phi(2^-j D).
    SpectralScalar dyadic_block(const SpectralScalar& f, int j) const;

    /// S_j = chi(2^-j D), j >= 0; S_{-1} and below are zero.
    SpectralScalar low_freq(const SpectralScalar& f, int j) const;

    /// CSV rows "r,chi,phi" over [0, rmax] with the given sample count.
    void export_profiles(std::ostream& os, double rmax, int samples) const;

  private:
    double r1_;
    double r2_;
};

struct BesovSpec {
    double s = 0.0;
    double p = 2.0;  // use infinity() for L^inf
    double r = 2.0;  // summation exponent
};

double besov_norm(const SpectralScalar& f, const BesovSpec& spec, const DyadicPartition& part);

/// Chemin-Lerner norm: time L^q inside the dyadic l^r sum. The series is
/// uniformly sampled with step dt; q = infinity() takes the sup in time.
double chemin_lerner_norm(const std::vector<SpectralScalar>& series, double dt, double q,
                          const BesovSpec& spec, const DyadicPartition& part);

/// Time-outside counterpart L^q_t(B^s_{p,r}) for the Minkowski comparison.
double time_lq_besov_norm(const std::vector<SpectralScalar>& series, double dt, double q,
                          const BesovSpec& spec, const DyadicPartition& part);

struct BonyParts {
    SpectralScalar Tuv;  // sum_j S_{j-1}u Delta_j v
    SpectralScalar Tvu;
    SpectralScalar R;  // sum_{|j-j'|<=1} Delta_j u Delta_j' v
};

/// Paraproduct decomposition; Tuv + Tvu + R equals the dealiased product uv.
BonyParts bony_decompose(const SpectralScalar& u, const SpectralScalar& v,
                         const DyadicPartition& part);

struct BernsteinRatios {
    double upper = 0.0;  // ||D^kappa f||_Lq / (2^{j(kappa+2(1/p-1/q))} ||f||_Lp)
    double lower = 0.0;  // ||D^kappa f||_Lp / (2^{j kappa} ||f||_Lp), annulus only
};

/// f must be spectrally supported in the ball (ball=true) or the annulus of
/// Delta_j; a relative leak above 1e-12 is a precondition error.
BernsteinRatios bernstein_verify(const SpectralScalar& f, int j, double p, double q, int kappa,
                                 bool ball, const DyadicPartition& part);

struct LpCheck {
    std::string name;
    double value = 0.0;  // measured quantity
    double bound = 0.0;  // value must stay <= bound
    bool ok = false;
};

/// Property battery over the whole module: partition of unity, block
/// reconstruction and telescoping, orthogonality, Bony identity on random
/// pairs, Besov/Sobolev equivalence band, and Bernstein j-uniformity.
std::vector<LpCheck> lp_property_battery(const GridSpec& g, std::uint64_t seed);

}  // namespace rotlim
