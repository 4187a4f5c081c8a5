#include "rotlim/heat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rotlim/norms.hpp"
#include "rotlim/parallel.hpp"
#include "rotlim/sweep.hpp"

namespace rotlim {

double HeatConfig::nu() const { return std::pow(eps, 2.0 * beta); }

void HeatConfig::validate() const {
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("HeatConfig: eps must be in (0, 1]");
    if (!(beta >= 1.0)) throw ConfigError("HeatConfig: beta >= 1 required");
    if (!(delta >= 0.0 && delta < T)) throw ConfigError("HeatConfig: need 0 <= delta < T");
    if (phi0.grid.n == 0) throw ConfigError("HeatConfig: phi0 not set");
    if (!forcing.empty()) {
        if (forcing.size() > 1 && !(dt_g > 0.0))
            throw ConfigError("HeatConfig: dt_g must be positive for sampled forcing");
        for (const auto& f : forcing)
            if (!(f.grid == phi0.grid)) throw ConfigError("HeatConfig: forcing grid mismatch");
    }
}

namespace {

// Interpolation stencil for the piecewise-linear forcing at one time.
struct GWeight {
    int ja = 0, jb = 0;
    double wa = 0.0, wb = 0.0;
};

struct Piece {
    double h = 0.0;
    GWeight a, b;
    int record = -1;  // frame index written after this piece, if any
};

GWeight g_weight(double t, int nf, double dt_g) {
    GWeight w;
    if (nf == 0) return w;
    if (nf == 1) {
        w.ja = w.jb = 0;
        w.wa = 1.0;
        return w;
    }
    const double span = (nf - 1) * dt_g;
    const double u = std::clamp(t, 0.0, span) / dt_g;
    int j = std::min(static_cast<int>(u), nf - 2);
    w.ja = j;
    w.jb = j + 1;
    w.wb = u - j;
    w.wa = 1.0 - w.wb;
    return w;
}

// Exact update over one piece with linear-in-time forcing endpoint values
// ga, gb:  c <- e^{-z} c + ga*I0 + (gb-ga)*I1,  z = lambda*h,
// I0 = h(1-e^{-z})/z,  I1 = h(z-1+e^{-z})/z^2 (series for small z).
Complex advance_piece(Complex c, double lambda, double h, Complex ga, Complex gb) {
    if (h <= 0.0) return c;
    const double z = lambda * h;
    const double E = std::exp(-z);
    double i0, i1;
    if (z < 0.5) {
        double p0 = 0.0, p1 = 0.0, term = 1.0;
        for (int m = 0; m <= 14; ++m) {
            p0 += term / (m + 1.0);
            p1 += term / ((m + 1.0) * (m + 2.0));
            term *= -z / (m + 1.0);
        }
        i0 = h * p0;
        i1 = h * p1;
    } else {
        i0 = h * (1.0 - E) / z;
        i1 = h * (z - 1.0 + E) / (z * z);
    }
    return E * c + ga * i0 + (gb - ga) * i1;
}

}  // namespace

HeatTrajectory heat_propagate(const HeatConfig& cfg, const std::vector<double>& t_grid) {
    cfg.validate();
    const GridSpec& g = cfg.phi0.grid;
    const double tol = 1e-12 * std::max(1.0, cfg.T);
    if (t_grid.empty()) throw ConfigError("heat_propagate: empty time grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < -tol || t_grid[i] > cfg.T + tol)
            throw ConfigError("heat_propagate: record time outside [0, T]");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1] + tol))
            throw ConfigError("heat_propagate: record times must be increasing");
    }

    const int nf = static_cast<int>(cfg.forcing.size());

    // Precompute the shared piece schedule: record intervals split at the
    // forcing nodes so the integrand is linear on every piece.
    std::vector<Piece> pieces;
    double t_cur = 0.0;
    for (std::size_t ri = 0; ri < t_grid.size(); ++ri) {
        const double t_rec = t_grid[ri];
        std::vector<double> cuts;
        if (nf >= 2) {
            const int j_lo = static_cast<int>(std::floor(t_cur / cfg.dt_g)) + 1;
            for (int j = std::max(1, j_lo); j < nf; ++j) {
                const double tn = j * cfg.dt_g;
                if (tn > t_cur + tol && tn < t_rec - tol) cuts.push_back(tn);
            }
        }
        cuts.push_back(t_rec);
        for (double t_next : cuts) {
            Piece p;
            p.h = t_next - t_cur;
            p.a = g_weight(t_cur, nf, cfg.dt_g);
            p.b = g_weight(t_next, nf, cfg.dt_g);
            if (t_next == t_rec) p.record = static_cast<int>(ri);
            pieces.push_back(p);
            t_cur = t_next;
        }
    }

    HeatTrajectory traj;
    traj.times = t_grid;
    traj.frames.assign(t_grid.size(), SpectralScalar(g));

    const double nu = cfg.nu();
    const int n = g.n;
    const double fs = g.freq_scale();
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double k1 = fs * g.signed_index(static_cast<int>(i) / n);
            const double k2 = fs * g.signed_index(static_cast<int>(i) % n);
            const double lambda = (k1 * k1 + k2 * k2) / nu;
            Complex c = cfg.phi0.coeffs[i];
            for (const Piece& p : pieces) {
                Complex ga{0.0, 0.0}, gb{0.0, 0.0};
                if (nf > 0) {
                    ga = p.a.wa * cfg.forcing[p.a.ja].coeffs[i] +
                         p.a.wb * cfg.forcing[p.a.jb].coeffs[i];
                    gb = p.b.wa * cfg.forcing[p.b.ja].coeffs[i] +
                         p.b.wb * cfg.forcing[p.b.jb].coeffs[i];
                }
                c = advance_piece(c, lambda, p.h, ga, gb);
                if (p.record >= 0) traj.frames[static_cast<std::size_t>(p.record)].coeffs[i] = c;
            }
        }
    });
    return traj;
}

std::vector<double> uniform_t_grid(double delta, double T, int intervals) {
    if (!(T > delta) || intervals < 1) throw ConfigError("uniform_t_grid: bad arguments");
    std::vector<double> t(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) t[static_cast<std::size_t>(i)] = delta + (T - delta) * i / intervals;
    t.back() = T;
    return t;
}

namespace {

// Composite Simpson; a 3/8 block absorbs an odd interval count.
double simpson(const std::vector<double>& y, double h) {
    std::size_t nI = y.size() - 1;
    double total = 0.0;
    if (nI % 2 == 1) {
        if (nI < 3) return 0.5 * h * (y[0] + y[1]);
        total += 3.0 * h / 8.0 * (y[nI - 3] + 3.0 * y[nI - 2] + 3.0 * y[nI - 1] + y[nI]);
        nI -= 3;
    }
    for (std::size_t i = 0; i + 2 <= nI; i += 2)
        total += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
    return total;
}

double spectral_weight(double k2norm, double two_s) {
    if (k2norm == 0.0) return two_s == 0.0 ? 1.0 : 0.0;
    return std::pow(k2norm, two_s);
}

}  // namespace

double decay_norm(const HeatTrajectory& traj, double s, double delta, double T) {
    const double tol = 1e-9 * std::max(1.0, T);
    std::size_t lo = 0, hi = traj.times.size();
    while (lo < hi && traj.times[lo] < delta - tol) ++lo;
    while (hi > lo && traj.times[hi - 1] > T + tol) --hi;
    if (hi - lo < 2) throw ConfigError("decay_norm: trajectory does not cover [delta, T]");
    if (std::abs(traj.times[lo] - delta) > tol || std::abs(traj.times[hi - 1] - T) > tol)
        throw ConfigError("decay_norm: trajectory needs nodes exactly at delta and T");
    const std::size_t nI = hi - lo - 1;
    if (nI < 64) throw ConfigError("decay_norm: need at least 64 intervals on [delta, T]");
    const double h = (T - delta) / static_cast<double>(nI);
    for (std::size_t i = lo; i + 1 < hi; ++i)
        if (std::abs(traj.times[i + 1] - traj.times[i] - h) > 1e-8 * std::max(1.0, T))
            throw ConfigError("decay_norm: nonuniform trajectory sampling");

    const GridSpec& g = traj.frames.front().grid;
    const int n = g.n;
    const double fs = g.freq_scale();
    const double measure = g.length * g.length;
    std::vector<double> integrand(hi - lo);
    for (std::size_t f = lo; f < hi; ++f) {
        const SpectralScalar& u = traj.frames[f];
        integrand[f - lo] = measure * block_sum(g.size(), [&](std::size_t i) {
            const double k1 = fs * g.signed_index(static_cast<int>(i) / n);
            const double k2 = fs * g.signed_index(static_cast<int>(i) % n);
            return spectral_weight(k1 * k1 + k2 * k2, 2.0 * s) * std::norm(u.coeffs[i]);
        });
    }
    return std::sqrt(simpson(integrand, h));
}

double forcing_hs_norm(const HeatConfig& cfg, double s) {
    const int nf = static_cast<int>(cfg.forcing.size());
    if (nf == 0) return 0.0;
    if (nf == 1) return sobolev_norm(cfg.forcing[0], s) * std::sqrt(cfg.T);
    double acc = 0.0;
    double last_sq = 0.0;
    for (int j = 0; j < nf; ++j) {
        const double v = sobolev_norm(cfg.forcing[static_cast<std::size_t>(j)], s);
        const double w = (j == 0 || j == nf - 1) ? 0.5 : 1.0;
        acc += w * cfg.dt_g * v * v;
        last_sq = v * v;
    }
    const double span = (nf - 1) * cfg.dt_g;
    if (cfg.T > span) acc += (cfg.T - span) * last_sq;  // forcing held constant past span
    return std::sqrt(acc);
}

ForcingFamily parse_forcing_family(const std::string& name) {
    if (name == "none") return ForcingFamily::none;
    if (name == "single") return ForcingFamily::single;
    if (name == "multi") return ForcingFamily::multi;
    if (name == "estphi") return ForcingFamily::estphi;
    throw ConfigError("unknown forcing family: " + name);
}

namespace {

double urand(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

double urand(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * urand(rng); }

// Smooth zero-mean profile, band-limited and normalized to unit L^2.
SpectralScalar random_profile(const GridSpec& g, int band, std::mt19937_64& rng) {
    SpectralScalar f(g);
    for (int k1 = -band; k1 <= band; ++k1) {
        for (int k2 = -band; k2 <= band; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            const Complex c{urand(rng, -1.0, 1.0), urand(rng, -1.0, 1.0)};
            f.at(k1, k2) += 0.5 * c;
            f.at(-k1, -k2) += 0.5 * std::conj(c);
        }
    }
    const double nrm = l2_norm(f);
    for (auto& c : f.coeffs) c /= nrm;
    return f;
}

SpectralScalar cos_x1(const GridSpec& g) {
    SpectralScalar f(g);
    f.at(1, 0) = Complex{0.5, 0.0};
    f.at(-1, 0) = Complex{0.5, 0.0};
    return f;
}

}  // namespace

void build_forcing(HeatConfig& cfg, const GridSpec& g, ForcingFamily family, double alpha,
                   std::uint64_t seed, int nt) {
    if (nt < 2) throw ConfigError("build_forcing: nt >= 2 required");
    std::mt19937_64 rng(seed);
    cfg.forcing.clear();
    cfg.dt_g = 0.0;
    cfg.phi0 = SpectralScalar(g);

    switch (family) {
        case ForcingFamily::none:
            cfg.phi0 = random_profile(g, 4, rng);
            return;
        case ForcingFamily::single:
            cfg.forcing.assign(2, cos_x1(g));
            cfg.dt_g = cfg.T;
            return;
        case ForcingFamily::multi: {
            constexpr int kModes = 4;
            std::vector<SpectralScalar> profiles;
            std::vector<double> omega, phase;
            for (int m = 0; m < kModes; ++m) {
                profiles.push_back(random_profile(g, 4, rng));
                omega.push_back(urand(rng, 1.0, 5.0));
                phase.push_back(urand(rng, 0.0, 6.283185307179586));
            }
            cfg.dt_g = cfg.T / (nt - 1);
            for (int j = 0; j < nt; ++j) {
                const double t = j * cfg.dt_g;
                SpectralScalar gt(g);
                for (int m = 0; m < kModes; ++m) {
                    const double amp = std::cos(omega[static_cast<std::size_t>(m)] * t +
                                                phase[static_cast<std::size_t>(m)]);
                    for (std::size_t i = 0; i < gt.coeffs.size(); ++i)
                        gt.coeffs[i] += amp * profiles[static_cast<std::size_t>(m)].coeffs[i];
                }
                cfg.forcing.push_back(std::move(gt));
            }
            return;
        }
        case ForcingFamily::estphi: {
            // g = eps^{alpha-2beta} g1 + eps^{-1} g2 + eps^{1-2alpha} g3 + g0
            // on fixed O(1) profiles with slow O(1) time modulation.
            std::vector<SpectralScalar> profiles;
            std::vector<double> omega, phase;
            for (int m = 0; m < 4; ++m) {
                profiles.push_back(random_profile(g, 4, rng));
                omega.push_back(urand(rng, 1.0, 3.0));
                phase.push_back(urand(rng, 0.0, 6.283185307179586));
            }
            const double amps[4] = {std::pow(cfg.eps, alpha - 2.0 * cfg.beta),
                                    std::pow(cfg.eps, -1.0),
                                    std::pow(cfg.eps, 1.0 - 2.0 * alpha), 1.0};
            cfg.dt_g = cfg.T / (nt - 1);
            for (int j = 0; j < nt; ++j) {
                const double t = j * cfg.dt_g;
                SpectralScalar gt(g);
                for (int m = 0; m < 4; ++m) {
                    const double mod = 1.0 + 0.3 * std::cos(omega[static_cast<std::size_t>(m)] * t +
                                                            phase[static_cast<std::size_t>(m)]);
                    const double a = amps[m] * mod;
                    for (std::size_t i = 0; i < gt.coeffs.size(); ++i)
                        gt.coeffs[i] += a * profiles[static_cast<std::size_t>(m)].coeffs[i];
                }
                cfg.forcing.push_back(std::move(gt));
            }
            return;
        }
    }
    throw ConfigError("build_forcing: unknown family");
}

namespace {

void check_eps_list(const std::vector<double>& eps_list) {
    if (eps_list.size() < 4) throw ConfigError("sweep: need at least 4 eps values");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0 && eps_list[i] <= 1.0))
            throw ConfigError("sweep: eps values must lie in (0, 1]");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw ConfigError("sweep: eps values must be strictly decreasing");
    }
}

void finish_report(DecayReport& rep) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& e : rep.entries) pairs.emplace_back(e.eps, e.norm);
    const OrderFit fit = fit_order(pairs);
    rep.slope = fit.slope;

    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    bool all_zero = true;
    for (const auto& e : rep.entries) {
        if (e.ratio > 0.0) all_zero = false;
        rmin = std::min(rmin, e.ratio);
        rmax = std::max(rmax, e.ratio);
    }
    rep.band = all_zero ? 1.0 : rmax / rmin;
    rep.band_ok = rep.band <= 10.0;
    rep.slope_ok = rep.slope >= rep.slope_target - 0.3;
}

}  // namespace

DecayReport rate_sweep(const std::vector<double>& eps_list, const HeatConfig& tmpl,
                       const GridSpec& g, ForcingFamily family, double alpha,
                       std::uint64_t seed) {
    check_eps_list(eps_list);
    DecayReport rep;
    rep.slope_target = tmpl.beta * tmpl.s;
    const std::vector<double> t_grid = uniform_t_grid(tmpl.delta, tmpl.T, 256);

    HeatConfig base = tmpl;
    if (family != ForcingFamily::estphi) build_forcing(base, g, family, alpha, seed);
    for (double eps : eps_list) {
        HeatConfig cfg = base;
        cfg.eps = eps;
        if (family == ForcingFamily::estphi) build_forcing(cfg, g, family, alpha, seed);
        const HeatTrajectory traj = heat_propagate(cfg, t_grid);
        DecayEntry ent;
        ent.eps = eps;
        ent.norm = decay_norm(traj, cfg.s, cfg.delta, cfg.T);
        const double phi0_sq = l2_norm(cfg.phi0) * l2_norm(cfg.phi0);
        const double g_sq = forcing_hs_norm(cfg, cfg.s) * forcing_hs_norm(cfg, cfg.s);
        ent.bound_factor = std::pow(cfg.nu(), cfg.s) * (phi0_sq + g_sq);
        if (ent.bound_factor > 0.0) {
            ent.ratio = ent.norm * ent.norm / ent.bound_factor;
        } else if (ent.norm > 0.0) {
            throw NumericError("rate_sweep: nonzero response to zero data");
        }
        rep.entries.push_back(ent);
    }
    finish_report(rep);
    return rep;
}

DecayReport est_phi_scenario(const std::vector<double>& eps_list, double alpha, double beta,
                             double s0, const GridSpec& g, std::uint64_t seed, double delta,
                             double T) {
    if (!(s0 + 1e-12 >= 2.0 + (1.0 - alpha) / beta))
        throw ConfigError("est_phi_scenario: s0 below the claimed threshold 2 + (1-alpha)/beta");
    check_eps_list(eps_list);

    DecayReport rep;
    rep.slope_target = beta * (s0 - 2.0) + alpha;
    const std::vector<double> t_grid = uniform_t_grid(delta, T, 256);
    for (double eps : eps_list) {
        HeatConfig cfg;
        cfg.eps = eps;
        cfg.beta = beta;
        cfg.s = s0;
        cfg.delta = delta;
        cfg.T = T;
        cfg.phi0 = SpectralScalar(g);
        build_forcing(cfg, g, ForcingFamily::estphi, alpha, seed);
        const HeatTrajectory traj = heat_propagate(cfg, t_grid);
        DecayEntry ent;
        ent.eps = eps;
        // the extra gradient adds |k|^2 under the integral: order s0 + 1/2
        ent.norm = decay_norm(traj, s0 + 0.5, delta, T);
        ent.bound_factor = std::pow(eps, rep.slope_target);
        ent.ratio = ent.norm / ent.bound_factor;
        rep.entries.push_back(ent);
    }
    finish_report(rep);
    return rep;
}

}  // namespace rotlim
