#include "rotlim/nsc.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rotlim/norms.hpp"
#include "rotlim/operators.hpp"
#include "rotlim/parallel.hpp"

namespace rotlim {

void FlowParams::validate() const {
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("FlowParams: eps must be in (0, 1]");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("FlowParams: alpha must be in [0, 1)");
    if (!(beta >= 1.0)) throw ConfigError("FlowParams: beta >= 1 required");
    if (!(mu >= 0.0)) throw ConfigError("FlowParams: mu must be nonnegative");
    if (!(gamma > 1.0)) throw ConfigError("FlowParams: gamma > 1 required");
    if (!(a > 0.0)) throw ConfigError("FlowParams: a > 0 required");
}

double FlowParams::pressure(double rho) const {
    if (rho < 0.0) throw ConfigError("pressure: negative density");
    return a * std::pow(rho, gamma);
}

double FlowParams::dpressure(double rho) const {
    if (rho < 0.0) throw ConfigError("dpressure: negative density");
    return a * gamma * std::pow(rho, gamma - 1.0);
}

double FlowParams::internal_energy(double rho) const {
    if (rho < 0.0) throw ConfigError("internal_energy: negative density");
    return a * (std::pow(rho, gamma) - rho) / (gamma - 1.0);
}

double FlowParams::relative_entropy(double rho) const {
    if (rho < 0.0) throw ConfigError("relative_entropy: negative density");
    return a * (std::pow(rho, gamma) - 1.0 - gamma * (rho - 1.0)) / (gamma - 1.0);
}

double FlowParams::pi_remainder(double rho) const {
    if (rho < 0.0) throw ConfigError("pi_remainder: negative density");
    return a * (std::pow(rho, gamma) - 1.0 - gamma * (rho - 1.0));
}

Mat3c linear_operator(double k1, double k2, const FlowParams& p) {
    const Complex I{0.0, 1.0};
    const double k2norm = k1 * k1 + k2 * k2;
    Mat3c L;
    // mass row: dr = -i k . m
    L(0, 1) = -I * k1;
    L(0, 2) = -I * k2;
    // momentum rows: acoustic + Coriolis + shear + bulk
    const double ac = p.dpressure(1.0) * std::pow(p.eps, -2.0 * p.alpha);
    L(1, 0) = -I * k1 * ac;
    L(2, 0) = -I * k2 * ac;
    if (p.coriolis_enabled) {
        const double inv_eps = 1.0 / p.eps;
        // -eps^{-1} J m with J = [[0,-1],[1,0]]
        L(1, 2) += Complex{inv_eps, 0.0};
        L(2, 1) += Complex{-inv_eps, 0.0};
    }
    L(1, 1) += Complex{-p.mu * k2norm, 0.0};
    L(2, 2) += Complex{-p.mu * k2norm, 0.0};
    if (p.bulk_enabled) {
        const double bv = std::pow(p.eps, -2.0 * p.beta);
        L(1, 1) += Complex{-bv * k1 * k1, 0.0};
        L(1, 2) += Complex{-bv * k1 * k2, 0.0};
        L(2, 1) += Complex{-bv * k2 * k1, 0.0};
        L(2, 2) += Complex{-bv * k2 * k2, 0.0};
    }
    return L;
}

LinearPropagator::LinearPropagator(const GridSpec& g, const FlowParams& p, double dt)
    : grid_(g), dt_(dt) {
    p.validate();
    if (!(dt > 0.0)) throw ConfigError("LinearPropagator: dt must be positive");
    mats_.resize(g.size());
    const int n = g.n;
    const double fs = g.freq_scale();
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double k1 = fs * g.signed_index(static_cast<int>(i) / n);
            const double k2 = fs * g.signed_index(static_cast<int>(i) % n);
            mats_[i] = expm3(linear_operator(k1, k2, p), dt);
        }
    });
}

void LinearPropagator::apply(SpectralScalar& r, SpectralVec2& m) const {
    if (!(r.grid == grid_)) throw ConfigError("LinearPropagator: grid mismatch");
    parallel_for(grid_.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const Vec3c y =
                rotlim::apply(mats_[i], Vec3c{r.coeffs[i], m.x.coeffs[i], m.y.coeffs[i]});
            r.coeffs[i] = y[0];
            m.x.coeffs[i] = y[1];
            m.y.coeffs[i] = y[2];
        }
    });
}

namespace {

struct PhysFields {
    std::vector<double> rho, m1, m2, u1, u2;
    double min_rho = 0.0;
    double max_speed = 0.0;
    SpectralVec2 u_spec;
};

PhysFields phys_fields(const FlowState& s) {
    PhysFields f;
    f.rho = transform(s.r);
    f.m1 = transform(s.m.x);
    f.m2 = transform(s.m.y);
    const std::size_t n2 = f.rho.size();
    f.u1.resize(n2);
    f.u2.resize(n2);
    double mn = 1e300, mx = 0.0;
    for (std::size_t i = 0; i < n2; ++i) {
        f.rho[i] += 1.0;
        mn = std::min(mn, f.rho[i]);
    }
    if (mn <= 0.0) throw NumericError("nsc: vacuum reached (min rho <= 0)");
    for (std::size_t i = 0; i < n2; ++i) {
        f.u1[i] = f.m1[i] / f.rho[i];
        f.u2[i] = f.m2[i] / f.rho[i];
        mx = std::max(mx, f.u1[i] * f.u1[i] + f.u2[i] * f.u2[i]);
    }
    f.min_rho = mn;
    f.max_speed = std::sqrt(mx);
    f.u_spec = SpectralVec2(s.r.grid);
    f.u_spec.x = inverse_transform(s.r.grid, f.u1);
    f.u_spec.y = inverse_transform(s.r.grid, f.u2);
    dealias_inplace(f.u_spec);
    return f;
}

SpectralVec2 nonlinear_rhs_with(const FlowState& s, const FlowParams& p, const PhysFields& f) {
    const GridSpec& g = s.r.grid;
    const std::size_t n2 = f.rho.size();

    auto spectral_of = [&](const std::vector<double>& phys) {
        SpectralScalar out = inverse_transform(g, phys);
        dealias_inplace(out);
        return out;
    };

    // convective tensor m x u
    std::vector<double> prod(n2);
    SpectralVec2 conv(g);
    {
        SpectralVec2 row(g);
        for (std::size_t i = 0; i < n2; ++i) prod[i] = f.m1[i] * f.u1[i];
        row.x = spectral_of(prod);
        for (std::size_t i = 0; i < n2; ++i) prod[i] = f.m1[i] * f.u2[i];
        row.y = spectral_of(prod);
        conv.x = scale(div(row), -1.0);
        for (std::size_t i = 0; i < n2; ++i) prod[i] = f.m2[i] * f.u1[i];
        row.x = spectral_of(prod);
        for (std::size_t i = 0; i < n2; ++i) prod[i] = f.m2[i] * f.u2[i];
        row.y = spectral_of(prod);
        conv.y = scale(div(row), -1.0);
    }

    // pressure remainder
    for (std::size_t i = 0; i < n2; ++i) prod[i] = p.pi_remainder(f.rho[i]);
    SpectralVec2 press = grad(spectral_of(prod));
    const double mach_sq = std::pow(p.eps, -2.0 * p.alpha);

    // viscous correction mu Lap(u - m)
    SpectralVec2 w(g);
    w.x = sub(f.u_spec.x, s.m.x);
    w.y = sub(f.u_spec.y, s.m.y);

    SpectralVec2 dm(g);
    dm.x = add(conv.x, add(scale(press.x, -mach_sq), scale(laplacian(w.x), p.mu)));
    dm.y = add(conv.y, add(scale(press.y, -mach_sq), scale(laplacian(w.y), p.mu)));
    return dm;
}

void check_min_rho(const FlowState& s) {
    const std::vector<double> rho = transform(s.r);
    for (double v : rho)
        if (1.0 + v <= 0.0) throw NumericError("nsc: vacuum reached (min rho <= 0)");
}

}  // namespace

SpectralVec2 nonlinear_rhs(const FlowState& s, const FlowParams& p) {
    return nonlinear_rhs_with(s, p, phys_fields(s));
}

FlowState step(const FlowState& s, const FlowParams& p, const LinearPropagator& prop) {
    const GridSpec& g = s.r.grid;
    const double dt = prop.dt();
    const PhysFields f = phys_fields(s);
    if (dt * f.max_speed * g.n / g.length > 0.5 + 1e-12)
        throw ConfigError("step: advective CFL violation");

    const SpectralVec2 k1 = nonlinear_rhs_with(s, p, f);

    FlowState pred = s;
    axpy(pred.m.x, dt, k1.x);
    axpy(pred.m.y, dt, k1.y);
    prop.apply(pred.r, pred.m);
    pred.time = s.time + dt;
    const SpectralVec2 k2 = nonlinear_rhs(pred, p);

    FlowState next = s;
    prop.apply(next.r, next.m);
    SpectralScalar er(g);  // propagated (0, k1) picks up a mass component
    SpectralVec2 em = k1;
    prop.apply(er, em);
    axpy(next.r, 0.5 * dt, er);
    axpy(next.m.x, 0.5 * dt, em.x);
    axpy(next.m.y, 0.5 * dt, em.y);
    axpy(next.m.x, 0.5 * dt, k2.x);
    axpy(next.m.y, 0.5 * dt, k2.y);
    next.time = s.time + dt;
    check_min_rho(next);
    return next;
}

FlowState step(const FlowState& s, double dt, const FlowParams& p) {
    return step(s, p, LinearPropagator(s.r.grid, p, dt));
}

namespace {

double quad_energy(const PhysFields& f, const FlowParams& p, const GridSpec& g) {
    const double mach_sq = std::pow(p.eps, -2.0 * p.alpha);
    const double cell = g.cell_area();
    return cell * block_sum(f.rho.size(), [&](std::size_t i) {
        const double ke = 0.5 * f.rho[i] * (f.u1[i] * f.u1[i] + f.u2[i] * f.u2[i]);
        return ke + mach_sq * p.relative_entropy(f.rho[i]);
    });
}

/// || eps^{-beta} div u ||^2, the bulk part of the dissipation integrand.
double div_sq_integrand(const PhysFields& f, const FlowParams& p) {
    const double dn = std::pow(p.eps, -p.beta) * l2_norm(div(f.u_spec));
    return dn * dn;
}

double dissipation_integrand(const PhysFields& f, const FlowParams& p) {
    const SpectralVec2 gx = grad(f.u_spec.x);
    const SpectralVec2 gy = grad(f.u_spec.y);
    double val = p.mu * (l2_norm(gx) * l2_norm(gx) + l2_norm(gy) * l2_norm(gy));
    if (p.bulk_enabled) val += div_sq_integrand(f, p);
    return val;
}

DiagnosticsRecord make_diag(const FlowState& s, const PhysFields& f, const FlowParams& p,
                            double dissipation, const GridSpec& g) {
    DiagnosticsRecord d;
    d.t = s.time;
    d.energy = quad_energy(f, p, g);
    d.dissipation = dissipation;
    d.div_norm = std::pow(p.eps, -p.beta) * l2_norm(div(f.u_spec));
    d.sigma_neg_norm = sobolev_norm(s.r, -3.0) / p.eps;
    d.eta = l2_norm(curl2d(s.m));
    d.ess_res = ess_res_split(f.rho, g, p.gamma).res_lgamma;
    d.min_rho = f.min_rho;
    return d;
}

}  // namespace

SimResult simulate(const SpectralScalar& r0, const SpectralVec2& u0, const FlowParams& p,
                   double T, double dt, int stride) {
    p.validate();
    const GridSpec& g = r0.grid;
    if (!(u0.x.grid == g)) throw ConfigError("simulate: grid mismatch");
    if (!(T > 0.0) || !(dt > 0.0) || stride < 1) throw ConfigError("simulate: bad T/dt/stride");
    const int nsteps = static_cast<int>(std::llround(T / dt));
    if (nsteps < 1 || std::abs(nsteps * dt - T) > 1e-9 * T)
        throw ConfigError("simulate: T must be an integer multiple of dt");

    FlowState s(g);
    s.r = dealias(r0);
    // m0 = (1 + r0) u0 formed pointwise
    {
        std::vector<double> rho = transform(s.r);
        const std::vector<double> v1 = transform(u0.x);
        const std::vector<double> v2 = transform(u0.y);
        std::vector<double> w1(rho.size()), w2(rho.size());
        for (std::size_t i = 0; i < rho.size(); ++i) {
            rho[i] += 1.0;
            if (rho[i] <= 0.0) throw NumericError("simulate: vacuum in initial data");
            w1[i] = rho[i] * v1[i];
            w2[i] = rho[i] * v2[i];
        }
        s.m.x = inverse_transform(g, w1);
        s.m.y = inverse_transform(g, w2);
        dealias_inplace(s.m);
    }

    const LinearPropagator prop(g, p, dt);
    SimResult res;
    res.dt = dt;
    res.stride = stride;

    PhysFields f = phys_fields(s);
    double dissipation = 0.0;
    double div_integral = 0.0;
    double prev_integrand = dissipation_integrand(f, p);
    double prev_div_sq = div_sq_integrand(f, p);
    res.frames.push_back(s);
    res.diags.push_back(make_diag(s, f, p, dissipation, g));

    for (int k = 1; k <= nsteps; ++k) {
        s = step(s, p, prop);
        f = phys_fields(s);
        const double cur = dissipation_integrand(f, p);
        dissipation += 0.5 * dt * (prev_integrand + cur);
        prev_integrand = cur;
        const double cur_div_sq = div_sq_integrand(f, p);
        div_integral += 0.5 * dt * (prev_div_sq + cur_div_sq);
        prev_div_sq = cur_div_sq;
        if (k % stride == 0 || k == nsteps) {
            res.frames.push_back(s);
            res.diags.push_back(make_diag(s, f, p, dissipation, g));
            res.diags.back().div_time_integral = div_integral;
        }
    }

    // post-pass: centered-difference wave residual on interior frames
    const double dt_rec = stride * dt;
    for (std::size_t j = 1; j + 1 < res.frames.size(); ++j) {
        const std::vector<FlowState> window{res.frames[j - 1], res.frames[j],
                                            res.frames[j + 1]};
        const double spacing = res.frames[j + 1].time - res.frames[j].time;
        if (std::abs(spacing - dt_rec) > 1e-9) continue;  // ragged tail frame
        res.diags[j].wave_residual = wave_residual(window, p, dt_rec);
    }
    return res;
}

InitialData ill_prepared_data(const GridSpec& g, std::uint64_t seed, double amplitude,
                              int band) {
    if (amplitude < 0.0) throw ConfigError("ill_prepared_data: negative amplitude");
    if (amplitude > 0.5)
        throw ConfigError("ill_prepared_data: amplitude above 0.5 risks vacuum");
    InitialData out{SpectralScalar(g), SpectralVec2(g)};
    if (amplitude == 0.0) return out;

    std::mt19937_64 rng(seed);
    auto u01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1p-53; };
    auto fill = [&](SpectralScalar& f) {
        for (int k1 = -band; k1 <= band; ++k1)
            for (int k2 = -band; k2 <= band; ++k2) {
                if (k1 == 0 && k2 == 0) continue;
                const Complex c{2.0 * u01() - 1.0, 2.0 * u01() - 1.0};
                f.at(k1, k2) += 0.5 * c;
                f.at(-k1, -k2) += 0.5 * std::conj(c);
            }
        const double mx = lp_max(f);
        for (auto& c : f.coeffs) c *= amplitude / mx;
    };
    fill(out.r0);
    fill(out.u0.x);
    fill(out.u0.y);
    if (l2_norm(div(out.u0)) < 1e-12 * amplitude)
        throw NumericError("ill_prepared_data: degenerate divergence-free draw");
    return out;
}

double wave_residual(const std::vector<FlowState>& window, const FlowParams& p, double dt_rec) {
    if (window.size() < 3) throw ConfigError("wave_residual: need at least 3 frames");
    if (!(dt_rec > 0.0)) throw ConfigError("wave_residual: dt_rec must be positive");
    for (std::size_t j = 0; j + 1 < window.size(); ++j)
        if (std::abs(window[j + 1].time - window[j].time - dt_rec) > 1e-9)
            throw ConfigError("wave_residual: frame stride mismatch");

    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < window.size(); ++j) {
        const FlowState& s = window[j];
        SpectralScalar dcurl =
            scale(sub(curl2d(window[j + 1].m), curl2d(window[j - 1].m)), 0.5 / dt_rec);
        // f = nonlinear momentum rhs + mu Lap m (restores mu Lap u and
        // strips the curl-free pieces handled by L_k)
        SpectralVec2 f = nonlinear_rhs(s, p);
        axpy(f.x, p.mu, laplacian(s.m.x));
        axpy(f.y, p.mu, laplacian(s.m.y));
        SpectralScalar R = add(scale(dcurl, p.eps),
                               sub(div(s.m), scale(curl2d(f), p.eps)));
        worst = std::max(worst, sobolev_norm(R, -1.0));
    }
    return worst;
}

EssResSplit ess_res_split(const std::vector<double>& rho_phys, const GridSpec& g, double gamma) {
    if (rho_phys.size() != g.size()) throw ConfigError("ess_res_split: size mismatch");
    const double cell = g.cell_area();
    EssResSplit out;
    double ess_sq = 0.0;
    std::size_t res_count = 0;
    for (double rho : rho_phys) {
        if (rho >= 0.5 && rho <= 2.0) {
            ess_sq += cell * (rho - 1.0) * (rho - 1.0);
        } else {
            out.res_lgamma += cell * std::pow(std::abs(rho), gamma);
            ++res_count;
        }
    }
    out.ess_l2 = std::sqrt(ess_sq);
    out.res_measure = static_cast<double>(res_count) * cell;
    return out;
}

double sigma_diagnostics(const FlowState& s, const FlowParams& p, double s_tilde) {
    if (!(s_tilde >= 3.0)) throw ConfigError("sigma_diagnostics: s_tilde >= 3 required");
    return sobolev_norm(s.r, -s_tilde) / p.eps;
}

}  // namespace rotlim
