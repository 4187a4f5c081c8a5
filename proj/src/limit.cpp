#include "rotlim/limit.hpp"

#include <cmath>
#include <iostream>

#include "rotlim/norms.hpp"
#include "rotlim/operators.hpp"
#include "rotlim/parallel.hpp"

namespace rotlim {

void LimitParams::validate() const {
    if (!(mu > 0.0)) throw ConfigError("LimitParams: mu must be positive");
}

SpectralVec2 velocity_from_vorticity(const SpectralScalar& omega) {
    if (std::abs(omega.coeffs[0]) > 0.0)
        std::cerr << "velocity_from_vorticity: nonzero mean vorticity discarded\n";
    const SpectralScalar theta = inv_laplacian(scale(omega, -1.0));
    SpectralVec2 u = perp_grad(theta);
    u.x = scale(u.x, -1.0);
    u.y = scale(u.y, -1.0);
    // The projection is the identity up to the amplitude truncation that
    // makes the divergence multipliers cancel exactly.
    return leray_project(u).div_free;
}

namespace {

struct PhysVelocity {
    std::vector<double> u1, u2;
    double max_speed = 0.0;
};

PhysVelocity phys_velocity(const SpectralScalar& omega) {
    PhysVelocity v;
    const SpectralVec2 u = velocity_from_vorticity(omega);
    v.u1 = transform(u.x);
    v.u2 = transform(u.y);
    double mx = 0.0;
    for (std::size_t i = 0; i < v.u1.size(); ++i)
        mx = std::max(mx, v.u1[i] * v.u1[i] + v.u2[i] * v.u2[i]);
    v.max_speed = std::sqrt(mx);
    return v;
}

/// Dealiased u . grad f with the advecting velocity given pointwise.
SpectralScalar advect(const SpectralScalar& f, const std::vector<double>& u1,
                      const std::vector<double>& u2) {
    const SpectralVec2 gf = grad(f);
    const std::vector<double> f1 = transform(gf.x);
    const std::vector<double> f2 = transform(gf.y);
    std::vector<double> prod(f1.size());
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = u1[i] * f1[i] + u2[i] * f2[i];
    SpectralScalar out = inverse_transform(f.grid, prod);
    dealias_inplace(out);
    out.coeffs[0] = Complex{0.0, 0.0};  // transport against a solenoidal field has zero integral
    return out;
}

struct LimitRhs {
    SpectralScalar domega, dsigma;
};

// Nonstiff part of the curled system: the curl removes grad Pi, and
// curl(sigma u^perp) = div(sigma u) = u . grad sigma for solenoidal u;
// the theta terms carry the Kronecker delta of the critical scaling.
LimitRhs limit_rhs(const LimitState& s, const LimitParams& p, const PhysVelocity& v) {
    const SpectralScalar adv_omega = advect(s.omega, v.u1, v.u2);
    const SpectralScalar adv_sigma = advect(s.sigma, v.u1, v.u2);
    LimitRhs r{scale(adv_omega, -1.0), scale(adv_sigma, -1.0)};
    axpy(r.domega, -1.0, adv_sigma);
    if (p.beta_is_one) {
        const SpectralScalar theta = inv_laplacian(scale(s.omega, -1.0));
        axpy(r.domega, -1.0, theta);
        axpy(r.dsigma, -1.0, theta);
    }
    return r;
}

std::vector<double> viscous_factor(const GridSpec& g, double mu, double dt) {
    std::vector<double> ef(g.size());
    const int n = g.n;
    const double fs = g.freq_scale();
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double k1 = fs * g.signed_index(static_cast<int>(i) / n);
            const double k2 = fs * g.signed_index(static_cast<int>(i) % n);
            ef[i] = std::exp(-mu * (k1 * k1 + k2 * k2) * dt);
        }
    });
    return ef;
}

}  // namespace

LimitState dens_full_step(const LimitState& s, double dt, const LimitParams& p) {
    p.validate();
    if (!(dt > 0.0)) throw ConfigError("dens_full_step: dt must be positive");
    const GridSpec& g = s.omega.grid;
    if (!(s.sigma.grid == g)) throw ConfigError("dens_full_step: grid mismatch");

    const PhysVelocity v = phys_velocity(s.omega);
    if (dt * v.max_speed * g.n / g.length > 0.5 + 1e-12)
        throw ConfigError("dens_full_step: advective CFL violation");

    const std::vector<double> ef = viscous_factor(g, p.mu, dt);
    auto damp = [&](SpectralScalar& f) {
        for (std::size_t i = 0; i < f.coeffs.size(); ++i) f.coeffs[i] *= ef[i];
    };

    const LimitRhs k1 = limit_rhs(s, p, v);

    LimitState pred(g);
    pred.time = s.time + dt;
    pred.omega = s.omega;
    axpy(pred.omega, dt, k1.domega);
    damp(pred.omega);
    pred.sigma = s.sigma;
    axpy(pred.sigma, dt, k1.dsigma);
    const LimitRhs k2 = limit_rhs(pred, p, phys_velocity(pred.omega));

    LimitState next(g);
    next.time = s.time + dt;
    next.omega = s.omega;
    axpy(next.omega, 0.5 * dt, k1.domega);
    damp(next.omega);  // E (omega + dt/2 k1) ...
    axpy(next.omega, 0.5 * dt, k2.domega);
    next.sigma = s.sigma;
    axpy(next.sigma, 0.5 * dt, k1.dsigma);
    axpy(next.sigma, 0.5 * dt, k2.dsigma);
    return next;
}

LimitResult limit_simulate(const LimitState& init, const LimitParams& p, double T, double dt,
                           int stride) {
    p.validate();
    const GridSpec& g = init.omega.grid;
    if (!(init.sigma.grid == g)) throw ConfigError("limit_simulate: grid mismatch");
    if (!(T > 0.0) || !(dt > 0.0) || stride < 1)
        throw ConfigError("limit_simulate: bad T/dt/stride");
    const int nsteps = static_cast<int>(std::llround(T / dt));
    if (nsteps < 1 || std::abs(nsteps * dt - T) > 1e-9 * T)
        throw ConfigError("limit_simulate: T must be an integer multiple of dt");

    LimitState s = init;
    s.omega = dealias(init.omega);
    s.sigma = dealias(init.sigma);

    LimitResult res;
    res.dt = dt;
    res.stride = stride;
    res.frames.push_back(s);
    for (int k = 1; k <= nsteps; ++k) {
        s = dens_full_step(s, dt, p);
        if (k % stride == 0 || k == nsteps) res.frames.push_back(s);
    }
    return res;
}

std::vector<ResidualSample> limit0_residual(const std::vector<LimitState>& frames, double dt_rec,
                                            const LimitParams& p, double s_neg) {
    p.validate();
    if (frames.size() < 3) throw ConfigError("limit0_residual: need at least 3 frames");
    if (!(dt_rec > 0.0)) throw ConfigError("limit0_residual: dt_rec must be positive");
    if (!(s_neg >= 0.0)) throw ConfigError("limit0_residual: s_neg must be nonnegative");
    for (std::size_t j = 0; j + 1 < frames.size(); ++j)
        if (std::abs(frames[j + 1].time - frames[j].time - dt_rec) > 1e-9)
            throw ConfigError("limit0_residual: frame stride mismatch");

    std::vector<ResidualSample> out;
    for (std::size_t j = 1; j + 1 < frames.size(); ++j) {
        const LimitState& s = frames[j];
        const SpectralScalar ddt =
            scale(sub(sub(frames[j + 1].omega, frames[j + 1].sigma),
                      sub(frames[j - 1].omega, frames[j - 1].sigma)),
                  0.5 / dt_rec);
        const PhysVelocity v = phys_velocity(s.omega);
        SpectralScalar R = add(ddt, advect(s.omega, v.u1, v.u2));
        axpy(R, -p.mu, laplacian(s.omega));
        out.push_back({s.time, sobolev_norm(R, -s_neg)});
    }
    return out;
}

LimitState limit_initial_data(const SpectralScalar& r0, const SpectralVec2& u0) {
    if (!(u0.x.grid == r0.grid)) throw ConfigError("limit_initial_data: grid mismatch");
    LimitState s(r0.grid);
    s.omega = curl2d(leray_project(u0).div_free);
    s.sigma = r0;
    return s;
}

}  // namespace rotlim
