#include "rotlim/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "rotlim/limit.hpp"
#include "rotlim/norms.hpp"
#include "rotlim/operators.hpp"

namespace rotlim {

OrderFit fit_order(const std::vector<std::pair<double, double>>& pairs, double slope_target) {
    if (pairs.size() < 4) throw ConfigError("fit_order: need at least 4 (eps, value) pairs");
    for (const auto& [e, v] : pairs) {
        if (!(e > 0.0)) throw ConfigError("fit_order: eps must be positive");
        if (v < 0.0) throw ConfigError("fit_order: values must be nonnegative");
    }

    OrderFit fit;
    double rmin = std::numeric_limits<double>::infinity();
    double rmax = 0.0;
    for (const auto& [e, v] : pairs) {
        const double r = v / std::pow(e, slope_target);
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    fit.band = rmin > 0.0 ? rmax / rmin : (rmax == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());

    for (const auto& [e, v] : pairs) {
        if (v == 0.0) {
            fit.zero_values = true;
            fit.slope = std::numeric_limits<double>::infinity();
            fit.r2 = 1.0;
            return fit;
        }
    }

    const std::size_t m = pairs.size();
    double sx = 0.0, sy = 0.0;
    std::vector<double> xs(m), ys(m);
    for (std::size_t i = 0; i < m; ++i) {
        xs[i] = std::log(pairs[i].first);
        ys[i] = std::log(pairs[i].second);
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx < 1e-20) throw ConfigError("fit_order: degenerate abscissa (eps values not distinct)");
    fit.slope = sxy / sxx;
    const double ss_res = syy - sxy * sxy / sxx;
    fit.r2 = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
    return fit;
}

void SweepConfig::validate() const {
    if (eps_list.size() < 4) throw ConfigError("sweep: need at least 4 eps values");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0 && eps_list[i] <= 1.0))
            throw ConfigError("sweep: eps values must lie in (0, 1]");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw ConfigError("sweep: eps values must be strictly decreasing");
    }
    if (n < 8 || n > 128) throw ConfigError("sweep: n must lie in [8, 128]");
    if (!(T > 0.0 && T <= 2.0)) throw ConfigError("sweep: T must lie in (0, 2]");
    if (dt < 0.0) throw ConfigError("sweep: dt must be nonnegative");
    if (!(cfl > 0.0 && cfl <= 0.5)) throw ConfigError("sweep: cfl must lie in (0, 0.5]");
    if (stride < 1) throw ConfigError("sweep: stride must be positive");
    if (amplitude < 0.0) throw ConfigError("sweep: amplitude must be nonnegative");
    if (!(s_tilde >= 3.0)) throw ConfigError("sweep: s_tilde must be >= 3");
    if (!(t_skip >= 0.0 && t_skip < T)) throw ConfigError("sweep: t_skip must lie in [0, T)");
    if (band < 1) throw ConfigError("sweep: band must be positive");
    FlowParams p = params;
    p.eps = eps_list.front();
    p.validate();
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string canonical_config(const SweepConfig& c) {
    std::string s = "eps_list =";
    for (double e : c.eps_list) s += " " + num(e);
    s += "\n";
    s += "alpha = " + num(c.params.alpha) + "\n";
    s += "beta = " + num(c.params.beta) + "\n";
    s += "mu = " + num(c.params.mu) + "\n";
    s += "gamma = " + num(c.params.gamma) + "\n";
    s += "a = " + num(c.params.a) + "\n";
    s += "seed = " + std::to_string(c.seed) + "\n";
    s += "n = " + std::to_string(c.n) + "\n";
    s += "T = " + num(c.T) + "\n";
    s += "dt = " + num(c.dt) + "\n";
    s += "cfl = " + num(c.cfl) + "\n";
    s += "stride = " + std::to_string(c.stride) + "\n";
    s += "amp = " + num(c.amplitude) + "\n";
    s += "s_tilde = " + num(c.s_tilde) + "\n";
    s += "t_skip = " + num(c.t_skip) + "\n";
    s += "band = " + std::to_string(c.band) + "\n";
    return s;
}

std::uint64_t hash_fields(const InitialData& d) {
    std::uint64_t h = kFnvOffset;
    for (const SpectralScalar* f : {&d.r0, &d.u0.x, &d.u0.y})
        fnv_bytes(h, f->coeffs.data(), f->coeffs.size() * sizeof(Complex));
    return h;
}

/// Pointwise u = m / rho; throws on nonpositive density.
SpectralVec2 velocity_of(const FlowState& s) {
    const GridSpec& g = s.r.grid;
    const std::vector<double> rp = transform(s.r);
    const std::vector<double> mx = transform(s.m.x);
    const std::vector<double> my = transform(s.m.y);
    std::vector<double> ux(rp.size()), uy(rp.size());
    for (std::size_t i = 0; i < rp.size(); ++i) {
        const double rho = 1.0 + rp[i];
        if (!(rho > 0.0)) throw NumericError("velocity_of: nonpositive density");
        ux[i] = mx[i] / rho;
        uy[i] = my[i] / rho;
    }
    SpectralVec2 u(g);
    u.x = inverse_transform(g, ux);
    u.y = inverse_transform(g, uy);
    return u;
}

double max_speed_of(const SpectralVec2& u) {
    const std::vector<double> ux = transform(u.x);
    const std::vector<double> uy = transform(u.y);
    double mx = 0.0;
    for (std::size_t i = 0; i < ux.size(); ++i)
        mx = std::max(mx, ux[i] * ux[i] + uy[i] * uy[i]);
    return std::sqrt(mx);
}

struct MemberMetrics {
    double div_l2t, limit0_resid, sigma_sup, limit_dist;
};

MemberMetrics measure_member(const SimResult& res, const FlowParams& p, const SweepConfig& cfg,
                             const std::vector<LimitState>* ref) {
    MemberMetrics m{0.0, 0.0, 0.0, std::numeric_limits<double>::quiet_NaN()};

    // (a) time-L^2 of || eps^{-beta} div u ||, accumulated at step
    // resolution inside simulate (the acoustic layer lives at time scale
    // eps^{2 beta}, far below the recording stride)
    m.div_l2t = std::sqrt(res.diags.back().div_time_integral);

    // (b) residual of the limit vorticity equation along the rescaled
    // trajectory (omega = curl u, sigma = r / eps)
    std::vector<LimitState> view;
    view.reserve(res.frames.size());
    for (const FlowState& f : res.frames) {
        LimitState ls(f.r.grid);
        ls.time = f.time;
        ls.omega = curl2d(velocity_of(f));
        ls.sigma = scale(f.r, 1.0 / p.eps);
        view.push_back(std::move(ls));
    }
    LimitParams lp;
    lp.mu = p.mu;
    lp.beta_is_one = p.beta == 1.0;
    for (const ResidualSample& r : limit0_residual(view, res.dt * res.stride, lp, 3.0))
        if (r.t >= cfg.t_skip) m.limit0_resid = std::max(m.limit0_resid, r.value);

    // (c) sup_t of the negative-Sobolev sigma norm
    for (const FlowState& f : res.frames)
        m.sigma_sup = std::max(m.sigma_sup, sigma_diagnostics(f, p, cfg.s_tilde));

    // (d) beta = 1: distance to the limit-system reference trajectory
    if (ref) {
        if (ref->size() != view.size())
            throw NumericError("sweep: reference trajectory frame mismatch");
        double worst = 0.0;
        for (std::size_t j = 0; j < view.size(); ++j) {
            // the acoustic initial layer is ill-prepared by construction;
            // compare only past the configured exclusion window
            if (view[j].time < cfg.t_skip) continue;
            const SpectralVec2 ue = velocity_of(res.frames[j]);
            const SpectralVec2 ul = velocity_from_vorticity((*ref)[j].omega);
            SpectralVec2 diff(ue.grid());
            diff.x = sub(ue.x, ul.x);
            diff.y = sub(ue.y, ul.y);
            const double du = l2_norm(diff);
            const double ds = sobolev_norm(sub(view[j].sigma, (*ref)[j].sigma), -3.0);
            worst = std::max(worst, du + ds);
        }
        m.limit_dist = worst;
    }
    return m;
}

std::vector<std::pair<double, double>> pick(const std::vector<SweepMember>& ms,
                                            double SweepMember::* field) {
    std::vector<std::pair<double, double>> out;
    for (const SweepMember& m : ms)
        if (m.ok) out.emplace_back(m.eps, m.*field);
    return out;
}

}  // namespace

std::uint64_t sweep_config_hash(const SweepConfig& cfg) {
    const std::string s = canonical_config(cfg);
    std::uint64_t h = kFnvOffset;
    fnv_bytes(h, s.data(), s.size());
    return h;
}

SweepReport run_convergence_suite(const SweepConfig& cfg) {
    cfg.validate();
    SweepReport rep;
    rep.config = cfg;
    rep.config_hash = sweep_config_hash(cfg);

    const GridSpec g(cfg.n);
    const InitialData init = ill_prepared_data(g, cfg.seed, cfg.amplitude, cfg.band);
    rep.data_hash = hash_fields(init);

    // dt rule: a fixed advective CFL against the shared initial velocity,
    // rounded so that T is an integer number of recorded intervals.
    double dt = cfg.dt;
    long nsteps;
    if (dt > 0.0) {
        nsteps = std::llround(cfg.T / dt);
        if (nsteps < 1 || std::abs(nsteps * dt - cfg.T) > 1e-9 * cfg.T)
            throw ConfigError("sweep: T must be an integer multiple of dt");
        if (nsteps % cfg.stride != 0) throw ConfigError("sweep: stride must divide T/dt");
    } else {
        const double umax = std::max(max_speed_of(init.u0), 1e-6);
        const double dt_raw = cfg.cfl * g.length / (g.n * umax);
        nsteps = std::max<long>(1, static_cast<long>(std::ceil(cfg.T / dt_raw)));
        nsteps = ((nsteps + cfg.stride - 1) / cfg.stride) * cfg.stride;
        // the residual metric differences recorded frames; keep enough of them
        nsteps = std::max<long>(nsteps, 8L * cfg.stride);
        dt = cfg.T / static_cast<double>(nsteps);
    }

    // Reference limit trajectory from the matched data (critical scaling only).
    const bool critical = cfg.params.beta == 1.0;
    std::vector<LimitState> ref;
    if (critical) {
        LimitParams lp;
        lp.mu = cfg.params.mu;
        lp.beta_is_one = true;
        ref = limit_simulate(limit_initial_data(init.r0, init.u0), lp, cfg.T, dt, cfg.stride)
                  .frames;
    }

    std::vector<double> runtimes;
    for (double eps : cfg.eps_list) {
        SweepMember mem;
        mem.eps = eps;
        FlowParams p = cfg.params;
        p.eps = eps;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            p.validate();
            const SimResult res =
                simulate(scale(init.r0, eps), init.u0, p, cfg.T, dt, cfg.stride);
            const MemberMetrics mm = measure_member(res, p, cfg, critical ? &ref : nullptr);
            mem.div_l2t = mm.div_l2t;
            mem.limit0_resid = mm.limit0_resid;
            mem.sigma_sup = mm.sigma_sup;
            mem.limit_dist = mm.limit_dist;
            mem.ok = true;
        } catch (const std::exception& e) {
            mem.error = e.what();
            const double nan = std::numeric_limits<double>::quiet_NaN();
            mem.div_l2t = mem.limit0_resid = mem.sigma_sup = mem.limit_dist = nan;
        }
        mem.runtime_sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        // Resource guard: a member an order of magnitude slower than the
        // median of its completed peers is dropped, not the whole sweep.
        if (mem.ok && runtimes.size() >= 2) {
            std::vector<double> sorted = runtimes;
            std::sort(sorted.begin(), sorted.end());
            const double median = sorted[sorted.size() / 2];
            if (mem.runtime_sec > 10.0 * median && mem.runtime_sec > 1.0) {
                mem.ok = false;
                mem.error = "runtime guard: member exceeded 10x the median runtime";
            }
        }
        if (mem.ok) runtimes.push_back(mem.runtime_sec);
        rep.members.push_back(std::move(mem));
    }

    std::stable_sort(rep.members.begin(), rep.members.end(),
                     [](const SweepMember& a, const SweepMember& b) { return a.eps > b.eps; });
    rep.complete = std::all_of(rep.members.begin(), rep.members.end(),
                               [](const SweepMember& m) { return m.ok; });

    const std::size_t n_ok =
        static_cast<std::size_t>(std::count_if(rep.members.begin(), rep.members.end(),
                                               [](const SweepMember& m) { return m.ok; }));
    if (n_ok >= 4) {
        // div_l2t already carries the eps^{-beta} rescaling; the band checks
        // its uniformity in eps directly
        rep.div_fit = fit_order(pick(rep.members, &SweepMember::div_l2t));
        rep.resid_fit = fit_order(pick(rep.members, &SweepMember::limit0_resid));
        rep.sigma_fit = fit_order(pick(rep.members, &SweepMember::sigma_sup));
        if (critical) {
            rep.dist_fit = fit_order(pick(rep.members, &SweepMember::limit_dist));
            rep.has_dist_fit = true;
        }
    }
    return rep;
}

namespace {

using ojson = nlohmann::ordered_json;

// JSON has no literals for NaN/inf; encode them as null explicitly so the
// report round-trips.
ojson jnum(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

double dnum(const ojson& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

ojson fit_to_json(const OrderFit& f) {
    ojson j;
    j["slope"] = jnum(f.slope);
    j["r2"] = jnum(f.r2);
    j["band"] = jnum(f.band);
    j["zero_values"] = f.zero_values;
    return j;
}

OrderFit fit_from_json(const ojson& j) {
    OrderFit f;
    f.slope = dnum(j.at("slope"));
    f.r2 = dnum(j.at("r2"));
    f.band = dnum(j.at("band"));
    f.zero_values = j.at("zero_values").get<bool>();
    if (f.zero_values && std::isnan(f.slope)) f.slope = std::numeric_limits<double>::infinity();
    return f;
}

char hexdig(std::uint64_t v) { return "0123456789abcdef"[v & 0xf]; }

std::string hex64(std::uint64_t h) {
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = hexdig(h);
    return s;
}

std::uint64_t parse_hex64(const std::string& s) {
    return std::stoull(s, nullptr, 16);
}

}  // namespace

void emit_report_csv(const SweepReport& rep, std::ostream& os) {
    os << "# config_hash = " << hex64(rep.config_hash) << "\n";
    os << "# data_hash = " << hex64(rep.data_hash) << "\n";
    os << "# seed = " << rep.config.seed << "\n";
    os << "eps,metric,value,ok\n";
    for (const SweepMember& m : rep.members) {
        // runtime_sec is kept in memory for the resource guard but never
        // emitted: reports must be byte-deterministic in the config
        const std::pair<const char*, double> rows[] = {{"div_l2t", m.div_l2t},
                                                       {"limit0_resid", m.limit0_resid},
                                                       {"sigma_sup", m.sigma_sup},
                                                       {"limit_dist", m.limit_dist}};
        for (const auto& [name, value] : rows)
            os << num(m.eps) << ',' << name << ',' << num(value) << ',' << (m.ok ? 1 : 0)
               << "\n";
    }
}

void emit_report_json(const SweepReport& rep, std::ostream& os) {
    ojson j;
    const SweepConfig& c = rep.config;
    ojson jc;
    jc["eps_list"] = c.eps_list;
    jc["alpha"] = c.params.alpha;
    jc["beta"] = c.params.beta;
    jc["mu"] = c.params.mu;
    jc["gamma"] = c.params.gamma;
    jc["a"] = c.params.a;
    jc["seed"] = c.seed;
    jc["n"] = c.n;
    jc["T"] = c.T;
    jc["dt"] = c.dt;
    jc["cfl"] = c.cfl;
    jc["stride"] = c.stride;
    jc["amp"] = c.amplitude;
    jc["s_tilde"] = c.s_tilde;
    jc["t_skip"] = c.t_skip;
    jc["band"] = c.band;
    j["config"] = jc;
    j["config_hash"] = hex64(rep.config_hash);
    j["data_hash"] = hex64(rep.data_hash);
    j["complete"] = rep.complete;
    ojson members = ojson::array();
    for (const SweepMember& m : rep.members) {
        ojson jm;
        jm["eps"] = m.eps;
        jm["ok"] = m.ok;
        jm["error"] = m.error;
        jm["div_l2t"] = jnum(m.div_l2t);
        jm["limit0_resid"] = jnum(m.limit0_resid);
        jm["sigma_sup"] = jnum(m.sigma_sup);
        jm["limit_dist"] = jnum(m.limit_dist);
        members.push_back(std::move(jm));
    }
    j["members"] = std::move(members);
    j["div_fit"] = fit_to_json(rep.div_fit);
    j["resid_fit"] = fit_to_json(rep.resid_fit);
    j["sigma_fit"] = fit_to_json(rep.sigma_fit);
    j["dist_fit"] = fit_to_json(rep.dist_fit);
    j["has_dist_fit"] = rep.has_dist_fit;
    os << j.dump(2) << "\n";
}

SweepReport parse_report_json(std::istream& is) {
    ojson j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("report parse: ") + e.what());
    }
    SweepReport rep;
    try {
        const ojson& jc = j.at("config");
        SweepConfig& c = rep.config;
        c.eps_list = jc.at("eps_list").get<std::vector<double>>();
        c.params.alpha = jc.at("alpha").get<double>();
        c.params.beta = jc.at("beta").get<double>();
        c.params.mu = jc.at("mu").get<double>();
        c.params.gamma = jc.at("gamma").get<double>();
        c.params.a = jc.at("a").get<double>();
        c.seed = jc.at("seed").get<std::uint64_t>();
        c.n = jc.at("n").get<int>();
        c.T = jc.at("T").get<double>();
        c.dt = jc.at("dt").get<double>();
        c.cfl = jc.at("cfl").get<double>();
        c.stride = jc.at("stride").get<int>();
        c.amplitude = jc.at("amp").get<double>();
        c.s_tilde = jc.at("s_tilde").get<double>();
        c.t_skip = jc.at("t_skip").get<double>();
        c.band = jc.at("band").get<int>();
        rep.config_hash = parse_hex64(j.at("config_hash").get<std::string>());
        rep.data_hash = parse_hex64(j.at("data_hash").get<std::string>());
        rep.complete = j.at("complete").get<bool>();
        for (const ojson& jm : j.at("members")) {
            SweepMember m;
            m.eps = jm.at("eps").get<double>();
            m.ok = jm.at("ok").get<bool>();
            m.error = jm.at("error").get<std::string>();
            m.div_l2t = dnum(jm.at("div_l2t"));
            m.limit0_resid = dnum(jm.at("limit0_resid"));
            m.sigma_sup = dnum(jm.at("sigma_sup"));
            m.limit_dist = dnum(jm.at("limit_dist"));
            rep.members.push_back(std::move(m));
        }
        rep.div_fit = fit_from_json(j.at("div_fit"));
        rep.resid_fit = fit_from_json(j.at("resid_fit"));
        rep.sigma_fit = fit_from_json(j.at("sigma_fit"));
        rep.dist_fit = fit_from_json(j.at("dist_fit"));
        rep.has_dist_fit = j.at("has_dist_fit").get<bool>();
    } catch (const ojson::exception& e) {
        throw ConfigError(std::string("report parse: ") + e.what());
    }
    return rep;
}

}  // namespace rotlim
