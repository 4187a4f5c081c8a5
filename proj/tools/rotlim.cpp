#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rotlim/heat.hpp"
#include "rotlim/io.hpp"
#include "rotlim/limit.hpp"
#include "rotlim/lp.hpp"
#include "rotlim/norms.hpp"
#include "rotlim/nsc.hpp"
#include "rotlim/operators.hpp"
#include "rotlim/sweep.hpp"

namespace {

using namespace rotlim;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitAssert = 4;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open output file " + path);
    return os;
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    FlowParams params;
    int n = 64;
    double T = 1.0;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    double amp = 0.25;
    int band = 4;
    int stride = 10;
    std::string out, diag;
    bool well_prepared = false;
    bool check = false;
};

int run_simulate(const SimulateOpts& o) {
    const GridSpec g(o.n);
    InitialData init = ill_prepared_data(g, o.seed, o.amp, o.band);
    if (o.well_prepared) {  // zero density perturbation, solenoidal velocity
        init.r0 = SpectralScalar(g);
        init.u0 = leray_project(init.u0).div_free;
    }
    const SimResult res = simulate(init.r0, init.u0, o.params, o.T, o.dt, o.stride);

    if (!o.diag.empty()) {
        std::ofstream os = open_out(o.diag);
        os << "t,energy,dissipation,div_norm,sigma_h_neg3,eta_l2,wave_residual,min_rho\n";
        for (const DiagnosticsRecord& d : res.diags)
            os << num(d.t) << ',' << num(d.energy) << ',' << num(d.dissipation) << ','
               << num(d.div_norm) << ',' << num(d.sigma_neg_norm) << ',' << num(d.eta) << ','
               << num(d.wave_residual) << ',' << num(d.min_rho) << "\n";
    }
    if (!o.out.empty()) {
        std::vector<SpectralScalar> comps;
        comps.reserve(3 * res.frames.size());
        for (const FlowState& f : res.frames) {
            comps.push_back(f.r);
            comps.push_back(f.m.x);
            comps.push_back(f.m.y);
        }
        write_spf(o.out, comps);
    }

    const DiagnosticsRecord& last = res.diags.back();
    std::cout << "simulate: frames=" << res.frames.size() << " t=" << num(last.t)
              << " energy=" << num(last.energy) << " min_rho=" << num(last.min_rho) << "\n";

    if (o.check) {
        const double budget = res.diags.front().energy * (1.0 + 1e-6);
        for (const DiagnosticsRecord& d : res.diags) {
            if (d.energy + d.dissipation > budget) {
                std::cerr << "assert failed: energy inequality violated at t = " << num(d.t)
                          << " (" << num(d.energy + d.dissipation) << " > " << num(budget)
                          << ")\n";
                return kExitAssert;
            }
        }
        std::cout << "assert: energy inequality holds at every recorded time\n";
    }
    return kExitOk;
}

// --------------------------------------------------------------- heat-decay

struct HeatOpts {
    double beta = 1.0, s = 2.0, delta = 0.1, T = 1.0, alpha = 0.0;
    std::vector<double> eps_list{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
    std::string forcing = "multi";
    int n = 64;
    std::uint64_t seed = 1;
    std::string out;
    bool check = false;
};

int run_heat_decay(const HeatOpts& o) {
    const GridSpec g(o.n);
    HeatConfig tmpl;
    tmpl.beta = o.beta;
    tmpl.s = o.s;
    tmpl.delta = o.delta;
    tmpl.T = o.T;
    tmpl.phi0 = SpectralScalar(g);
    const DecayReport rep =
        rate_sweep(o.eps_list, tmpl, g, parse_forcing_family(o.forcing), o.alpha, o.seed);

    nlohmann::ordered_json j;
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const DecayEntry& e : rep.entries) {
        nlohmann::ordered_json je;
        je["eps"] = e.eps;
        je["norm"] = e.norm;
        je["bound_factor"] = e.bound_factor;
        je["ratio"] = e.ratio;
        entries.push_back(std::move(je));
    }
    j["entries"] = std::move(entries);
    j["slope"] = rep.slope;
    j["slope_target"] = rep.slope_target;
    j["band"] = rep.band;
    const std::string text = j.dump(2) + "\n";
    if (!o.out.empty())
        open_out(o.out) << text;
    else
        std::cout << text;
    std::cerr << "heat-decay: slope=" << num(rep.slope) << " target=" << num(rep.slope_target)
              << " band=" << num(rep.band) << "\n";

    if (o.check && !(rep.slope_ok && rep.band_ok)) {
        std::cerr << "assert failed: decay slope or ratio band outside the expected range\n";
        return kExitAssert;
    }
    return kExitOk;
}

// -------------------------------------------------------------------- limit

struct LimitOpts {
    double mu = 0.05;
    int beta_one = 1;
    int n = 64;
    double T = 1.0;
    double dt = 1e-3;
    int stride = 10;
    std::string init = "seed";
    std::uint64_t seed = 1;
    double amp = 0.25;
    int band = 4;
    std::string out;
};

LimitState load_initial(const LimitOpts& o) {
    if (o.init == "seed") {
        const GridSpec g(o.n);
        const InitialData d = ill_prepared_data(g, o.seed, o.amp, o.band);
        return limit_initial_data(d.r0, d.u0);
    }
    const std::vector<SpectralScalar> comps = read_spf(o.init);
    if (comps.size() == 2) {  // (omega, sigma)
        LimitState s(comps[0].grid);
        s.omega = comps[0];
        s.sigma = comps[1];
        return s;
    }
    if (comps.size() == 3)  // (r0, u1, u2) matched data
        return limit_initial_data(comps[0], SpectralVec2{[&] {
                                      SpectralVec2 u(comps[0].grid);
                                      u.x = comps[1];
                                      u.y = comps[2];
                                      return u;
                                  }()});
    throw ConfigError("limit: init file must hold 2 (omega, sigma) or 3 (r, u1, u2) components");
}

int run_limit(const LimitOpts& o) {
    LimitParams p;
    p.mu = o.mu;
    p.beta_is_one = o.beta_one != 0;
    const LimitResult res = limit_simulate(load_initial(o), p, o.T, o.dt, o.stride);
    if (!o.out.empty()) {
        std::vector<SpectralScalar> comps;
        comps.reserve(2 * res.frames.size());
        for (const LimitState& s : res.frames) {
            comps.push_back(s.omega);
            comps.push_back(s.sigma);
        }
        write_spf(o.out, comps);
    }
    const LimitState& last = res.frames.back();
    std::cout << "limit: frames=" << res.frames.size() << " t=" << num(last.time)
              << " omega_l2=" << num(l2_norm(last.omega))
              << " sigma_l2=" << num(l2_norm(last.sigma))
              << " frame_spacing=" << num(res.dt * res.stride) << "\n";
    return kExitOk;
}

// --------------------------------------------------------- limit0-residual

struct ResidualOpts {
    std::string traj;
    double dt = 0.0;  // frame spacing in the trajectory file
    int stride = 1;   // subsampling of the stored frames
    double s_neg = 3.0;
    double mu = 0.05;
    std::string out;
};

int run_limit0_residual(const ResidualOpts& o) {
    if (!(o.dt > 0.0)) throw ConfigError("limit0-residual: --dt must be positive");
    if (o.stride < 1) throw ConfigError("limit0-residual: --stride must be positive");
    const std::vector<SpectralScalar> comps = read_spf(o.traj);
    if (comps.size() % 2 != 0)
        throw ConfigError("limit0-residual: trajectory must hold (omega, sigma) pairs");

    std::vector<LimitState> frames;
    for (std::size_t j = 0; 2 * j + 1 < comps.size(); j += o.stride) {
        LimitState s(comps[0].grid);
        s.time = static_cast<double>(j) * o.dt;
        s.omega = comps[2 * j];
        s.sigma = comps[2 * j + 1];
        frames.push_back(std::move(s));
    }
    LimitParams p;
    p.mu = o.mu;
    const std::vector<ResidualSample> samples =
        limit0_residual(frames, o.dt * o.stride, p, o.s_neg);

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!o.out.empty()) {
        file = open_out(o.out);
        os = &file;
    }
    *os << "t,residual\n";
    double worst = 0.0;
    for (const ResidualSample& s : samples) {
        *os << num(s.t) << ',' << num(s.value) << "\n";
        worst = std::max(worst, s.value);
    }
    std::cerr << "limit0-residual: samples=" << samples.size() << " max=" << num(worst) << "\n";
    return kExitOk;
}

// -------------------------------------------------------------------- sweep

struct SweepOpts {
    SweepConfig cfg;
    std::string out = "report";
    std::string format = "both";
    int jobs = 1;  // accepted for interface stability; members run in order
    bool check = false;
};

int run_sweep(const SweepOpts& o) {
    if (o.format != "csv" && o.format != "json" && o.format != "both")
        throw ConfigError("sweep: --format must be csv, json or both");
    if (o.jobs < 1) throw ConfigError("sweep: --jobs must be positive");
    const SweepReport rep = run_convergence_suite(o.cfg);
    if (o.format != "json") {
        std::ofstream os = open_out(o.out + ".csv");
        emit_report_csv(rep, os);
    }
    if (o.format != "csv") {
        std::ofstream os = open_out(o.out + ".json");
        emit_report_json(rep, os);
    }

    std::cout << "sweep: members=" << rep.members.size() << " complete=" << rep.complete
              << " div_band=" << num(rep.div_fit.band)
              << " resid_slope=" << num(rep.resid_fit.slope)
              << " sigma_band=" << num(rep.sigma_fit.band) << "\n";

    if (o.check) {
        bool ok = rep.complete;
        if (!ok) std::cerr << "assert failed: sweep has failed members\n";
        if (rep.div_fit.band > 3.0) {
            std::cerr << "assert failed: divergence band " << num(rep.div_fit.band) << " > 3\n";
            ok = false;
        }
        if (!(rep.resid_fit.slope > 0.2) || !(rep.resid_fit.r2 >= 0.8)) {
            std::cerr << "assert failed: residual fit slope " << num(rep.resid_fit.slope)
                      << " r2 " << num(rep.resid_fit.r2) << "\n";
            ok = false;
        }
        if (rep.has_dist_fit) {
            for (std::size_t i = 1; i < rep.members.size(); ++i)
                if (!(rep.members[i].limit_dist < rep.members[i - 1].limit_dist)) {
                    std::cerr << "assert failed: limit distance not strictly decreasing\n";
                    ok = false;
                    break;
                }
        }
        if (!ok) return kExitAssert;
        std::cout << "assert: sweep bounds hold\n";
    }
    return kExitOk;
}

// ----------------------------------------------------------------- lp-check

struct LpOpts {
    int n = 64;
    std::uint64_t seed = 1;
    std::string profiles;
    bool check = false;
};

int run_lp_check(const LpOpts& o) {
    if (!o.profiles.empty()) {
        DyadicPartition part;
        std::ofstream os = open_out(o.profiles);
        part.export_profiles(os, 4.0, 256);
    }
    bool all_ok = true;
    for (const LpCheck& c : lp_property_battery(GridSpec(o.n), o.seed)) {
        std::printf("%-22s value=%-12.4e bound=%-12.4e %s\n", c.name.c_str(), c.value, c.bound,
                    c.ok ? "ok" : "FAIL");
        all_ok = all_ok && c.ok;
    }
    if (o.check && !all_ok) {
        std::cerr << "assert failed: littlewood-paley battery has failing checks\n";
        return kExitAssert;
    }
    return kExitOk;
}

std::string g_config_path;  // consumed before CLI11 parsing; kept for --help

/// Expand `--config file` into explicit options: every `key = value` line
/// becomes `--key=value` appended after the raw arguments, skipping keys
/// already present on the command line (so flags override the file).
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty()) return args;
    for (const auto& [key, value] : read_config_file(path)) {
        const std::string flag = "--" + key;
        bool on_cli = false;
        for (const std::string& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) {
                on_cli = true;
                break;
            }
        if (!on_cli) args.push_back(flag + "=" + value);
    }
    return args;
}

void add_common(CLI::App* sub, std::uint64_t* seed, bool* check) {
    sub->add_option("--config", g_config_path,
                    "flat key = value file with flag names as keys; command line overrides");
    if (seed)
        sub->add_option("--seed", *seed, "random seed")->envname("ROTLIM_SEED");
    if (check)
        sub->add_flag("--assert", *check, "exit 4 when the built-in acceptance check fails");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rotlim: numerical laboratory for singular limits of rotating compressible flow"};
    app.require_subcommand(1);

    SimulateOpts sim;
    CLI::App* s_sim = app.add_subcommand("simulate", "run the rescaled compressible solver");
    s_sim->add_option("--eps", sim.params.eps, "Rossby number");
    s_sim->add_option("--alpha", sim.params.alpha, "Mach exponent");
    s_sim->add_option("--beta", sim.params.beta, "bulk-viscosity exponent");
    s_sim->add_option("--mu", sim.params.mu, "shear viscosity");
    s_sim->add_option("--gamma", sim.params.gamma, "adiabatic exponent");
    s_sim->add_option("--a", sim.params.a, "pressure constant");
    s_sim->add_option("--n", sim.n, "grid points per dimension");
    s_sim->add_option("--T", sim.T, "final time");
    s_sim->add_option("--dt", sim.dt, "time step");
    s_sim->add_option("--amp", sim.amp, "initial-data amplitude");
    s_sim->add_option("--band", sim.band, "initial-data spectral band");
    s_sim->add_option("--stride", sim.stride, "recording stride");
    s_sim->add_option("--out", sim.out, "trajectory output (SPF1, r/m1/m2 per frame)");
    s_sim->add_option("--diag", sim.diag, "diagnostics CSV output");
    s_sim->add_flag("--well-prepared", sim.well_prepared,
                    "project the seeded data onto zero density / solenoidal velocity");
    add_common(s_sim, &sim.seed, &sim.check);

    HeatOpts heat;
    CLI::App* s_heat = app.add_subcommand("heat-decay", "fast-diffusion decay-rate sweep");
    s_heat->add_option("--beta", heat.beta, "diffusion exponent, nu = eps^{2 beta}");
    s_heat->add_option("--s", heat.s, "derivative order");
    s_heat->add_option("--delta", heat.delta, "initial-layer cutoff");
    s_heat->add_option("--T", heat.T, "horizon");
    s_heat->add_option("--alpha", heat.alpha, "Mach exponent (estphi forcing only)");
    s_heat->add_option("--eps-list", heat.eps_list, "decreasing eps values")->delimiter(',');
    s_heat->add_option("--forcing", heat.forcing, "none|single|multi|estphi");
    s_heat->add_option("--n", heat.n, "grid points per dimension");
    s_heat->add_option("--out", heat.out, "JSON report path (stdout when empty)");
    add_common(s_heat, &heat.seed, &heat.check);

    LimitOpts lim;
    CLI::App* s_lim = app.add_subcommand("limit", "integrate the limit dynamics");
    s_lim->add_option("--mu", lim.mu, "shear viscosity");
    s_lim->add_option("--beta-one", lim.beta_one, "1 for the critical scaling coupling")
        ->check(CLI::Range(0, 1));
    s_lim->add_option("--n", lim.n, "grid points per dimension");
    s_lim->add_option("--T", lim.T, "final time");
    s_lim->add_option("--dt", lim.dt, "time step");
    s_lim->add_option("--stride", lim.stride, "recording stride");
    s_lim->add_option("--init", lim.init, "'seed' or an SPF1 file (2 or 3 components)");
    s_lim->add_option("--amp", lim.amp, "seeded initial-data amplitude");
    s_lim->add_option("--band", lim.band, "seeded initial-data band");
    s_lim->add_option("--out", lim.out, "trajectory output (SPF1, omega/sigma per frame)");
    add_common(s_lim, &lim.seed, nullptr);

    ResidualOpts resid;
    CLI::App* s_res = app.add_subcommand("limit0-residual",
                                         "residual of the limit vorticity equation");
    s_res->add_option("--traj", resid.traj, "SPF1 trajectory (omega, sigma per frame)")
        ->required();
    s_res->add_option("--dt", resid.dt, "frame spacing of the trajectory file")->required();
    s_res->add_option("--stride", resid.stride, "subsample the stored frames");
    s_res->add_option("--s-neg", resid.s_neg, "negative Sobolev index");
    s_res->add_option("--mu", resid.mu, "shear viscosity");
    s_res->add_option("--out", resid.out, "CSV output (stdout when empty)");
    add_common(s_res, nullptr, nullptr);

    SweepOpts swp;
    swp.cfg.eps_list = {0.25, 0.125, 0.0625, 0.03125};
    swp.cfg.T = 0.5;
    swp.cfg.stride = 4;
    swp.cfg.t_skip = 0.25;
    CLI::App* s_swp = app.add_subcommand("sweep", "eps-convergence suite");
    s_swp->add_option("--eps-list", swp.cfg.eps_list, "decreasing eps values")->delimiter(',');
    s_swp->add_option("--alpha", swp.cfg.params.alpha, "Mach exponent");
    s_swp->add_option("--beta", swp.cfg.params.beta, "bulk-viscosity exponent");
    s_swp->add_option("--mu", swp.cfg.params.mu, "shear viscosity");
    s_swp->add_option("--gamma", swp.cfg.params.gamma, "adiabatic exponent");
    s_swp->add_option("--a", swp.cfg.params.a, "pressure constant");
    s_swp->add_option("--n", swp.cfg.n, "grid points per dimension");
    s_swp->add_option("--T", swp.cfg.T, "final time");
    s_swp->add_option("--dt", swp.cfg.dt, "time step (0: derive from --cfl)");
    s_swp->add_option("--cfl", swp.cfg.cfl, "advective CFL number for the dt rule");
    s_swp->add_option("--stride", swp.cfg.stride, "recording stride");
    s_swp->add_option("--amp", swp.cfg.amplitude, "initial-data amplitude");
    s_swp->add_option("--s-tilde", swp.cfg.s_tilde, "sigma norm index");
    s_swp->add_option("--t-skip", swp.cfg.t_skip, "initial-layer exclusion window");
    s_swp->add_option("--band", swp.cfg.band, "initial-data spectral band");
    s_swp->add_option("--out", swp.out, "output base path (.csv / .json appended)");
    s_swp->add_option("--format", swp.format, "csv|json|both");
    s_swp->add_option("--jobs", swp.jobs, "member concurrency bound");
    add_common(s_swp, &swp.cfg.seed, &swp.check);

    LpOpts lp;
    CLI::App* s_lp = app.add_subcommand("lp-check", "littlewood-paley property battery");
    s_lp->add_option("--n", lp.n, "grid points per dimension");
    s_lp->add_option("--profiles", lp.profiles, "export chi/phi profiles as CSV");
    add_common(s_lp, &lp.seed, &lp.check);

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(std::move(args));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (s_sim->parsed()) return run_simulate(sim);
        if (s_heat->parsed()) return run_heat_decay(heat);
        if (s_lim->parsed()) return run_limit(lim);
        if (s_res->parsed()) return run_limit0_residual(resid);
        if (s_swp->parsed()) return run_sweep(swp);
        if (s_lp->parsed()) return run_lp_check(lp);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
