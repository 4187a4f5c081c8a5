#include "rotlim/lp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>

#include "rotlim/norms.hpp"
#include "rotlim/operators.hpp"
#include "rotlim/parallel.hpp"

namespace rotlim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double field_lp(const SpectralScalar& f, double p) {
    return p == kInf ? lp_max(f) : lp_norm(f, p);
}

// l^r combination of nonnegative entries.
double lr_sum(const std::vector<double>& a, double r) {
    if (r == kInf) {
        double m = 0.0;
        for (double v : a) m = std::max(m, v);
        return m;
    }
    double s = 0.0;
    for (double v : a) s += std::pow(v, r);
    return std::pow(s, 1.0 / r);
}

SpectralScalar apply_radial(const SpectralScalar& f, const std::function<double(double)>& m) {
    const GridSpec& g = f.grid;
    const int n = g.n;
    const double fs = g.freq_scale();
    SpectralScalar out(g);
    parallel_for(f.coeffs.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double k1 = fs * g.signed_index(static_cast<int>(i) / n);
            const double k2 = fs * g.signed_index(static_cast<int>(i) % n);
            out.coeffs[i] = m(std::sqrt(k1 * k1 + k2 * k2)) * f.coeffs[i];
        }
    });
    return out;
}

}  // namespace

DyadicPartition::DyadicPartition(double r1, double r2) : r1_(r1), r2_(r2) {
    if (!(1.0 < r1 && r1 < r2 && r2 < 2.0))
        throw ConfigError("DyadicPartition: need 1 < r1 < r2 < 2");
}

double DyadicPartition::chi(double r) const {
    if (r <= r1_) return 1.0;
    if (r >= r2_) return 0.0;
    const double t = (r - r1_) / (r2_ - r1_);
    return 1.0 - t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double DyadicPartition::phi(double r) const { return chi(0.5 * r) - chi(r); }

int DyadicPartition::max_block_index(const GridSpec& g) const {
    const double kmax = std::sqrt(2.0) * (g.n / 2) * g.freq_scale();
    return static_cast<int>(std::ceil(std::log2(kmax / r1_)));
}

SpectralScalar DyadicPartition::dyadic_block(const SpectralScalar& f, int j) const {
    if (j < -1) throw ConfigError("dyadic_block: j >= -1 required");
    if (j == -1) return apply_radial(f, [this](double r) { return chi(r); });
    const double sc = std::ldexp(1.0, -j);
    return apply_radial(f, [this, sc](double r) { return phi(sc * r); });
}

SpectralScalar DyadicPartition::low_freq(const SpectralScalar& f, int j) const {
    if (j < 0) return SpectralScalar(f.grid);
    const double sc = std::ldexp(1.0, -j);
    return apply_radial(f, [this, sc](double r) { return chi(sc * r); });
}

void DyadicPartition::export_profiles(std::ostream& os, double rmax, int samples) const {
    os << "r,chi,phi\n";
    for (int i = 0; i <= samples; ++i) {
        const double r = rmax * i / samples;
        os << r << "," << chi(r) << "," << phi(r) << "\n";
    }
}

double besov_norm(const SpectralScalar& f, const BesovSpec& spec, const DyadicPartition& part) {
    if (spec.p < 1.0 || spec.r < 1.0) throw ConfigError("besov_norm: p, r >= 1 required");
    const int jmax = part.max_block_index(f.grid);
    std::vector<double> terms;
    for (int j = -1; j <= jmax; ++j)
        terms.push_back(std::pow(2.0, j * spec.s) * field_lp(part.dyadic_block(f, j), spec.p));
    return lr_sum(terms, spec.r);
}

double chemin_lerner_norm(const std::vector<SpectralScalar>& series, double dt, double q,
                          const BesovSpec& spec, const DyadicPartition& part) {
    if (series.empty()) throw ConfigError("chemin_lerner_norm: empty series");
    const int jmax = part.max_block_index(series.front().grid);
    std::vector<double> terms;
    for (int j = -1; j <= jmax; ++j) {
        double tq;
        if (q == kInf) {
            tq = 0.0;
            for (const auto& u : series) tq = std::max(tq, field_lp(part.dyadic_block(u, j), spec.p));
        } else {
            tq = 0.0;
            for (const auto& u : series) tq += dt * std::pow(field_lp(part.dyadic_block(u, j), spec.p), q);
            tq = std::pow(tq, 1.0 / q);
        }
        terms.push_back(std::pow(2.0, j * spec.s) * tq);
    }
    return lr_sum(terms, spec.r);
}

double time_lq_besov_norm(const std::vector<SpectralScalar>& series, double dt, double q,
                          const BesovSpec& spec, const DyadicPartition& part) {
    if (series.empty()) throw ConfigError("time_lq_besov_norm: empty series");
    if (q == kInf) {
        double m = 0.0;
        for (const auto& u : series) m = std::max(m, besov_norm(u, spec, part));
        return m;
    }
    double s = 0.0;
    for (const auto& u : series) s += dt * std::pow(besov_norm(u, spec, part), q);
    return std::pow(s, 1.0 / q);
}

BonyParts bony_decompose(const SpectralScalar& u, const SpectralScalar& v,
                         const DyadicPartition& part) {
    if (!(u.grid == v.grid)) throw ConfigError("bony_decompose: mismatched grids");
    const int jmax = part.max_block_index(u.grid);

    std::vector<SpectralScalar> bu, bv;
    for (int j = -1; j <= jmax; ++j) {
        bu.push_back(part.dyadic_block(u, j));
        bv.push_back(part.dyadic_block(v, j));
    }
    auto block = [&](const std::vector<SpectralScalar>& b, int j) -> const SpectralScalar& {
        return b[static_cast<std::size_t>(j + 1)];
    };

    BonyParts parts{SpectralScalar(u.grid), SpectralScalar(u.grid), SpectralScalar(u.grid)};
    for (int j = 1; j <= jmax; ++j) {
        const SpectralScalar su = part.low_freq(u, j - 1);
        const SpectralScalar sv = part.low_freq(v, j - 1);
        parts.Tuv = add(parts.Tuv, multiply(su, block(bv, j)));
        parts.Tvu = add(parts.Tvu, multiply(sv, block(bu, j)));
    }
    for (int j = -1; j <= jmax; ++j) {
        for (int jp = std::max(-1, j - 1); jp <= std::min(jmax, j + 1); ++jp) {
            parts.R = add(parts.R, multiply(block(bu, j), block(bv, jp)));
        }
    }
    return parts;
}

BernsteinRatios bernstein_verify(const SpectralScalar& f, int j, double p, double q, int kappa,
                                 bool ball, const DyadicPartition& part) {
    if (p > q) throw ConfigError("bernstein_verify: need p <= q");
    // Precondition: spectrum inside the declared set.
    const GridSpec& g = f.grid;
    const int n = g.n;
    const double fs = g.freq_scale();
    const double two_j = std::ldexp(1.0, j);
    double leak = 0.0, total = 0.0;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        const double k1 = fs * g.signed_index(static_cast<int>(i) / n);
        const double k2 = fs * g.signed_index(static_cast<int>(i) % n);
        const double r = std::sqrt(k1 * k1 + k2 * k2) / two_j;
        const double a = std::norm(f.coeffs[i]);
        total += a;
        const bool inside = ball ? (r <= 2.0 * part.r2()) : (r >= 0.5 && r <= 2.0 * part.r2());
        if (!inside) leak += a;
    }
    if (total == 0.0) throw ConfigError("bernstein_verify: zero field");
    if (leak > 1e-24 * total) throw ConfigError("bernstein_verify: spectrum outside declared set");

    const SpectralScalar df = fractional_laplacian_pow(f, static_cast<double>(kappa));
    const double inv_p = p == kInf ? 0.0 : 1.0 / p;
    const double inv_q = q == kInf ? 0.0 : 1.0 / q;
    const double fp = field_lp(f, p);

    BernsteinRatios out;
    out.upper = field_lp(df, q) / (std::pow(2.0, j * (kappa + 2.0 * (inv_p - inv_q))) * fp);
    if (!ball) out.lower = field_lp(df, p) / (std::pow(2.0, j * kappa) * fp);
    return out;
}


namespace {

double battery_uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1p-53);
}

SpectralScalar battery_random_field(const GridSpec& g, int band, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SpectralScalar f(g);
    for (int k1 = -band; k1 <= band; ++k1) {
        for (int k2 = -band; k2 <= band; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            const Complex c{battery_uniform(rng, -1.0, 1.0), battery_uniform(rng, -1.0, 1.0)};
            f.at(k1, k2) += 0.5 * c;
            f.at(-k1, -k2) += 0.5 * std::conj(c);
        }
    }
    return f;
}

double battery_max_diff(const SpectralScalar& a, const SpectralScalar& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        m = std::max(m, std::abs(a.coeffs[i] - b.coeffs[i]));
    return m;
}

}  // namespace

std::vector<LpCheck> lp_property_battery(const GridSpec& g, std::uint64_t seed) {
    const DyadicPartition part;
    std::vector<LpCheck> out;
    auto push = [&out](const std::string& name, double value, double bound) {
        out.push_back({name, value, bound, value <= bound});
    };

    // 1. partition of unity at every discrete frequency
    {
        const int jmax = part.max_block_index(g);
        const double fs = g.freq_scale();
        double worst = 0.0;
        for (int k1 = -g.n / 2 + 1; k1 <= g.n / 2; ++k1) {
            for (int k2 = -g.n / 2 + 1; k2 <= g.n / 2; ++k2) {
                const double r = fs * std::sqrt(double(k1) * k1 + double(k2) * k2);
                double sum = part.chi(r);
                for (int j = 0; j <= jmax; ++j) sum += part.phi(std::ldexp(1.0, -j) * r);
                worst = std::max(worst, std::abs(sum - 1.0));
            }
        }
        push("partition-of-unity", worst, 1e-12);
    }

    const SpectralScalar f = battery_random_field(g, g.n / 2 - 2, seed);
    const int jmax = part.max_block_index(g);

    // 2. sum of blocks reconstructs the field
    {
        SpectralScalar sum(g);
        for (int j = -1; j <= jmax; ++j) sum = add(sum, part.dyadic_block(f, j));
        push("block-reconstruction", battery_max_diff(sum, f), 1e-12);
    }

    // 3. S_j telescopes the blocks below j
    {
        double worst = 0.0;
        for (int j = 0; j <= jmax; ++j) {
            SpectralScalar partial(g);
            for (int k = -1; k <= j - 1; ++k) partial = add(partial, part.dyadic_block(f, k));
            worst = std::max(worst, battery_max_diff(part.low_freq(f, j), partial));
        }
        push("low-freq-telescope", worst, 1e-12);
    }

    // 4. blocks two scales apart have disjoint multiplier supports
    {
        double worst = 0.0;
        for (int j = -1; j <= jmax; ++j) {
            const SpectralScalar bj = part.dyadic_block(f, j);
            for (int jp = j + 2; jp <= jmax; ++jp)
                worst = std::max(worst, l2_norm(part.dyadic_block(bj, jp)));
        }
        push("block-orthogonality", worst, 0.0);
    }

    // 5. Bony identity on 20 random pairs
    {
        double worst = 0.0;
        const int band = g.n / 3 - 1;  // keep products alias-free
        for (int i = 0; i < 20; ++i) {
            const SpectralScalar u = battery_random_field(g, band, seed + 100 + 2 * i);
            const SpectralScalar v = battery_random_field(g, band, seed + 101 + 2 * i);
            const BonyParts parts = bony_decompose(u, v, part);
            const SpectralScalar recon = add(add(parts.Tuv, parts.Tvu), parts.R);
            worst = std::max(worst, battery_max_diff(recon, multiply(u, v)));
        }
        push("bony-identity", worst, 1e-11);
    }

    // 6. B^s_{2,2} / H^s ratio band, one constant per s
    {
        double worst_band = 0.0;
        for (double s : {-1.0, 0.0, 1.0, 2.0}) {
            double rmin = kInf, rmax = 0.0;
            for (int i = 0; i < 12; ++i) {
                const SpectralScalar h =
                    battery_random_field(g, 3 + 2 * i, seed + 700 + static_cast<int>(4 * s) + i);
                const double ratio = besov_norm(h, BesovSpec{s, 2.0, 2.0}, part) / sobolev_norm(h, s);
                rmin = std::min(rmin, ratio);
                rmax = std::max(rmax, ratio);
            }
            worst_band = std::max(worst_band, rmax / rmin);
        }
        push("besov-sobolev-band", worst_band, 8.0);
    }

    // 7. Bernstein annulus ratios j-independent over j in {2..5}
    {
        const GridSpec gf(std::max(g.n, 128));
        auto coherent_shell = [&](int j) {
            SpectralScalar sf(gf);
            const double lo = part.r1() * std::ldexp(1.0, j);
            const double hi = 2.0 * std::ldexp(1.0, j);
            for (int k1 = -gf.n / 2 + 1; k1 <= gf.n / 2; ++k1)
                for (int k2 = -gf.n / 2 + 1; k2 <= gf.n / 2; ++k2) {
                    const double r = std::sqrt(double(k1) * k1 + double(k2) * k2);
                    if (r > lo && r < hi) sf.at(k1, k2) = Complex{1.0, 0.0};
                }
            return sf;
        };
        double worst_band = 0.0;
        for (double q : {2.0, kInf}) {
            double up_min = kInf, up_max = 0.0, lo_min = kInf, lo_max = 0.0;
            for (int j = 2; j <= 5; ++j) {
                const BernsteinRatios r = bernstein_verify(coherent_shell(j), j, 2.0, q, 1, false, part);
                up_min = std::min(up_min, r.upper);
                up_max = std::max(up_max, r.upper);
                lo_min = std::min(lo_min, r.lower);
                lo_max = std::max(lo_max, r.lower);
            }
            worst_band = std::max(worst_band, std::max(up_max / up_min, lo_max / lo_min));
        }
        push("bernstein-j-band", worst_band, 3.0);
    }

    return out;
}

}  // namespace rotlim
