#include "rotlim/norms.hpp"

#include <cmath>

#include "rotlim/operators.hpp"
#include "rotlim/parallel.hpp"

namespace rotlim {

namespace {

double weighted_coeff_sum(const SpectralScalar& f, double s, bool homogeneous) {
    const GridSpec& g = f.grid;
    const int n = g.n;
    const double fs = g.freq_scale();
    return block_sum(f.coeffs.size(), [&](std::size_t i) {
        const double k1 = fs * g.signed_index(static_cast<int>(i) / n);
        const double k2 = fs * g.signed_index(static_cast<int>(i) % n);
        const double ksq = k1 * k1 + k2 * k2;
        const double a = std::norm(f.coeffs[i]);
        if (homogeneous) {
            if (ksq == 0.0) return 0.0;
            return std::pow(ksq, s) * a;
        }
        return std::pow(1.0 + ksq, s) * a;
    });
}

}  // namespace

double sobolev_norm(const SpectralScalar& f, double s) {
    const double measure = f.grid.length * f.grid.length;
    return std::sqrt(measure * weighted_coeff_sum(f, s, false));
}

double homogeneous_sobolev_norm(const SpectralScalar& f, double s) {
    if (s < 0.0 && std::abs(f.coeffs[0]) > 1e-14)
        throw ConfigError("homogeneous_sobolev_norm: nonzero mean with s < 0");
    const double measure = f.grid.length * f.grid.length;
    return std::sqrt(measure * weighted_coeff_sum(f, s, true));
}

double l2_norm(const SpectralScalar& f) { return sobolev_norm(f, 0.0); }

double l2_norm(const SpectralVec2& v) {
    const double a = l2_norm(v.x);
    const double b = l2_norm(v.y);
    return std::sqrt(a * a + b * b);
}

double lp_norm(const SpectralScalar& f, double p) {
    if (p < 1.0) throw ConfigError("lp_norm: p must be >= 1");
    const std::vector<double> phys = transform(f);
    const double s = block_sum(phys.size(), [&](std::size_t i) { return std::pow(std::abs(phys[i]), p); });
    return std::pow(f.grid.cell_area() * s, 1.0 / p);
}

double lp_max(const SpectralScalar& f) {
    const std::vector<double> phys = transform(f);
    double m = 0.0;
    for (double v : phys) m = std::max(m, std::abs(v));
    return m;
}

double gagliardo_nirenberg_check(const SpectralScalar& f, double p) {
    if (p < 2.0) throw ConfigError("gagliardo_nirenberg_check: p must be >= 2");
    const double lam = (p - 2.0) / p;
    const double num = lp_norm(f, p);
    const double l2 = l2_norm(f);
    const double g2 = homogeneous_sobolev_norm(f, 1.0);
    const double den = std::pow(l2, 1.0 - lam) * std::pow(g2, lam);
    if (den < 1e-300) throw NumericError("gagliardo_nirenberg_check: degenerate (constant field)");
    return num / den;
}

}  // namespace rotlim
