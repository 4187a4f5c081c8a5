#include "rotlim/operators.hpp"

#include <cmath>

#include "rotlim/parallel.hpp"

namespace rotlim {

namespace {

void check_same_grid(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw ConfigError("operator: mismatched grids");
}

// Applies body(index, k1, k2) over all modes with physical wavenumbers
// (signed integers times freq_scale).
template <class Body>
void for_modes(const GridSpec& g, Body&& body) {
    const int n = g.n;
    const double s = g.freq_scale();
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const int i1 = static_cast<int>(i) / n;
            const int i2 = static_cast<int>(i) % n;
            body(i, s * g.signed_index(i1), s * g.signed_index(i2));
        }
    });
}

}  // namespace

SpectralVec2 grad(const SpectralScalar& f) {
    SpectralVec2 out(f.grid);
    for_modes(f.grid, [&](std::size_t i, double k1, double k2) {
        const Complex c = f.coeffs[i];
        out.x.coeffs[i] = Complex{0.0, 1.0} * k1 * c;
        out.y.coeffs[i] = Complex{0.0, 1.0} * k2 * c;
    });
    return out;
}

SpectralScalar div(const SpectralVec2& v) {
    check_same_grid(v.x.grid, v.y.grid);
    SpectralScalar out(v.grid());
    for_modes(v.grid(), [&](std::size_t i, double k1, double k2) {
        out.coeffs[i] = Complex{0.0, 1.0} * (k1 * v.x.coeffs[i] + k2 * v.y.coeffs[i]);
    });
    return out;
}

SpectralScalar laplacian(const SpectralScalar& f) {
    SpectralScalar out(f.grid);
    for_modes(f.grid, [&](std::size_t i, double k1, double k2) {
        out.coeffs[i] = -(k1 * k1 + k2 * k2) * f.coeffs[i];
    });
    return out;
}

SpectralVec2 perp_grad(const SpectralScalar& f) {
    SpectralVec2 out(f.grid);
    for_modes(f.grid, [&](std::size_t i, double k1, double k2) {
        const Complex c = f.coeffs[i];
        out.x.coeffs[i] = Complex{0.0, -1.0} * k2 * c;
        out.y.coeffs[i] = Complex{0.0, 1.0} * k1 * c;
    });
    return out;
}

SpectralScalar curl2d(const SpectralVec2& v) {
    check_same_grid(v.x.grid, v.y.grid);
    SpectralScalar out(v.grid());
    for_modes(v.grid(), [&](std::size_t i, double k1, double k2) {
        out.coeffs[i] = Complex{0.0, 1.0} * (k1 * v.y.coeffs[i] - k2 * v.x.coeffs[i]);
    });
    return out;
}

SpectralScalar inv_laplacian(const SpectralScalar& f) {
    SpectralScalar out(f.grid);
    for_modes(f.grid, [&](std::size_t i, double k1, double k2) {
        const double k2norm = k1 * k1 + k2 * k2;
        out.coeffs[i] = k2norm > 0.0 ? -f.coeffs[i] / k2norm : Complex{0.0, 0.0};
    });
    return out;
}

namespace {

// Veltkamp-style truncation: clears the low `bits` significand bits so that
// subsequent products with small integers are exact in double precision.
double truncate_low_bits(double x, int bits) {
    const double c = (std::ldexp(1.0, bits) + 1.0) * x;
    return c - (c - x);
}

}  // namespace

LerayParts leray_project(const SpectralVec2& v) {
    check_same_grid(v.x.grid, v.y.grid);
    LerayParts parts;
    parts.div_free = SpectralVec2(v.grid());
    parts.potential = SpectralScalar(v.grid());
    parts.mean_x = v.x.coeffs[0];
    parts.mean_y = v.y.coeffs[0];
    for_modes(v.grid(), [&](std::size_t i, double k1, double k2) {
        const double k2norm = k1 * k1 + k2 * k2;
        if (k2norm == 0.0) return;
        const Complex vx = v.x.coeffs[i];
        const Complex vy = v.y.coeffs[i];
        // potential coefficient: -i k.v / |k|^2
        const Complex phi = Complex{0.0, -1.0} * (k1 * vx + k2 * vy) / k2norm;
        parts.potential.coeffs[i] = phi;
        // The solenoidal part is stored as k_perp * a. The amplitude is
        // truncated so that k1*(k2*a) and k2*(k1*a) are exact products;
        // div() then cancels them to exactly zero, mode by mode.
        Complex a = (k1 * vy - k2 * vx) / k2norm;
        const double kabs = std::max(std::abs(k1), std::abs(k2));
        const int bits = 2 * (std::max(0, std::ilogb(kabs)) + 2);
        a = Complex{truncate_low_bits(a.real(), bits), truncate_low_bits(a.imag(), bits)};
        parts.div_free.x.coeffs[i] = -k2 * a;
        parts.div_free.y.coeffs[i] = k1 * a;
    });
    return parts;
}

void dealias_inplace(SpectralScalar& f) {
    const int n = f.grid.n;
    const int cut = n / 3;
    parallel_for(f.coeffs.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const int k1 = f.grid.signed_index(static_cast<int>(i) / n);
            const int k2 = f.grid.signed_index(static_cast<int>(i) % n);
            if (std::abs(k1) > cut || std::abs(k2) > cut) f.coeffs[i] = Complex{0.0, 0.0};
        }
    });
}

void dealias_inplace(SpectralVec2& v) {
    dealias_inplace(v.x);
    dealias_inplace(v.y);
}

SpectralScalar dealias(const SpectralScalar& f) {
    SpectralScalar out = f;
    dealias_inplace(out);
    return out;
}

SpectralScalar multiply(const SpectralScalar& a, const SpectralScalar& b) {
    check_same_grid(a.grid, b.grid);
    const std::vector<double> pa = transform(a);
    const std::vector<double> pb = transform(b);
    std::vector<double> prod(pa.size());
    parallel_for(pa.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) prod[i] = pa[i] * pb[i];
    });
    SpectralScalar out = inverse_transform(a.grid, prod);
    dealias_inplace(out);
    return out;
}

SpectralScalar add(const SpectralScalar& a, const SpectralScalar& b) {
    check_same_grid(a.grid, b.grid);
    SpectralScalar out = a;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] += b.coeffs[i];
    return out;
}

SpectralScalar sub(const SpectralScalar& a, const SpectralScalar& b) {
    check_same_grid(a.grid, b.grid);
    SpectralScalar out = a;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] -= b.coeffs[i];
    return out;
}

SpectralScalar scale(const SpectralScalar& a, double s) {
    SpectralScalar out = a;
    for (auto& c : out.coeffs) c *= s;
    return out;
}

void axpy(SpectralScalar& y, double a, const SpectralScalar& x) {
    check_same_grid(y.grid, x.grid);
    for (std::size_t i = 0; i < y.coeffs.size(); ++i) y.coeffs[i] += a * x.coeffs[i];
}

SpectralScalar fractional_laplacian_pow(const SpectralScalar& f, double s) {
    SpectralScalar out(f.grid);
    for_modes(f.grid, [&](std::size_t i, double k1, double k2) {
        const double k2norm = k1 * k1 + k2 * k2;
        if (k2norm == 0.0) {
            out.coeffs[i] = s == 0.0 ? f.coeffs[i] : Complex{0.0, 0.0};
        } else {
            out.coeffs[i] = std::pow(k2norm, 0.5 * s) * f.coeffs[i];
        }
    });
    return out;
}

}  // namespace rotlim
