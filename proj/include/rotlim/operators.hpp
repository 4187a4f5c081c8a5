#pragma once

#include <utility>

#include "rotlim/grid.hpp"

namespace rotlim {

// Fourier-multiplier calculus. grad multiplies by i*k, curl of a 2-D vector
// is i*(k1 v2 - k2 v1), perp_grad is (-d2, d1). All act mode by mode.

SpectralVec2 grad(const SpectralScalar& f);
SpectralScalar div(const SpectralVec2& v);
SpectralScalar laplacian(const SpectralScalar& f);
SpectralVec2 perp_grad(const SpectralScalar& f);
SpectralScalar curl2d(const SpectralVec2& v);

/// Inverse Laplacian; the mean mode is discarded (output has zero mean).
SpectralScalar inv_laplacian(const SpectralScalar& f);

struct LerayParts {
    SpectralVec2 div_free;
    SpectralScalar potential;  // zero mean
    Complex mean_x{0.0, 0.0};  // k = 0 coefficient of the input
    Complex mean_y{0.0, 0.0};
};

/// Helmholtz decomposition v = div_free + grad(potential) + mean.
LerayParts leray_project(const SpectralVec2& v);

/// 2/3-rule truncation: zeroes modes with max(|k1|, |k2|) > n/3.
SpectralScalar dealias(const SpectralScalar& f);
void dealias_inplace(SpectralScalar& f);
void dealias_inplace(SpectralVec2& v);

/// Dealiased pointwise product of two fields.
SpectralScalar multiply(const SpectralScalar& a, const SpectralScalar& b);

SpectralScalar add(const SpectralScalar& a, const SpectralScalar& b);
SpectralScalar sub(const SpectralScalar& a, const SpectralScalar& b);
SpectralScalar scale(const SpectralScalar& a, double s);
void axpy(SpectralScalar& y, double a, const SpectralScalar& x);  // y += a*x

/// |D|^s multiplier (homogeneous); the mean mode is zeroed for any s != 0.
SpectralScalar fractional_laplacian_pow(const SpectralScalar& f, double s);

}  // namespace rotlim
