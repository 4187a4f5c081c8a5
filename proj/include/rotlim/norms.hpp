#pragma once

#include "rotlim/grid.hpp"

namespace rotlim {

/// (length^2 sum_k (1+|k|^2)^s |c_k|^2)^{1/2}
double sobolev_norm(const SpectralScalar& f, double s);

/// Same with weight |k|^{2s}, k = 0 omitted. For s < 0 the input must have
/// zero mean (throws otherwise).
double homogeneous_sobolev_norm(const SpectralScalar& f, double s);

double l2_norm(const SpectralScalar& f);  // sobolev_norm(f, 0)
double l2_norm(const SpectralVec2& v);

/// Physical-space quadrature norm, p in [1, inf). Use lp_max for L^inf.
double lp_norm(const SpectralScalar& f, double p);
double lp_max(const SpectralScalar& f);

/// ||f||_{L^p} / (||f||_{L^2}^{1-lam} ||grad f||_{L^2}^{lam}),
/// lam = (p-2)/p in dimension 2. Throws NumericError for (near-)constant f.
double gagliardo_nirenberg_check(const SpectralScalar& f, double p);

}  // namespace rotlim
