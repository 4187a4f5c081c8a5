#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace rotlim {

using Complex = std::complex<double>;

// Exit-code categories used by the CLI (see tools/rotlim.cpp).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Square periodic grid [0, length)^2 with n points per dimension.
/// Frequencies are integers scaled by 2*pi/length; with the default
/// length = 2*pi the wavenumbers are plain integers in {-n/2+1, ..., n/2}.
struct GridSpec {
    int n = 0;
    double length = 6.283185307179586476925286766559;

    GridSpec() = default;
    GridSpec(int n_, double length_ = 6.283185307179586476925286766559);

    bool operator==(const GridSpec&) const = default;

    std::size_t size() const { return static_cast<std::size_t>(n) * n; }
    double cell_area() const { return (length / n) * (length / n); }
    double freq_scale() const;  // 2*pi/length

    // Signed integer frequency for storage index i in [0, n):
    // 0, 1, ..., n/2, -n/2+1, ..., -1.
    int signed_index(int i) const { return i <= n / 2 ? i : i - n; }
};

/// Real scalar field on the torus stored as Fourier coefficients,
/// f(x) = sum_k c_k exp(i k.x), row-major with k2 fastest
/// (index = i1 * n + i2, each i in FFT wraparound order).
struct SpectralScalar {
    GridSpec grid;
    std::vector<Complex> coeffs;

    SpectralScalar() = default;
    explicit SpectralScalar(const GridSpec& g) : grid(g), coeffs(g.size(), Complex{0.0, 0.0}) {}

    Complex& at(int k1, int k2);
    Complex at(int k1, int k2) const;

    int kmax() const { return grid.n / 2; }
};

struct SpectralVec2 {
    SpectralScalar x;  // first component
    SpectralScalar y;  // second component

    SpectralVec2() = default;
    explicit SpectralVec2(const GridSpec& g) : x(g), y(g) {}

    const GridSpec& grid() const { return x.grid; }
};

/// Physical samples f(x_j) on the n-by-n grid, row major (x2 fastest).
std::vector<double> transform(const SpectralScalar& f);
SpectralScalar inverse_transform(const GridSpec& g, const std::vector<double>& samples);

/// Unnormalized complex FFTs used internally; exposed for the dealiasing
/// oracle in the tests.
std::vector<Complex> fft_forward(const GridSpec& g, const std::vector<Complex>& phys);
std::vector<Complex> fft_backward(const GridSpec& g, const std::vector<Complex>& coeffs);

/// Max |c_{-k} - conj(c_k)| over the grid; 0 for a real-valued field.
double hermitian_defect(const SpectralScalar& f);

/// Forces exact Hermitian symmetry by averaging paired coefficients.
void symmetrize(SpectralScalar& f);

}  // namespace rotlim
