#pragma once

#include <array>

#include "rotlim/grid.hpp"

namespace rotlim {

/// Dense complex 3x3 matrix, row-major.
struct Mat3c {
    std::array<Complex, 9> a{};

    static Mat3c identity();

    Complex& operator()(int i, int j) { return a[static_cast<std::size_t>(3 * i + j)]; }
    const Complex& operator()(int i, int j) const {
        return a[static_cast<std::size_t>(3 * i + j)];
    }
};

Mat3c operator+(const Mat3c& x, const Mat3c& y);
Mat3c operator-(const Mat3c& x, const Mat3c& y);
Mat3c operator*(const Mat3c& x, const Mat3c& y);
Mat3c operator*(double s, const Mat3c& x);

using Vec3c = std::array<Complex, 3>;
Vec3c apply(const Mat3c& m, const Vec3c& v);

/// Maximum absolute column sum.
double norm1(const Mat3c& m);

/// exp(dt * L) by Pade(13) scaling-and-squaring; rejects non-finite input.
Mat3c expm3(const Mat3c& L, double dt);

}  // namespace rotlim
