#include "rotlim/mat3.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace rotlim {

Mat3c Mat3c::identity() {
    Mat3c m;
    m(0, 0) = m(1, 1) = m(2, 2) = Complex{1.0, 0.0};
    return m;
}

Mat3c operator+(const Mat3c& x, const Mat3c& y) {
    Mat3c r;
    for (std::size_t i = 0; i < 9; ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
}

Mat3c operator-(const Mat3c& x, const Mat3c& y) {
    Mat3c r;
    for (std::size_t i = 0; i < 9; ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
}

Mat3c operator*(const Mat3c& x, const Mat3c& y) {
    Mat3c r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Complex s{0.0, 0.0};
            for (int k = 0; k < 3; ++k) s += x(i, k) * y(k, j);
            r(i, j) = s;
        }
    return r;
}

Mat3c operator*(double s, const Mat3c& x) {
    Mat3c r;
    for (std::size_t i = 0; i < 9; ++i) r.a[i] = s * x.a[i];
    return r;
}

Vec3c apply(const Mat3c& m, const Vec3c& v) {
    Vec3c r;
    for (int i = 0; i < 3; ++i) {
        Complex s{0.0, 0.0};
        for (int k = 0; k < 3; ++k) s += m(i, k) * v[static_cast<std::size_t>(k)];
        r[static_cast<std::size_t>(i)] = s;
    }
    return r;
}

double norm1(const Mat3c& m) {
    double worst = 0.0;
    for (int j = 0; j < 3; ++j) {
        double col = 0.0;
        for (int i = 0; i < 3; ++i) col += std::abs(m(i, j));
        worst = std::max(worst, col);
    }
    return worst;
}

namespace {

// Solve M X = B with partial pivoting (3x3 complex).
Mat3c solve3(Mat3c m, Mat3c b) {
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int i = col + 1; i < 3; ++i)
            if (std::abs(m(i, col)) > std::abs(m(piv, col))) piv = i;
        if (std::abs(m(piv, col)) == 0.0) throw NumericError("expm3: singular Pade denominator");
        if (piv != col)
            for (int j = 0; j < 3; ++j) {
                std::swap(m(col, j), m(piv, j));
                std::swap(b(col, j), b(piv, j));
            }
        for (int i = col + 1; i < 3; ++i) {
            const Complex f = m(i, col) / m(col, col);
            for (int j = col; j < 3; ++j) m(i, j) -= f * m(col, j);
            for (int j = 0; j < 3; ++j) b(i, j) -= f * b(col, j);
        }
    }
    for (int col = 2; col >= 0; --col) {
        for (int j = 0; j < 3; ++j) {
            Complex s = b(col, j);
            for (int k = col + 1; k < 3; ++k) s -= m(col, k) * b(k, j);
            b(col, j) = s / m(col, col);
        }
    }
    return b;
}

using LC = std::complex<long double>;

// Complex arithmetic in the widest hardware-supported precision; only
// field operations are used, so no quad math library is required.
#if defined(__SIZEOF_FLOAT128__)
using QF = __float128;
#else
using QF = long double;
#endif

struct QC {
    QF re{}, im{};
};

QC qc(long double r, long double i = 0.0L) { return QC{static_cast<QF>(r), static_cast<QF>(i)}; }
QC qc(const LC& z) { return qc(z.real(), z.imag()); }
LC ld(const QC& z) {
    return LC{static_cast<long double>(z.re), static_cast<long double>(z.im)};
}
QC operator+(const QC& a, const QC& b) { return {a.re + b.re, a.im + b.im}; }
QC operator-(const QC& a, const QC& b) { return {a.re - b.re, a.im - b.im}; }
QC operator*(const QC& a, const QC& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
QC operator/(const QC& a, const QC& b) {
    const QF d = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
QC& operator+=(QC& a, const QC& b) { return a = a + b; }
QF nrm2(const QC& a) { return a.re * a.re + a.im * a.im; }

QF qsqrt(QF x) {
    if (!(x > 0)) return 0;
    QF s = static_cast<QF>(std::sqrt(static_cast<long double>(x)));
    s = (s + x / s) / 2;  // two Newton steps lift the seed to full precision
    s = (s + x / s) / 2;
    return s;
}

QC csqrt(const QC& z) {
    const QF m = qsqrt(z.re * z.re + z.im * z.im);
    if (!(m > 0)) return QC{};
    if (z.re >= 0) {
        const QF w = qsqrt((m + z.re) / 2);
        return {w, z.im / (2 * w)};
    }
    QF w = qsqrt((m - z.re) / 2);
    if (z.im < 0) w = -w;
    return {z.im / (2 * w), w};
}

// Eigendecomposition path for very stiff matrices, where repeated
// squaring would amplify roundoff. Returns false if the spectrum is too
// clustered to be reliable (caller falls back to Pade).
bool expm3_eigen(const Mat3c& A, Mat3c& out) {
    // characteristic polynomial lambda^3 - c2 lambda^2 + c1 lambda - c0
    // in quad precision (products of doubles are exact there)
    std::array<QC, 9> B;
    for (std::size_t i = 0; i < 9; ++i)
        B[i] = qc(static_cast<long double>(A.a[i].real()),
                  static_cast<long double>(A.a[i].imag()));
    const QC c2 = B[0] + B[4] + B[8];
    const QC c1 = B[0] * B[4] - B[1] * B[3] + B[0] * B[8] - B[2] * B[6] + B[4] * B[8] -
                  B[5] * B[7];
    const QC c0 = B[0] * (B[4] * B[8] - B[5] * B[7]) - B[1] * (B[3] * B[8] - B[5] * B[6]) +
                  B[2] * (B[3] * B[7] - B[4] * B[6]);

    auto newton = [&](QC l, int iters) {
        for (int it = 0; it < iters; ++it) {
            const QC f = ((l - c2) * l + c1) * l - c0;
            const QC df = (qc(3.0L) * l - qc(2.0L) * c2) * l + c1;
            if (!(nrm2(df) > 0)) break;
            const QC step = f / df;
            l = l - step;
            if (nrm2(step) <= static_cast<QF>(1e-66L) * nrm2(l)) break;
        }
        return l;
    };

    // dominant root from the trace (the caller only reaches this path for
    // very stiff operators, whose trace is dominated by the fast mode),
    // then deflation to an explicitly solved quadratic for the slow pair
    const QC l1 = newton(c2, 100);
    if (!(nrm2(l1) > 0)) return false;
    const QC ssum = c2 - l1;        // lambda2 + lambda3
    const QC sprod = c0 / l1;       // lambda2 * lambda3
    QC sq = csqrt(ssum * ssum - qc(4.0L) * sprod);
    if (nrm2(ssum + sq) < nrm2(ssum - sq)) sq = QC{} - sq;
    const QC l2 = (ssum + sq) / qc(2.0L);
    const QC l3 = nrm2(l2) > 0 ? sprod / l2 : QC{};

    std::array<QC, 3> lam{l1, newton(l2, 4), newton(l3, 4)};
    QF scale2 = 0;
    for (const QC& l : lam) scale2 = std::max(scale2, nrm2(l));
    if (!(scale2 > 0)) return false;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (nrm2(lam[static_cast<std::size_t>(i)] - lam[static_cast<std::size_t>(j)]) <
                static_cast<QF>(1e-48L) * scale2)
                return false;  // (near-)defective spectrum: let Pade handle it

    // eigenvectors from cross products of rows of (A - lambda I)
    std::array<QC, 9> V;
    for (int r = 0; r < 3; ++r) {
        std::array<QC, 9> C = B;
        for (int i = 0; i < 3; ++i)
            C[static_cast<std::size_t>(3 * i + i)] =
                C[static_cast<std::size_t>(3 * i + i)] - lam[static_cast<std::size_t>(r)];
        auto e = [&](int i, int j) { return C[static_cast<std::size_t>(3 * i + j)]; };
        std::array<QC, 3> best{};
        QF best_n = -1;
        for (int a = 0; a < 3; ++a) {
            const int b = (a + 1) % 3;
            const std::array<QC, 3> v{e(a, 1) * e(b, 2) - e(a, 2) * e(b, 1),
                                      e(a, 2) * e(b, 0) - e(a, 0) * e(b, 2),
                                      e(a, 0) * e(b, 1) - e(a, 1) * e(b, 0)};
            const QF nn = nrm2(v[0]) + nrm2(v[1]) + nrm2(v[2]);
            if (nn > best_n) {
                best_n = nn;
                best = v;
            }
        }
        if (!(best_n > 0)) return false;
        // approximate normalization (a real scale does not move the direction)
        const QC s = qc(1.0L / std::sqrt(static_cast<long double>(best_n)));
        for (int i = 0; i < 3; ++i)
            V[static_cast<std::size_t>(3 * i + r)] = best[static_cast<std::size_t>(i)] * s;
    }

    // E = V diag(exp(lam)) V^{-1} via the adjugate inverse
    const QC detV = V[0] * (V[4] * V[8] - V[5] * V[7]) -
                    V[1] * (V[3] * V[8] - V[5] * V[6]) +
                    V[2] * (V[3] * V[7] - V[4] * V[6]);
    if (nrm2(detV) < static_cast<QF>(1e-20L)) return false;  // ill-conditioned eigenbasis
    std::array<QC, 9> inv;
    inv[0] = (V[4] * V[8] - V[5] * V[7]) / detV;
    inv[1] = (V[2] * V[7] - V[1] * V[8]) / detV;
    inv[2] = (V[1] * V[5] - V[2] * V[4]) / detV;
    inv[3] = (V[5] * V[6] - V[3] * V[8]) / detV;
    inv[4] = (V[0] * V[8] - V[2] * V[6]) / detV;
    inv[5] = (V[2] * V[3] - V[0] * V[5]) / detV;
    inv[6] = (V[3] * V[7] - V[4] * V[6]) / detV;
    inv[7] = (V[1] * V[6] - V[0] * V[7]) / detV;
    inv[8] = (V[0] * V[4] - V[1] * V[3]) / detV;

    std::array<QC, 3> el;
    for (int r = 0; r < 3; ++r) {
        const LC l = ld(lam[static_cast<std::size_t>(r)]);
        el[static_cast<std::size_t>(r)] =
            l.real() < -11350.0L ? QC{} : qc(std::exp(l));  // heavy decay underflows to 0
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            QC s{};
            for (int r = 0; r < 3; ++r)
                s += V[static_cast<std::size_t>(3 * i + r)] * el[static_cast<std::size_t>(r)] *
                     inv[static_cast<std::size_t>(3 * r + j)];
            const LC z = ld(s);
            out(i, j) = Complex(static_cast<double>(z.real()), static_cast<double>(z.imag()));
        }
    return true;
}

}  // namespace

Mat3c expm3(const Mat3c& L, double dt) {
    if (!(dt > 0.0)) throw ConfigError("expm3: dt must be positive");
    Mat3c A = dt * L;
    for (const Complex& c : A.a)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw NumericError("expm3: non-finite matrix entry");

    // Higham's Pade(13) coefficients and scaling threshold
    static constexpr double b[14] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
        1323241920.0,        40840800.0,          960960.0,           16380.0,
        182.0,               1.0};
    static constexpr double theta13 = 5.371920351148152;

    int squarings = 0;
    const double nrm = norm1(A);
    if (nrm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
        // Each squaring can amplify roundoff; for very stiff operators
        // prefer a spectral decomposition when the spectrum allows it.
        if (squarings > 10) {
            Mat3c E;
            if (expm3_eigen(A, E)) return E;
        }
        A = std::ldexp(1.0, -squarings) * A;
    }

    const Mat3c I = Mat3c::identity();
    const Mat3c A2 = A * A;
    const Mat3c A4 = A2 * A2;
    const Mat3c A6 = A4 * A2;

    const Mat3c U =
        A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 +
             b[1] * I);
    const Mat3c V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 +
                    b[2] * A2 + b[0] * I;

    Mat3c R = solve3(V - U, V + U);
    for (int i = 0; i < squarings; ++i) R = R * R;
    return R;
}

}  // namespace rotlim
