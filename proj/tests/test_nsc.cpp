#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "rotlim/grid.hpp"
#include "rotlim/mat3.hpp"
#include "rotlim/norms.hpp"
#include "rotlim/nsc.hpp"
#include "rotlim/operators.hpp"
#include "test_util.hpp"

using namespace rotlim;
using namespace rotlim::testutil;

namespace {

// Independent oracle: Taylor series with repeated squaring, carried out
// in quad precision so that squaring-error amplification on very stiff
// samples stays far below the tolerance under test.
#if defined(__SIZEOF_FLOAT128__)
using OF = __float128;
#else
using OF = long double;
#endif

struct OC {
    OF re{}, im{};
};
OC operator+(const OC& a, const OC& b) { return {a.re + b.re, a.im + b.im}; }
OC operator-(const OC& a, const OC& b) { return {a.re - b.re, a.im - b.im}; }
OC operator*(const OC& a, const OC& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
OC operator/(const OC& a, const OC& b) {
    const OF d = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
OC& operator+=(OC& a, const OC& b) { return a = a + b; }
OC& operator-=(OC& a, const OC& b) { return a = a - b; }
OF onrm2(const OC& a) { return a.re * a.re + a.im * a.im; }

Mat3c expm_taylor_oracle(const Mat3c& L, double dt) {
    std::array<OC, 9> A;
    OF nrm2 = 0;
    for (std::size_t i = 0; i < 9; ++i) {
        A[i] = OC{static_cast<OF>(L.a[i].real()) * static_cast<OF>(dt),
                  static_cast<OF>(L.a[i].imag()) * static_cast<OF>(dt)};
        nrm2 = std::max(nrm2, A[i].re * A[i].re + A[i].im * A[i].im);
    }
    int k = 0;
    const OF cap2 = static_cast<OF>(1.0L / 4096.0L);  // (1/64)^2
    while (nrm2 > cap2) {
        for (auto& c : A) {
            c.re *= static_cast<OF>(0.5L);
            c.im *= static_cast<OF>(0.5L);
        }
        nrm2 *= static_cast<OF>(0.25L);
        ++k;
    }
    auto mul = [](const std::array<OC, 9>& x, const std::array<OC, 9>& y) {
        std::array<OC, 9> r{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int l = 0; l < 3; ++l) r[3 * i + j] += x[3 * i + l] * y[3 * l + j];
        return r;
    };
    std::array<OC, 9> R{}, term{};
    for (int i = 0; i < 3; ++i) R[3 * i + i] = term[3 * i + i] = OC{1, 0};
    for (int m = 1; m <= 40; ++m) {
        term = mul(term, A);
        const OF inv = static_cast<OF>(1.0L) / static_cast<OF>(m);
        for (auto& c : term) {
            c.re *= inv;
            c.im *= inv;
        }
        for (std::size_t i = 0; i < 9; ++i) R[i] += term[i];
    }
    for (int i = 0; i < k; ++i) R = mul(R, R);
    Mat3c out;
    for (std::size_t i = 0; i < 9; ++i)
        out.a[i] = Complex(static_cast<double>(static_cast<long double>(R[i].re)),
                           static_cast<double>(static_cast<long double>(R[i].im)));
    return out;
}

// Second oracle for very stiff samples, where repeated squaring loses
// accuracy even in quad precision: Durand-Kerner roots of the
// characteristic polynomial, LU null-space eigenvectors, and a Gauss
// inverse of the eigenbasis.
Mat3c expm_spectral_oracle(const Mat3c& L, double dt) {
    std::array<OC, 9> A;
    for (std::size_t i = 0; i < 9; ++i)
        A[i] = OC{static_cast<OF>(L.a[i].real()) * static_cast<OF>(dt),
                  static_cast<OF>(L.a[i].imag()) * static_cast<OF>(dt)};
    auto at = [&](int i, int j) { return A[static_cast<std::size_t>(3 * i + j)]; };
    const OC c2 = at(0, 0) + at(1, 1) + at(2, 2);
    const OC c1 = at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0) + at(0, 0) * at(2, 2) -
                  at(0, 2) * at(2, 0) + at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1);
    const OC c0 = at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
                  at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
                  at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
    auto poly = [&](const OC& z) { return ((z - c2) * z + c1) * z - c0; };

    // Durand-Kerner from a circle whose radius bounds the spectrum
    long double radius = 1.0L;
    for (const OC& c : {c2, c1, c0})
        radius = std::max(radius, static_cast<long double>(
                                      std::sqrt(static_cast<long double>(onrm2(c)))));
    std::array<OC, 3> z;
    for (int i = 0; i < 3; ++i) {
        const long double ang = 0.7L + 2.0L * 3.14159265358979323846L * i / 3.0L;
        z[static_cast<std::size_t>(i)] =
            OC{static_cast<OF>(radius * std::cos(ang)), static_cast<OF>(radius * std::sin(ang))};
    }
    for (int it = 0; it < 2000; ++it) {
        OF worst = 0;
        for (int i = 0; i < 3; ++i) {
            OC den{1, 0};
            for (int j = 0; j < 3; ++j)
                if (j != i)
                    den = den * (z[static_cast<std::size_t>(i)] - z[static_cast<std::size_t>(j)]);
            const OC step = poly(z[static_cast<std::size_t>(i)]) / den;
            z[static_cast<std::size_t>(i)] -= step;
            const OF rel = onrm2(step) /
                           std::max(onrm2(z[static_cast<std::size_t>(i)]), static_cast<OF>(1e-300L));
            worst = std::max(worst, rel);
        }
        if (worst <= static_cast<OF>(1e-66L)) break;
    }

    // eigenvectors: null space of (A - z I) via full-pivot elimination
    std::array<OC, 9> V;
    for (int r = 0; r < 3; ++r) {
        std::array<OC, 9> C = A;
        for (int i = 0; i < 3; ++i)
            C[static_cast<std::size_t>(3 * i + i)] -= z[static_cast<std::size_t>(r)];
        std::array<int, 3> colp{0, 1, 2};
        std::array<OC, 3> v{};
        for (int stepi = 0; stepi < 2; ++stepi) {
            int pi = stepi, pj = stepi;
            OF pv = -1;
            for (int i = stepi; i < 3; ++i)
                for (int j = stepi; j < 3; ++j)
                    if (onrm2(C[static_cast<std::size_t>(3 * i + j)]) > pv) {
                        pv = onrm2(C[static_cast<std::size_t>(3 * i + j)]);
                        pi = i;
                        pj = j;
                    }
            for (int j = 0; j < 3; ++j)
                std::swap(C[static_cast<std::size_t>(3 * stepi + j)],
                          C[static_cast<std::size_t>(3 * pi + j)]);
            for (int i = 0; i < 3; ++i)
                std::swap(C[static_cast<std::size_t>(3 * i + stepi)],
                          C[static_cast<std::size_t>(3 * i + pj)]);
            std::swap(colp[static_cast<std::size_t>(stepi)], colp[static_cast<std::size_t>(pj)]);
            for (int i = stepi + 1; i < 3; ++i) {
                const OC f = C[static_cast<std::size_t>(3 * i + stepi)] /
                             C[static_cast<std::size_t>(3 * stepi + stepi)];
                for (int j = stepi; j < 3; ++j)
                    C[static_cast<std::size_t>(3 * i + j)] -=
                        f * C[static_cast<std::size_t>(3 * stepi + j)];
            }
        }
        // free variable in permuted column 2
        std::array<OC, 3> w{};
        w[2] = OC{1, 0};
        w[1] = (OC{} - C[5] * w[2]) / C[4];
        w[0] = (OC{} - C[1] * w[1] - C[2] * w[2]) / C[0];
        for (int i = 0; i < 3; ++i) v[static_cast<std::size_t>(colp[static_cast<std::size_t>(i)])] = w[static_cast<std::size_t>(i)];
        for (int i = 0; i < 3; ++i) V[static_cast<std::size_t>(3 * i + r)] = v[static_cast<std::size_t>(i)];
    }

    // W = V^{-1} by Gauss-Jordan with partial pivoting
    std::array<OC, 9> M = V, W{};
    for (int i = 0; i < 3; ++i) W[static_cast<std::size_t>(3 * i + i)] = OC{1, 0};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int i = col + 1; i < 3; ++i)
            if (onrm2(M[static_cast<std::size_t>(3 * i + col)]) >
                onrm2(M[static_cast<std::size_t>(3 * piv + col)]))
                piv = i;
        for (int j = 0; j < 3; ++j) {
            std::swap(M[static_cast<std::size_t>(3 * col + j)], M[static_cast<std::size_t>(3 * piv + j)]);
            std::swap(W[static_cast<std::size_t>(3 * col + j)], W[static_cast<std::size_t>(3 * piv + j)]);
        }
        const OC d = M[static_cast<std::size_t>(3 * col + col)];
        for (int j = 0; j < 3; ++j) {
            M[static_cast<std::size_t>(3 * col + j)] = M[static_cast<std::size_t>(3 * col + j)] / d;
            W[static_cast<std::size_t>(3 * col + j)] = W[static_cast<std::size_t>(3 * col + j)] / d;
        }
        for (int i = 0; i < 3; ++i) {
            if (i == col) continue;
            const OC f = M[static_cast<std::size_t>(3 * i + col)];
            for (int j = 0; j < 3; ++j) {
                M[static_cast<std::size_t>(3 * i + j)] -= f * M[static_cast<std::size_t>(3 * col + j)];
                W[static_cast<std::size_t>(3 * i + j)] -= f * W[static_cast<std::size_t>(3 * col + j)];
            }
        }
    }

    std::array<OC, 3> el;
    for (int r = 0; r < 3; ++r) {
        const std::complex<long double> l{static_cast<long double>(z[static_cast<std::size_t>(r)].re),
                                          static_cast<long double>(z[static_cast<std::size_t>(r)].im)};
        if (l.real() < -11350.0L) {
            el[static_cast<std::size_t>(r)] = OC{};
        } else {
            const auto e = std::exp(l);
            el[static_cast<std::size_t>(r)] = OC{static_cast<OF>(e.real()), static_cast<OF>(e.imag())};
        }
    }
    Mat3c out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            OC s{};
            for (int r = 0; r < 3; ++r)
                s += V[static_cast<std::size_t>(3 * i + r)] * el[static_cast<std::size_t>(r)] *
                     W[static_cast<std::size_t>(3 * r + j)];
            out(i, j) = Complex(static_cast<double>(static_cast<long double>(s.re)),
                                static_cast<double>(static_cast<long double>(s.im)));
        }
    return out;
}

double mat_diff(const Mat3c& x, const Mat3c& y) {
    double m = 0.0;
    for (std::size_t i = 0; i < 9; ++i) m = std::max(m, std::abs(x.a[i] - y.a[i]));
    return m;
}

}  // namespace

TEST_CASE("expm3 basics") {
    Mat3c zero;
    CHECK(mat_diff(expm3(zero, 1.0), Mat3c::identity()) == 0.0);

    // diagonal decay
    Mat3c d;
    d(0, 0) = Complex{-2.0, 0.0};
    d(1, 1) = Complex{-0.5, 0.0};
    d(2, 2) = Complex{-100.0, 0.0};
    Mat3c e = expm3(d, 0.3);
    CHECK(std::abs(e(0, 0) - std::exp(-0.6)) < 1e-14);
    CHECK(std::abs(e(1, 1) - std::exp(-0.15)) < 1e-14);
    CHECK(std::abs(e(2, 2) - std::exp(-30.0)) < 1e-14);
    CHECK(std::abs(e(0, 1)) == 0.0);

    CHECK_THROWS_AS(expm3(zero, 0.0), ConfigError);
    Mat3c bad;
    bad(1, 1) = Complex{std::nan(""), 0.0};
    CHECK_THROWS_AS(expm3(bad, 1.0), NumericError);
}

TEST_CASE("expm3 rotation block") {
    const double inv_eps = 10.0;
    Mat3c L;
    L(1, 2) = Complex{inv_eps, 0.0};
    L(2, 1) = Complex{-inv_eps, 0.0};
    const double dt = 0.37;
    Mat3c e = expm3(L, dt);
    const double ang = dt * inv_eps;
    CHECK(std::abs(e(0, 0) - 1.0) == 0.0);
    CHECK(std::abs(e(1, 1) - std::cos(ang)) < 1e-13);
    CHECK(std::abs(e(2, 2) - std::cos(ang)) < 1e-13);
    CHECK(std::abs(e(1, 2) - std::sin(ang)) < 1e-13);
    CHECK(std::abs(e(2, 1) + std::sin(ang)) < 1e-13);
    // orthogonality of the 2x2 block
    CHECK(std::abs(e(1, 1) * e(1, 1) + e(2, 1) * e(2, 1) - 1.0) < 1e-13);
}

TEST_CASE("expm3 against a high-precision oracle on stiff flow operators") {
    FlowParams p;
    p.beta = 2.0;
    p.mu = 0.05;
    for (double eps : {0.25, 1.0 / 16.0, 1.0 / 256.0}) {
        p.eps = eps;
        for (auto [k1, k2] : {std::pair{1.0, 0.0}, {3.0, -2.0}, {7.0, 5.0}}) {
            // prescale so that implementation and oracle exponentiate the
            // bit-identical matrix (the slow spectrum of a stiff operator
            // is sensitive to rounding in the scaling product itself)
            const Mat3c A = 0.01 * linear_operator(k1, k2, p);
            const Mat3c got = expm3(A, 1.0);
            // Taylor-plus-squaring is itself accurate only up to moderate
            // stiffness; beyond that the spectral oracle takes over.
            const Mat3c want =
                norm1(A) <= 1e3 ? expm_taylor_oracle(A, 1.0) : expm_spectral_oracle(A, 1.0);
            double scale = std::max(1.0, norm1(want));
            CHECK(mat_diff(got, want) / scale < 1e-11);
        }
    }
}

TEST_CASE("pressure closures") {
    FlowParams p;  // a = 1, gamma = 2
    CHECK(p.relative_entropy(1.0) == 0.0);
    // minimum at rho = 1
    const double h = 1e-6;
    CHECK(std::abs(p.relative_entropy(1.0 + h) - p.relative_entropy(1.0 - h)) < 1e-11);
    CHECK(p.relative_entropy(2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.relative_entropy(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.pi_remainder(1.0) == 0.0);
    for (double rho : {0.3, 0.9, 1.7}) {
        CHECK(p.pi_remainder(rho) ==
              doctest::Approx((rho - 1.0) * (rho - 1.0)).epsilon(1e-12));
        CHECK(p.internal_energy(rho) ==
              doctest::Approx(rho * rho - rho).epsilon(1e-12));
    }
    CHECK_THROWS_AS(p.pressure(-0.1), ConfigError);

    FlowParams q;
    q.gamma = 1.4;
    q.a = 2.0;
    for (double rho : {1.0 + 1e-4, 1.0 - 1e-4}) {
        const double curvature = q.pi_remainder(rho) / ((rho - 1.0) * (rho - 1.0));
        CHECK(curvature ==
              doctest::Approx(q.a * q.gamma * (q.gamma - 1.0) / 2.0).epsilon(1e-3));
    }
}

TEST_CASE("linear operator structure") {
    FlowParams p;
    p.eps = 0.2;

    SUBCASE("k = 0: pure Coriolis rotation of the mean momentum") {
        const Mat3c e = expm3(linear_operator(0.0, 0.0, p), 0.5);
        const double ang = -0.5 / p.eps;  // dm/dt = -eps^{-1} J m
        CHECK(std::abs(e(0, 0) - 1.0) == 0.0);
        CHECK(std::abs(e(0, 1)) == 0.0);
        CHECK(std::abs(e(1, 0)) == 0.0);
        // rotation by ang: m1' = cos(ang) m1 - sin(ang) m2
        CHECK(std::abs(e(1, 1) - std::cos(ang)) < 1e-13);
        CHECK(std::abs(e(1, 2) + std::sin(ang)) < 1e-13);
    }

    SUBCASE("acoustic eigenvalues with rotation, shear and bulk disabled") {
        FlowParams q = p;
        q.coriolis_enabled = false;
        q.bulk_enabled = false;
        q.mu = 0.0;
        q.alpha = 0.5;
        const double k1 = 2.0, k2 = -1.0;
        const Mat3c L = linear_operator(k1, k2, q);
        // on the potential subspace (r, k m/|k|): frequency |k| sqrt(P'(1)) eps^{-alpha}
        const double kn = std::sqrt(k1 * k1 + k2 * k2);
        const double freq = kn * std::sqrt(q.dpressure(1.0)) * std::pow(q.eps, -q.alpha);
        // evolve (1, 0, 0): r(t) = cos(freq t)
        const Mat3c e = expm3(L, 0.3);
        CHECK(std::abs(e(0, 0) - std::cos(freq * 0.3)) < 1e-11);
    }
}

TEST_CASE("linear propagator conserves the weighted acoustic-Coriolis energy") {
    GridSpec g(16);
    FlowParams p;
    p.eps = 0.125;
    p.alpha = 0.5;
    p.mu = 0.0;
    p.bulk_enabled = false;
    const double c = p.dpressure(1.0) * std::pow(p.eps, -2.0 * p.alpha);

    SpectralScalar r = random_band_limited(g, 5, 71);
    SpectralVec2 m(g);
    m.x = random_band_limited(g, 5, 72, false);
    m.y = random_band_limited(g, 5, 73, false);
    const double e0 = c * std::pow(l2_norm(r), 2) + std::pow(l2_norm(m.x), 2) +
                      std::pow(l2_norm(m.y), 2);

    LinearPropagator prop(g, p, 0.05);
    for (int i = 0; i < 20; ++i) prop.apply(r, m);  // total time 1
    const double e1 = c * std::pow(l2_norm(r), 2) + std::pow(l2_norm(m.x), 2) +
                      std::pow(l2_norm(m.y), 2);
    CHECK(std::abs(e1 - e0) / e0 < 1e-11);
}

TEST_CASE("nonlinear rhs special cases") {
    GridSpec g(32);
    FlowParams p;

    SUBCASE("zero state") {
        FlowState s(g);
        SpectralVec2 dm = nonlinear_rhs(s, p);
        CHECK(l2_norm(dm.x) == 0.0);
        CHECK(l2_norm(dm.y) == 0.0);
    }

    SUBCASE("constant density shift") {
        FlowState s(g);
        s.r.at(0, 0) = Complex{0.3, 0.0};
        SpectralVec2 dm = nonlinear_rhs(s, p);
        CHECK(l2_norm(dm.x) < 1e-13);
        CHECK(l2_norm(dm.y) < 1e-13);
    }

    SUBCASE("divergence-free single-mode momentum: pure convection") {
        FlowState s(g);
        s.m = perp_grad(single_mode_sin(g, 1, 1));
        SpectralVec2 dm = nonlinear_rhs(s, p);
        // r = 0 so u = m: compare with the direct dealiased product oracle
        SpectralVec2 row1(g), row2(g);
        row1.x = multiply(s.m.x, s.m.x);
        row1.y = multiply(s.m.x, s.m.y);
        row2.x = multiply(s.m.y, s.m.x);
        row2.y = multiply(s.m.y, s.m.y);
        CHECK(max_coeff_diff(dm.x, scale(div(row1), -1.0)) < 1e-13);
        CHECK(max_coeff_diff(dm.y, scale(div(row2), -1.0)) < 1e-13);
    }

    SUBCASE("vacuum detection") {
        FlowState s(g);
        s.r.at(0, 0) = Complex{-1.5, 0.0};
        CHECK_THROWS_AS(nonlinear_rhs(s, p), NumericError);
    }
}

TEST_CASE("step: zero state is a fixed point and tiny data follows the linear flow") {
    GridSpec g(16);
    FlowParams p;
    p.eps = 0.25;

    FlowState z(g);
    FlowState z1 = step(z, 0.1, p);
    CHECK(l2_norm(z1.r) == 0.0);
    CHECK(l2_norm(z1.m.x) == 0.0);

    // amplitude 1e-8: nonlinearity is negligible, the scheme must match
    // direct expm3 propagation over t = 1
    const double amp = 1e-8;
    FlowState s(g);
    s.r = random_band_limited(g, 3, 5);
    s.m.x = random_band_limited(g, 3, 6, false);
    s.m.y = random_band_limited(g, 3, 7, false);
    for (auto* f : {&s.r, &s.m.x, &s.m.y})
        for (auto& c : f->coeffs) c *= amp;

    FlowState lin = s;
    LinearPropagator whole(g, p, 1.0);
    whole.apply(lin.r, lin.m);

    LinearPropagator prop(g, p, 0.01);
    FlowState num = s;
    for (int i = 0; i < 100; ++i) num = step(num, p, prop);

    CHECK(l2_norm(sub(num.r, lin.r)) < 1e-10);
    CHECK(l2_norm(sub(num.m.x, lin.m.x)) < 1e-10);
    CHECK(l2_norm(sub(num.m.y, lin.m.y)) < 1e-10);
}

TEST_CASE("step: CFL guard") {
    GridSpec g(16);
    FlowParams p;
    FlowState s(g);
    s.m.x = single_mode_cos(g, 1, 0, 5.0);  // |u| ~ 5
    CHECK_THROWS_AS(step(s, 0.5, p), ConfigError);
}

TEST_CASE("dt-halving order study on a smooth nonlinear run") {
    GridSpec g(32);
    FlowParams p;
    p.eps = 0.5;
    InitialData init = ill_prepared_data(g, 3, 0.2);
    const double T = 0.25;

    auto final_state = [&](double dt) {
        return simulate(init.r0, init.u0, p, T, dt, 1 << 20).frames.back();
    };
    FlowState a = final_state(T / 80);
    FlowState b = final_state(T / 160);
    FlowState c = final_state(T / 320);
    auto dist = [](const FlowState& x, const FlowState& y) {
        return std::sqrt(std::pow(l2_norm(sub(x.m.x, y.m.x)), 2) +
                         std::pow(l2_norm(sub(x.m.y, y.m.y)), 2) +
                         std::pow(l2_norm(sub(x.r, y.r)), 2));
    };
    const double order = std::log2(dist(a, b) / dist(b, c));
    CHECK(order > 1.9);
    CHECK(order < 2.3);
}

TEST_CASE("simulate: diagnostics and conservation") {
    GridSpec g(32);
    FlowParams p;
    p.eps = 0.25;
    // well-prepared data: zero density shift and solenoidal velocity, so
    // the run is fully resolved at this dt and the energy inequality
    // holds at the 1e-6 level (ill-prepared data has an initial acoustic
    // layer faster than any fixed step and is exercised elsewhere)
    InitialData init = ill_prepared_data(g, 11, 0.25);
    SimResult res =
        simulate(SpectralScalar(g), leray_project(init.u0).div_free, p, 0.5, 1e-3, 50);

    REQUIRE(res.frames.size() == 11);
    const Complex mass0 = res.frames.front().r.coeffs[0];
    for (const auto& f : res.frames) CHECK(std::abs(f.r.coeffs[0] - mass0) < 1e-13);

    const double e0 = res.diags.front().energy;
    for (const auto& d : res.diags) {
        CHECK(d.energy + d.dissipation <= e0 * (1.0 + 1e-6));
        CHECK(d.min_rho > 0.5);
        CHECK(std::isfinite(d.div_norm));
        CHECK(std::isfinite(d.sigma_neg_norm));
        CHECK(std::isfinite(d.eta));
        CHECK(d.ess_res == 0.0);  // density stays in [1/2, 2]
    }
    // interior frames carry a wave residual
    CHECK(res.diags[1].wave_residual > 0.0);
    // time axis
    CHECK(res.diags.back().t == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("simulate: zero data stays zero") {
    GridSpec g(16);
    FlowParams p;
    SimResult res = simulate(SpectralScalar(g), SpectralVec2(g), p, 0.1, 0.01, 5);
    for (const auto& f : res.frames) {
        CHECK(l2_norm(f.r) == 0.0);
        CHECK(l2_norm(f.m.x) == 0.0);
    }
    for (const auto& d : res.diags) CHECK(d.energy == 0.0);
}

TEST_CASE("ill prepared data") {
    GridSpec g(32);
    CHECK_THROWS_AS(ill_prepared_data(g, 1, 0.6), ConfigError);

    InitialData zero = ill_prepared_data(g, 1, 0.0);
    CHECK(l2_norm(zero.r0) == 0.0);

    InitialData a = ill_prepared_data(g, 7, 0.3);
    InitialData b = ill_prepared_data(g, 7, 0.3);
    CHECK(max_coeff_diff(a.r0, b.r0) == 0.0);
    CHECK(max_coeff_diff(a.u0.x, b.u0.x) == 0.0);

    CHECK(lp_max(a.r0) == doctest::Approx(0.3).epsilon(1e-12));
    // min rho = 1 - ||r0||_inf >= 0.5, verified pointwise
    double mn = 1e300;
    for (double v : transform(a.r0)) mn = std::min(mn, 1.0 + v);
    CHECK(mn >= 0.5);
    CHECK(l2_norm(div(a.u0)) > 0.01);
}

TEST_CASE("wave residual") {
    GridSpec g(32);
    FlowParams p;
    p.eps = 0.25;

    SUBCASE("window validation") {
        std::vector<FlowState> two(2, FlowState(g));
        CHECK_THROWS_AS(wave_residual(two, p, 0.1), ConfigError);
        std::vector<FlowState> three(3, FlowState(g));
        three[1].time = 0.1;
        three[2].time = 0.3;  // mismatched stride
        CHECK_THROWS_AS(wave_residual(three, p, 0.1), ConfigError);
    }

    SUBCASE("zero trajectory") {
        std::vector<FlowState> w(3, FlowState(g));
        w[1].time = 0.1;
        w[2].time = 0.2;
        CHECK(wave_residual(w, p, 0.1) == 0.0);
    }

    SUBCASE("linear regime: residual at data scale, converging at order 2") {
        InitialData init = ill_prepared_data(g, 5, 0.2);
        // scale to the linear regime
        for (auto* f : {&init.r0, &init.u0.x, &init.u0.y})
            for (auto& c : f->coeffs) c *= 5e-8;
        SimResult res = simulate(init.r0, init.u0, p, 0.2, 1e-3, 1);

        auto window_at = [&](std::size_t mid, std::size_t stride) {
            std::vector<FlowState> w{res.frames[mid - stride], res.frames[mid],
                                     res.frames[mid + stride]};
            return wave_residual(w, p, stride * 1e-3);
        };
        CHECK(window_at(100, 1) < 1e-8);

        // centered-difference error drops by ~4 when the stride halves
        const double coarse = window_at(100, 16);
        const double fine = window_at(100, 8);
        CHECK(coarse / fine >= 3.7);
    }
}

TEST_CASE("essential-residual split") {
    GridSpec g(32);
    FlowParams p;

    std::vector<double> flat(g.size(), 1.0);
    EssResSplit s0 = ess_res_split(flat, g, p.gamma);
    CHECK(s0.ess_l2 == 0.0);
    CHECK(s0.res_lgamma == 0.0);
    CHECK(s0.res_measure == 0.0);

    SpectralScalar f = single_mode_cos(g, 1, 0, 0.4);
    std::vector<double> rho = transform(f);
    for (double& v : rho) v += 1.0;
    EssResSplit s1 = ess_res_split(rho, g, p.gamma);
    CHECK(s1.res_measure == 0.0);
    CHECK(s1.ess_l2 == doctest::Approx(0.4 * std::sqrt(2.0) * 3.14159265358979324).epsilon(1e-12));

    std::vector<double> spike(g.size(), 1.0);
    spike[17] = 3.0;
    EssResSplit s2 = ess_res_split(spike, g, 1.8);
    CHECK(s2.res_measure == doctest::Approx(g.cell_area()).epsilon(1e-14));
    CHECK(s2.res_lgamma == doctest::Approx(std::pow(3.0, 1.8) * g.cell_area()).epsilon(1e-13));
}

TEST_CASE("sigma diagnostics") {
    GridSpec g(32);
    FlowParams p;
    p.eps = 0.125;
    FlowState s(g);
    CHECK(sigma_diagnostics(s, p, 3.0) == 0.0);
    CHECK_THROWS_AS(sigma_diagnostics(s, p, 2.0), ConfigError);

    s.r = single_mode_cos(g, 1, 0, p.eps);
    const double want = std::pow(2.0, -1.5) * std::sqrt(2.0) * 3.14159265358979324;
    CHECK(sigma_diagnostics(s, p, 3.0) == doctest::Approx(want).epsilon(1e-12));
}
