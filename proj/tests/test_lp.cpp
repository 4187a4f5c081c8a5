#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "rotlim/grid.hpp"
#include "rotlim/lp.hpp"
#include "rotlim/norms.hpp"
#include "rotlim/operators.hpp"
#include "test_util.hpp"

using namespace rotlim;
using namespace rotlim::testutil;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846264338327950288;
}  // namespace

TEST_CASE("partition construction and profiles") {
    CHECK_THROWS_AS(DyadicPartition(0.9, 1.9), ConfigError);
    CHECK_THROWS_AS(DyadicPartition(1.5, 1.2), ConfigError);
    CHECK_THROWS_AS(DyadicPartition(1.1, 2.5), ConfigError);

    DyadicPartition part;
    CHECK(part.chi(0.0) == 1.0);
    CHECK(part.chi(1.0) == 1.0);
    CHECK(part.chi(1.1) == 1.0);
    CHECK(part.chi(1.9) == 0.0);
    CHECK(part.chi(3.0) == 0.0);
    CHECK(part.chi(1.5) > 0.0);
    CHECK(part.chi(1.5) < 1.0);
    // monotone in the transition band
    double prev = 1.0;
    for (int i = 0; i <= 100; ++i) {
        const double v = part.chi(1.1 + 0.8 * i / 100.0);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
    // phi(2) = chi(1) - chi(2) = 1
    CHECK(part.phi(2.0) == 1.0);
    CHECK(part.phi(1.0) == 0.0);
    CHECK(part.phi(4.0) == 0.0);
}

TEST_CASE("partition of unity at every grid frequency") {
    DyadicPartition part;
    GridSpec g(64);
    const int jmax = part.max_block_index(g);
    const double fs = g.freq_scale();
    for (int k1 = -g.n / 2 + 1; k1 <= g.n / 2; ++k1) {
        for (int k2 = -g.n / 2 + 1; k2 <= g.n / 2; ++k2) {
            const double r = fs * std::sqrt(double(k1) * k1 + double(k2) * k2);
            double sum = part.chi(r);
            for (int j = 0; j <= jmax; ++j) sum += part.phi(std::ldexp(1.0, -j) * r);
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("dyadic blocks of simple fields") {
    DyadicPartition part;
    GridSpec g(64);

    SUBCASE("cos x1 lives in the low-frequency block") {
        SpectralScalar f = single_mode_cos(g, 1, 0);
        CHECK(max_coeff_diff(part.dyadic_block(f, -1), f) == 0.0);
        for (int j = 0; j <= part.max_block_index(g); ++j)
            CHECK(l2_norm(part.dyadic_block(f, j)) == 0.0);
    }

    SUBCASE("single mode |k| = 4 fills block j = 1 exactly") {
        SpectralScalar f = single_mode_cos(g, 4, 0);
        CHECK(max_coeff_diff(part.dyadic_block(f, 1), f) == 0.0);
        CHECK(l2_norm(part.dyadic_block(f, -1)) == 0.0);
        CHECK(l2_norm(part.dyadic_block(f, 0)) == 0.0);
        CHECK(l2_norm(part.dyadic_block(f, 2)) == 0.0);
    }

    SUBCASE("invalid block index") {
        SpectralScalar f = single_mode_cos(g, 1, 0);
        CHECK_THROWS_AS(part.dyadic_block(f, -2), ConfigError);
    }
}

TEST_CASE("block sum and low-frequency cutoff identities") {
    DyadicPartition part;
    GridSpec g(64);
    SpectralScalar f = random_band_limited(g, 30, 101, false);
    const int jmax = part.max_block_index(g);

    SpectralScalar sum(g);
    for (int j = -1; j <= jmax; ++j) sum = add(sum, part.dyadic_block(f, j));
    CHECK(max_coeff_diff(sum, f) < 1e-12);

    for (int j = 0; j <= jmax; ++j) {
        SpectralScalar partial(g);
        for (int k = -1; k <= j - 1; ++k) partial = add(partial, part.dyadic_block(f, k));
        CHECK(max_coeff_diff(part.low_freq(f, j), partial) < 1e-12);
    }
    CHECK(l2_norm(part.low_freq(f, -1)) == 0.0);
}

TEST_CASE("block orthogonality for |j - j'| >= 2") {
    DyadicPartition part;
    GridSpec g(64);
    SpectralScalar f = random_band_limited(g, 30, 55, false);
    const int jmax = part.max_block_index(g);
    for (int j = -1; j <= jmax; ++j) {
        SpectralScalar bj = part.dyadic_block(f, j);
        for (int jp = j + 2; jp <= jmax; ++jp) {
            // supports of the two multipliers are disjoint, so re-filtering
            // one block through the other gives exactly zero
            CHECK(l2_norm(part.dyadic_block(bj, jp)) == 0.0);
        }
    }
}

TEST_CASE("besov norm closed forms") {
    DyadicPartition part;
    GridSpec g(64);

    SUBCASE("single low mode: only block j = -1 contributes") {
        SpectralScalar f = single_mode_cos(g, 1, 0);
        const double l2 = lp_norm(f, 2.0);
        for (double s : {-1.0, 0.0, 1.0, 2.5}) {
            BesovSpec spec{s, 2.0, 2.0};
            CHECK(besov_norm(f, spec, part) ==
                  doctest::Approx(std::pow(2.0, -s) * l2).epsilon(1e-12));
        }
    }

    SUBCASE("zero field") {
        SpectralScalar z(g);
        CHECK(besov_norm(z, BesovSpec{1.0, 2.0, 2.0}, part) == 0.0);
    }

    SUBCASE("invalid exponents") {
        SpectralScalar f = single_mode_cos(g, 1, 0);
        CHECK_THROWS_AS(besov_norm(f, BesovSpec{0.0, 0.5, 2.0}, part), ConfigError);
        CHECK_THROWS_AS(besov_norm(f, BesovSpec{0.0, 2.0, 0.0}, part), ConfigError);
    }

    SUBCASE("l^inf summation picks the largest weighted block") {
        SpectralScalar f = add(single_mode_cos(g, 1, 0), single_mode_cos(g, 4, 0));
        BesovSpec spec{0.0, 2.0, kInf};
        const double b = besov_norm(f, spec, part);
        const double blk = lp_norm(part.dyadic_block(f, 1), 2.0);
        CHECK(b == doctest::Approx(blk).epsilon(1e-12));
    }
}

TEST_CASE("besov B^s_{2,2} is equivalent to H^s with a uniform constant") {
    DyadicPartition part;
    GridSpec g(64);
    for (double s : {-1.0, 0.0, 1.0, 2.0}) {
        double rmin = kInf, rmax = 0.0;
        for (int i = 0; i < 12; ++i) {
            SpectralScalar f = random_band_limited(g, 3 + 2 * i, 700 + i, false);
            const double ratio =
                besov_norm(f, BesovSpec{s, 2.0, 2.0}, part) / sobolev_norm(f, s);
            rmin = std::min(rmin, ratio);
            rmax = std::max(rmax, ratio);
        }
        CHECK(rmin > 1.0 / 16.0);
        CHECK(rmax < 16.0);
        CHECK(rmax / rmin < 8.0);
    }
}

TEST_CASE("chemin-lerner norm") {
    DyadicPartition part;
    GridSpec g(32);
    BesovSpec spec{1.0, 2.0, 2.0};

    SUBCASE("empty series rejected") {
        std::vector<SpectralScalar> empty;
        CHECK_THROWS_AS(chemin_lerner_norm(empty, 0.1, 2.0, spec, part), ConfigError);
    }

    SUBCASE("constant-in-time series, q = inf, equals besov norm") {
        SpectralScalar f = random_band_limited(g, 9, 13, false);
        std::vector<SpectralScalar> series(5, f);
        CHECK(chemin_lerner_norm(series, 0.1, kInf, spec, part) ==
              doctest::Approx(besov_norm(f, spec, part)).epsilon(1e-12));
    }

    SUBCASE("single-block signal: equals the plain time-Lq of the block norm") {
        // all spectral content in shell j = 2 (|k| near 4)
        std::vector<SpectralScalar> series;
        std::vector<double> amps{1.0, 0.5, 2.0, 0.25};
        for (double a : amps) series.push_back(single_mode_cos(g, 4, 0, a));
        const double dt = 0.1, q = 2.0;
        double tq = 0.0;
        for (double a : amps) tq += dt * std::pow(lp_norm(single_mode_cos(g, 4, 0, a), 2.0), q);
        tq = std::pow(tq, 1.0 / q);
        CHECK(chemin_lerner_norm(series, dt, q, spec, part) ==
              doctest::Approx(std::pow(2.0, 1 * spec.s) * tq).epsilon(1e-12));
    }

    SUBCASE("minkowski ordering against the time-outside norm") {
        std::vector<SpectralScalar> series;
        for (int i = 0; i < 6; ++i) series.push_back(random_band_limited(g, 9, 400 + i, false));
        const double dt = 0.05;
        // q >= r: time-inside dominates
        BesovSpec r1{0.5, 2.0, 1.0};
        CHECK(chemin_lerner_norm(series, dt, 2.0, r1, part) >=
              time_lq_besov_norm(series, dt, 2.0, r1, part) * (1.0 - 1e-12));
        // q <= r: time-inside is dominated
        BesovSpec rinf{0.5, 2.0, kInf};
        CHECK(chemin_lerner_norm(series, dt, 2.0, rinf, part) <=
              time_lq_besov_norm(series, dt, 2.0, rinf, part) * (1.0 + 1e-12));
        // q = r: both orders agree
        BesovSpec r2{0.5, 2.0, 2.0};
        CHECK(chemin_lerner_norm(series, dt, 2.0, r2, part) ==
              doctest::Approx(time_lq_besov_norm(series, dt, 2.0, r2, part)).epsilon(1e-12));
    }
}

TEST_CASE("bony decomposition") {
    DyadicPartition part;
    GridSpec g(64);

    SUBCASE("two low-frequency cosines: pure remainder") {
        SpectralScalar u = single_mode_cos(g, 1, 0);
        BonyParts parts = bony_decompose(u, u, part);
        CHECK(l2_norm(parts.Tuv) == 0.0);
        CHECK(l2_norm(parts.Tvu) == 0.0);
        CHECK(max_coeff_diff(parts.R, multiply(u, u)) < 1e-13);
    }

    SUBCASE("constant u has no high blocks") {
        SpectralScalar u(g);
        u.at(0, 0) = Complex{2.0, 0.0};
        SpectralScalar v = random_band_limited(g, 20, 301, false);
        BonyParts parts = bony_decompose(u, v, part);
        CHECK(l2_norm(parts.Tvu) == 0.0);
        SpectralScalar recon = add(parts.Tuv, parts.R);
        CHECK(max_coeff_diff(recon, multiply(u, v)) < 1e-11);
    }

    SUBCASE("identity on random band-limited pairs") {
        for (int i = 0; i < 5; ++i) {
            SpectralScalar u = random_band_limited(g, 21, 800 + 2 * i, false);
            SpectralScalar v = random_band_limited(g, 21, 801 + 2 * i, false);
            BonyParts parts = bony_decompose(u, v, part);
            SpectralScalar recon = add(add(parts.Tuv, parts.Tvu), parts.R);
            CHECK(max_coeff_diff(recon, multiply(u, v)) < 1e-11);
        }
    }

    SUBCASE("mismatched grids rejected") {
        GridSpec g2(32);
        SpectralScalar u(g), v(g2);
        CHECK_THROWS_AS(bony_decompose(u, v, part), ConfigError);
    }
}

TEST_CASE("bernstein ratios") {
    DyadicPartition part;
    GridSpec g(64);

    SUBCASE("single mode |k| = 2^j, p = q = 2, kappa = 1: ratio exactly 1") {
        for (int j : {1, 2, 3}) {
            SpectralScalar f = single_mode_cos(g, 1 << j, 0);
            BernsteinRatios r = bernstein_verify(f, j, 2.0, 2.0, 1, false, part);
            CHECK(r.upper == doctest::Approx(1.0).epsilon(1e-13));
            CHECK(r.lower == doctest::Approx(1.0).epsilon(1e-13));
        }
    }

    SUBCASE("ball case: cos x1, j = 0, kappa = 0, p = 2, q = inf") {
        SpectralScalar f = single_mode_cos(g, 1, 0);
        BernsteinRatios r = bernstein_verify(f, 0, 2.0, kInf, 0, true, part);
        // j = 0, so the dyadic factor is 1: ratio = ||f||_inf / ||f||_2
        CHECK(r.upper == doctest::Approx(1.0 / (std::sqrt(2.0) * kPi)).epsilon(1e-10));
        CHECK(r.lower == 0.0);
    }

    SUBCASE("random shell fields: ratios j-independent within factor 3") {
        // shells kept inside (1.1, 2.0) * 2^j so the top one is fully
        // resolved on the grid; coherent phases saturate the L^inf bound
        GridSpec gf(128);
        auto coherent_shell = [&](int j) {
            SpectralScalar f(gf);
            const double lo = part.r1() * std::ldexp(1.0, j);
            const double hi = 2.0 * std::ldexp(1.0, j);
            for (int k1 = -gf.n / 2 + 1; k1 <= gf.n / 2; ++k1)
                for (int k2 = -gf.n / 2 + 1; k2 <= gf.n / 2; ++k2) {
                    const double r = std::sqrt(double(k1) * k1 + double(k2) * k2);
                    if (r > lo && r < hi) f.at(k1, k2) = Complex{1.0, 0.0};
                }
            return f;
        };
        for (double q : {2.0, kInf}) {
            double up_min = kInf, up_max = 0.0, lo_min = kInf, lo_max = 0.0;
            for (int j = 2; j <= 5; ++j) {
                SpectralScalar f = coherent_shell(j);
                BernsteinRatios r = bernstein_verify(f, j, 2.0, q, 1, false, part);
                up_min = std::min(up_min, r.upper);
                up_max = std::max(up_max, r.upper);
                lo_min = std::min(lo_min, r.lower);
                lo_max = std::max(lo_max, r.lower);
            }
            CHECK(up_max / up_min < 3.0);
            CHECK(lo_max / lo_min < 3.0);
        }
    }

    SUBCASE("preconditions") {
        SpectralScalar f = single_mode_cos(g, 1, 0);
        CHECK_THROWS_AS(bernstein_verify(f, 3, 2.0, 2.0, 1, false, part), ConfigError);
        CHECK_THROWS_AS(bernstein_verify(f, 0, 4.0, 2.0, 1, true, part), ConfigError);
        SpectralScalar z(g);
        CHECK_THROWS_AS(bernstein_verify(z, 0, 2.0, 2.0, 0, true, part), ConfigError);
    }
}

TEST_CASE("profile export") {
    DyadicPartition part;
    std::ostringstream os;
    part.export_profiles(os, 4.0, 8);
    const std::string csv = os.str();
    CHECK(csv.rfind("r,chi,phi\n", 0) == 0);
    // 8 intervals -> 9 sample rows plus header
    int lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 10);
}
