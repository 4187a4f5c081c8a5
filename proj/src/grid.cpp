#include "rotlim/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

#include "rotlim/parallel.hpp"

namespace rotlim {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// FFTW plans are cached per grid size; plan creation is not thread safe.
struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

class PlanCache {
  public:
    static PlanCache& instance() {
        static PlanCache c;
        return c;
    }

    // Executes an out-of-place c2c transform using the cached plan for n.
    void run(int n, const Complex* in, Complex* out, bool forward) {
        fftw_plan plan;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = plans_.find(n);
            if (it == plans_.end()) {
                std::vector<Complex> a(static_cast<std::size_t>(n) * n), b(a.size());
                PlanPair p;
                p.fwd = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                                         reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                                         FFTW_ESTIMATE);
                p.bwd = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                                         reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD,
                                         FFTW_ESTIMATE);
                it = plans_.emplace(n, p).first;
            }
            plan = forward ? it->second.fwd : it->second.bwd;
        }
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

  private:
    std::mutex mutex_;
    std::map<int, PlanPair> plans_;
};

}  // namespace

GridSpec::GridSpec(int n_, double length_) : n(n_), length(length_) {
    if (n < 8 || n % 2 != 0) throw ConfigError("GridSpec: n must be even and >= 8");
    if (!(length > 0.0)) throw ConfigError("GridSpec: length must be positive");
}

double GridSpec::freq_scale() const { return kTwoPi / length; }

Complex& SpectralScalar::at(int k1, int k2) {
    const int n = grid.n;
    const int i1 = (k1 % n + n) % n;
    const int i2 = (k2 % n + n) % n;
    return coeffs[static_cast<std::size_t>(i1) * n + i2];
}

Complex SpectralScalar::at(int k1, int k2) const {
    return const_cast<SpectralScalar*>(this)->at(k1, k2);
}

std::vector<Complex> fft_forward(const GridSpec& g, const std::vector<Complex>& phys) {
    std::vector<Complex> out(g.size());
    PlanCache::instance().run(g.n, phys.data(), out.data(), true);
    return out;
}

std::vector<Complex> fft_backward(const GridSpec& g, const std::vector<Complex>& coeffs) {
    std::vector<Complex> out(g.size());
    PlanCache::instance().run(g.n, coeffs.data(), out.data(), false);
    return out;
}

std::vector<double> transform(const SpectralScalar& f) {
    if (f.coeffs.size() != f.grid.size()) throw ConfigError("transform: size mismatch");
    std::vector<Complex> phys = fft_backward(f.grid, f.coeffs);
    std::vector<double> out(phys.size());
    parallel_for(phys.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) out[i] = phys[i].real();
    });
    return out;
}

SpectralScalar inverse_transform(const GridSpec& g, const std::vector<double>& samples) {
    if (samples.size() != g.size()) throw ConfigError("inverse_transform: size mismatch");
    std::vector<Complex> phys(samples.size());
    parallel_for(samples.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) phys[i] = Complex{samples[i], 0.0};
    });
    SpectralScalar f(g);
    f.coeffs = fft_forward(g, phys);
    const double scale = 1.0 / static_cast<double>(g.size());
    parallel_for(f.coeffs.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) f.coeffs[i] *= scale;
    });
    return f;
}

double hermitian_defect(const SpectralScalar& f) {
    const int n = f.grid.n;
    double worst = 0.0;
    for (int i1 = 0; i1 < n; ++i1) {
        for (int i2 = 0; i2 < n; ++i2) {
            const Complex a = f.coeffs[static_cast<std::size_t>(i1) * n + i2];
            const int j1 = (n - i1) % n;
            const int j2 = (n - i2) % n;
            const Complex b = f.coeffs[static_cast<std::size_t>(j1) * n + j2];
            worst = std::max(worst, std::abs(a - std::conj(b)));
        }
    }
    return worst;
}

void symmetrize(SpectralScalar& f) {
    const int n = f.grid.n;
    for (int i1 = 0; i1 < n; ++i1) {
        for (int i2 = 0; i2 < n; ++i2) {
            const int j1 = (n - i1) % n;
            const int j2 = (n - i2) % n;
            const std::size_t a = static_cast<std::size_t>(i1) * n + i2;
            const std::size_t b = static_cast<std::size_t>(j1) * n + j2;
            if (a > b) continue;
            const Complex avg = 0.5 * (f.coeffs[a] + std::conj(f.coeffs[b]));
            f.coeffs[a] = avg;
            f.coeffs[b] = std::conj(avg);
        }
    }
}

}  // namespace rotlim
