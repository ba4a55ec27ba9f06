#pragma once

// Periodic grids, FFTW-backed transforms and the Field value type.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <sstream>
#include <tuple>
#include <vector>

#include "besovflow/errors.hpp"

namespace besovflow {

using cplx = std::complex<double>;

/// Uniform periodic grid [0, L)^d with n points per dimension.
struct Grid {
    int dim = 1;
    int n = 64;
    double box_len = 2.0 * std::numbers::pi;

    std::size_t size() const noexcept {
        std::size_t s = 1;
        for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(n);
        return s;
    }
    double dx() const noexcept { return box_len / n; }
    double cell_volume() const noexcept { return std::pow(dx(), dim); }
    double volume() const noexcept { return std::pow(box_len, dim); }
    /// Smallest non-zero resolvable |ξ|.
    double xi_min() const noexcept { return 2.0 * std::numbers::pi / box_len; }
    /// Largest resolvable |ξ| (grid corner).
    double xi_max() const noexcept {
        return std::sqrt(static_cast<double>(dim)) * std::numbers::pi * n / box_len;
    }

    void validate() const {
        if (dim < 1 || dim > 3) throw ConfigError("grid: dim must be 1, 2 or 3");
        if (n < 8 || (n & (n - 1)) != 0) {
            throw ConfigError("grid: n_per_dim must be a power of two >= 8");
        }
        if (!(box_len > 0.0) || !std::isfinite(box_len)) {
            throw ConfigError("grid: box_len must be > 0");
        }
    }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Signed integer wavenumber of DFT index i on an n-point axis.
inline int signed_mode(int i, int n) noexcept { return i <= n / 2 ? i : i - n; }

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// One c2c plan pair over an n^dim array, with its own aligned buffers.
class FftPlan {
public:
    FftPlan(int dim, int n) : size_(1) {
        for (int i = 0; i < dim; ++i) size_ *= static_cast<std::size_t>(n);
        std::lock_guard lock(fftw_planner_mutex());
        buf_ = fftw_alloc_complex(size_);
        int dims[3] = {n, n, n};
        fwd_ = fftw_plan_dft(dim, dims, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft(dim, dims, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    ~FftPlan() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    void forward(std::span<const double> in, std::span<cplx> out) {
        for (std::size_t i = 0; i < size_; ++i) {
            buf_[i][0] = in[i];
            buf_[i][1] = 0.0;
        }
        fftw_execute(fwd_);
        for (std::size_t i = 0; i < size_; ++i) out[i] = cplx(buf_[i][0], buf_[i][1]);
    }

    /// Normalized inverse; keeps the real part.
    void inverse(std::span<const cplx> in, std::span<double> out) {
        for (std::size_t i = 0; i < size_; ++i) {
            buf_[i][0] = in[i].real();
            buf_[i][1] = in[i].imag();
        }
        fftw_execute(bwd_);
        const double scale = 1.0 / static_cast<double>(size_);
        for (std::size_t i = 0; i < size_; ++i) out[i] = buf_[i][0] * scale;
    }

private:
    std::size_t size_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

/// Plans are per thread so concurrent evolutions never share buffers.
inline FftPlan& plan_for(int dim, int n) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<FftPlan>> cache;
    auto& slot = cache[{dim, n}];
    if (!slot) slot = std::make_unique<FftPlan>(dim, n);
    return *slot;
}

} // namespace detail

inline void fft_forward(int dim, int n, std::span<const double> in, std::span<cplx> out) {
    detail::plan_for(dim, n).forward(in, out);
}

inline void fft_inverse(int dim, int n, std::span<const cplx> in, std::span<double> out) {
    detail::plan_for(dim, n).inverse(in, out);
}

/// Per-grid table of physical wavevectors ξ = 2πk/L in DFT index order.
struct WaveTable {
    int dim = 1;
    std::vector<std::vector<double>> xi;  // [axis][flat index]
    std::vector<double> kmag;             // |ξ|
    std::vector<unsigned char> nyquist;   // any axis at index n/2

    explicit WaveTable(int dim_, int n, double box_len) : dim(dim_) {
        std::size_t size = 1;
        for (int i = 0; i < dim; ++i) size *= static_cast<std::size_t>(n);
        xi.assign(dim, std::vector<double>(size));
        kmag.resize(size);
        nyquist.assign(size, 0);
        const double k0 = 2.0 * std::numbers::pi / box_len;
        for (std::size_t flat = 0; flat < size; ++flat) {
            std::size_t rem = flat;
            double mag2 = 0.0;
            // row-major: last axis fastest
            for (int a = dim - 1; a >= 0; --a) {
                const int idx = static_cast<int>(rem % n);
                rem /= n;
                const double x = k0 * signed_mode(idx, n);
                xi[a][flat] = x;
                mag2 += x * x;
                if (idx == n / 2) nyquist[flat] = 1;
            }
            kmag[flat] = std::sqrt(mag2);
        }
    }
};

inline std::shared_ptr<const WaveTable> wave_table(const Grid& g) {
    static std::mutex m;
    static std::map<std::tuple<int, int, double>, std::shared_ptr<const WaveTable>> cache;
    std::lock_guard lock(m);
    auto& slot = cache[{g.dim, g.n, g.box_len}];
    if (!slot) slot = std::make_shared<const WaveTable>(g.dim, g.n, g.box_len);
    return slot;
}

/// Real scalar field sampled on a periodic grid, with a lazily cached spectrum.
class Field {
public:
    Field() : Field(Grid{}) {}
    explicit Field(const Grid& g) : grid_(g), values_(g.size(), 0.0) {}
    Field(const Grid& g, std::vector<double> values) : grid_(g), values_(std::move(values)) {
        if (values_.size() != g.size()) throw ConfigError("Field: value count does not match grid");
    }

    Field(const Field& o) : grid_(o.grid_), values_(o.values_) {
        std::lock_guard lock(*o.mutex_);
        spectrum_ = o.spectrum_;
    }
    Field(Field&& o) noexcept
        : grid_(o.grid_), values_(std::move(o.values_)), spectrum_(std::move(o.spectrum_)) {}
    Field& operator=(const Field& o) {
        if (this != &o) {
            Field tmp(o);
            *this = std::move(tmp);
        }
        return *this;
    }
    Field& operator=(Field&& o) noexcept {
        grid_ = o.grid_;
        values_ = std::move(o.values_);
        spectrum_ = std::move(o.spectrum_);
        return *this;
    }

    /// Builds the real field whose DFT is `spec` (imaginary residue of the
    /// inverse transform is dropped; the cached spectrum is recomputed).
    static Field from_spectrum(const Grid& g, std::span<const cplx> spec) {
        Field f(g);
        fft_inverse(g.dim, g.n, spec, f.values_);
        return f;
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    /// Writable access; drops the cached spectrum.
    std::span<double> mutable_values() {
        spectrum_.reset();
        return values_;
    }

    const std::vector<cplx>& spectrum() const {
        std::lock_guard lock(*mutex_);
        if (!spectrum_) {
            auto s = std::make_shared<std::vector<cplx>>(values_.size());
            fft_forward(grid_.dim, grid_.n, values_, *s);
            spectrum_ = std::move(s);
        }
        return *spectrum_;
    }

    double mean() const noexcept {
        double s = 0.0;
        for (double v : values_) s += v;
        return s / static_cast<double>(values_.size());
    }
    double integral() const noexcept { return mean() * grid_.volume(); }
    double max_abs() const noexcept {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }
    bool all_finite() const noexcept {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

private:
    Grid grid_;
    std::vector<double> values_;
    mutable std::shared_ptr<const std::vector<cplx>> spectrum_;
    std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
};

/// Samples f(x) at the grid nodes; x is the d-vector of coordinates.
template <class Fn>
Field sample(const Grid& g, Fn&& fn) {
    Field out(g);
    auto v = out.mutable_values();
    std::vector<double> x(g.dim);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        std::size_t rem = flat;
        for (int a = g.dim - 1; a >= 0; --a) {
            x[a] = g.dx() * static_cast<double>(rem % g.n);
            rem /= g.n;
        }
        v[flat] = fn(std::span<const double>(x));
    }
    return out;
}

/// Multiplies the spectrum of f by mult(flat index, wave table).
template <class Mult>
Field apply_multiplier(const Field& f, Mult&& mult) {
    const auto& spec = f.spectrum();
    const auto table = wave_table(f.grid());
    std::vector<cplx> out(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) out[i] = spec[i] * mult(i, *table);
    return Field::from_spectrum(f.grid(), out);
}

/// Spectral ∂/∂x_axis; the Nyquist mode is dropped.
inline std::vector<cplx> spectral_derivative(std::span<const cplx> spec, const WaveTable& t, int axis) {
    std::vector<cplx> out(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        out[i] = t.nyquist[i] ? cplx(0.0) : cplx(0.0, t.xi[axis][i]) * spec[i];
    }
    return out;
}

inline Field derivative(const Field& f, int axis) {
    const auto t = wave_table(f.grid());
    return Field::from_spectrum(f.grid(), spectral_derivative(f.spectrum(), *t, axis));
}

/// Maps a spectrum on n^d onto the zero-padded m^d grid (m > n) and back.
/// Nyquist modes are dropped; amplitudes are rescaled so physical values match.
inline std::vector<cplx> pad_spectrum(std::span<const cplx> spec, int dim, int n, int m) {
    std::size_t msize = 1;
    for (int i = 0; i < dim; ++i) msize *= static_cast<std::size_t>(m);
    std::vector<cplx> out(msize, cplx(0.0));
    const double scale = static_cast<double>(msize) / static_cast<double>(spec.size());
    const std::size_t nsize = spec.size();
    for (std::size_t flat = 0; flat < nsize; ++flat) {
        std::size_t rem = flat;
        std::size_t target = 0;
        std::size_t stride = 1;
        bool keep = true;
        for (int a = dim - 1; a >= 0; --a) {
            const int idx = static_cast<int>(rem % n);
            rem /= n;
            const int k = signed_mode(idx, n);
            if (idx == n / 2) keep = false;
            const int midx = k >= 0 ? k : k + m;
            target += static_cast<std::size_t>(midx) * stride;
            stride *= static_cast<std::size_t>(m);
        }
        if (keep) out[target] = spec[flat] * scale;
    }
    return out;
}

inline std::vector<cplx> truncate_spectrum(std::span<const cplx> spec, int dim, int m, int n) {
    std::size_t nsize = 1;
    for (int i = 0; i < dim; ++i) nsize *= static_cast<std::size_t>(n);
    std::vector<cplx> out(nsize, cplx(0.0));
    const double scale = static_cast<double>(nsize) / static_cast<double>(spec.size());
    for (std::size_t flat = 0; flat < nsize; ++flat) {
        std::size_t rem = flat;
        std::size_t source = 0;
        std::size_t stride = 1;
        bool keep = true;
        for (int a = dim - 1; a >= 0; --a) {
            const int idx = static_cast<int>(rem % n);
            rem /= n;
            const int k = signed_mode(idx, n);
            if (idx == n / 2) keep = false;
            const int midx = k >= 0 ? k : k + m;
            source += static_cast<std::size_t>(midx) * stride;
            stride *= static_cast<std::size_t>(m);
        }
        if (keep) out[flat] = spec[source] * scale;
    }
    return out;
}

// Pointwise arithmetic used by the integrators.
inline Field axpy(const Field& y, double a, const Field& x) {
    std::vector<double> out(y.values().begin(), y.values().end());
    auto xv = x.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * xv[i];
    return Field(y.grid(), std::move(out));
}

inline Field scaled(const Field& x, double a) {
    std::vector<double> out(x.values().begin(), x.values().end());
    for (double& v : out) v *= a;
    return Field(x.grid(), std::move(out));
}

} // namespace besovflow
