#pragma once

// Fourier coefficients on the wavevector lattice of a Grid, the FFTW-backed
// transform pair, spectral differentiation and the flat binary format.
//
// Normalization: forward divides by the number of grid points, so a constant
// field c has hat u_0 = c and cos(x) has hat u_{+-1} = 1/2. Inverse is the
// plain Fourier sum.

#include <bit>
#include <complex>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <cstring>
#include <mutex>
#include <ostream>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "gevrey/error.hpp"
#include "gevrey/grid.hpp"

namespace gevrey {

using Complex = std::complex<double>;

/// i k c without the generic complex product (which guards for inf/NaN).
inline Complex times_ik(double k, Complex c) noexcept { return {-k * c.imag(), k * c.real()}; }

class Spectrum {
public:
    Spectrum() = default;
    explicit Spectrum(const Grid& g, bool real_field = true) : grid_(g), coeffs_(g.size()), real_(real_field) {}

    const Grid& grid() const noexcept { return grid_; }
    bool is_real() const noexcept { return real_; }
    void set_real(bool r) noexcept { real_ = r; }

    std::size_t size() const noexcept { return coeffs_.size(); }
    std::vector<Complex>& coeffs() noexcept { return coeffs_; }
    const std::vector<Complex>& coeffs() const noexcept { return coeffs_; }
    Complex& operator[](std::size_t f) noexcept { return coeffs_[f]; }
    const Complex& operator[](std::size_t f) const noexcept { return coeffs_[f]; }

    std::array<int, 3> wavevector(std::size_t f) const noexcept {
        const auto i = grid_.unflat(f);
        return {wavenumber(i[0], grid_.n[0]), wavenumber(i[1], grid_.n[1]), wavenumber(i[2], grid_.n[2])};
    }
    std::size_t slot(std::array<int, 3> k) const noexcept {
        return grid_.flat(storage_slot(k[0], grid_.n[0]), storage_slot(k[1], grid_.n[1]),
                          storage_slot(k[2], grid_.n[2]));
    }
    Complex& at(std::array<int, 3> k) noexcept { return coeffs_[slot(k)]; }
    const Complex& at(std::array<int, 3> k) const noexcept { return coeffs_[slot(k)]; }

    static double norm(std::array<int, 3> k) noexcept {
        return std::sqrt(static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] +
                         static_cast<double>(k[2]) * k[2]);
    }
    static double norm2(std::array<int, 3> k) noexcept {
        return static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] + static_cast<double>(k[2]) * k[2];
    }

    /// Slot holding -k.
    std::size_t mirror(std::size_t f) const noexcept {
        auto k = wavevector(f);
        return slot({-k[0], -k[1], -k[2]});
    }

    double max_abs() const noexcept {
        double m = 0.0;
        for (const auto& c : coeffs_) m = std::max(m, std::norm(c));
        return std::sqrt(m);
    }

    /// Projects onto conjugate-symmetric coefficients (real field).
    void enforce_conjugate_symmetry() {
        for (std::size_t f = 0; f < coeffs_.size(); ++f) {
            const std::size_t g = mirror(f);
            if (g < f) continue;
            const Complex avg = 0.5 * (coeffs_[f] + std::conj(coeffs_[g]));
            coeffs_[f] = avg;
            coeffs_[g] = std::conj(avg);
        }
        real_ = true;
    }

    double conjugate_symmetry_defect() const noexcept {
        double d = 0.0;
        for (std::size_t f = 0; f < coeffs_.size(); ++f)
            d = std::max(d, std::abs(coeffs_[f] - std::conj(coeffs_[mirror(f)])));
        return d;
    }

    Spectrum& operator*=(double c) {
        for (auto& v : coeffs_) v *= c;
        return *this;
    }

private:
    Grid grid_;
    std::vector<Complex> coeffs_;
    bool real_ = true;
};

namespace detail {

// fftw_malloc'd storage: plans made on it may use SIMD kernels, so every
// execution goes through a buffer with the same alignment.
struct AlignedBuffer {
    fftw_complex* data = nullptr;
    std::size_t size = 0;

    explicit AlignedBuffer(std::size_t n) : data(fftw_alloc_complex(n)), size(n) {
        require(data != nullptr, ErrorCode::Domain, "fftw_alloc_complex failed");
    }
    ~AlignedBuffer() { fftw_free(data); }
    AlignedBuffer(const AlignedBuffer&) = delete;
    AlignedBuffer& operator=(const AlignedBuffer&) = delete;
};

// FFTW planning is not thread-safe; plans are created once per shape under a
// lock and executed with the new-array interface. FFTW_ESTIMATE keeps the
// chosen algorithm, and hence every rounding, identical from run to run.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(const Grid& g, int sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(g.dims, g.n[0], g.n[1], g.n[2], sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        AlignedBuffer scratch(g.size());
        int dims[3] = {g.n[0], g.n[1], g.n[2]};
        fftw_plan p = fftw_plan_dft(g.dims, dims, scratch.data, scratch.data, sign, FFTW_ESTIMATE);
        require(p != nullptr, ErrorCode::Domain, "FFTW could not create a plan");
        plans_.emplace(key, p);
        return p;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::tuple<int, int, int, int, int>, fftw_plan> plans_;
};

/// Thread-local aligned work array of at least n entries.
inline fftw_complex* work_buffer(std::size_t n) {
    thread_local std::unique_ptr<AlignedBuffer> buf;
    if (!buf || buf->size < n) buf = std::make_unique<AlignedBuffer>(n);
    return buf->data;
}

inline void execute(const Grid& g, int sign, fftw_complex* data) {
    fftw_execute_dft(PlanCache::instance().get(g, sign), data, data);
}

}  // namespace detail

inline Spectrum forward_transform(const Field& f) {
    f.grid.validate();
    require(f.values.size() == f.grid.size(), ErrorCode::SizeMismatch, "field sample count does not match grid");
    const std::size_t n = f.values.size();
    fftw_complex* buf = detail::work_buffer(n);
    for (std::size_t i = 0; i < n; ++i) {
        buf[i][0] = f.values[i];
        buf[i][1] = 0.0;
    }
    detail::execute(f.grid, FFTW_FORWARD, buf);
    Spectrum sp(f.grid, true);
    auto& c = sp.coeffs();
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = Complex(buf[i][0] * scale, buf[i][1] * scale);
    return sp;
}

/// Complex samples of the Fourier sum.
inline std::vector<Complex> inverse_transform_complex(const Spectrum& sp) {
    const std::size_t n = sp.size();
    fftw_complex* buf = detail::work_buffer(n);
    std::memcpy(buf, sp.coeffs().data(), n * sizeof(Complex));
    detail::execute(sp.grid(), FFTW_BACKWARD, buf);
    std::vector<Complex> out(n);
    std::memcpy(out.data(), buf, n * sizeof(Complex));
    return out;
}

inline Field inverse_transform(const Spectrum& sp) {
    sp.grid().validate();
    require(sp.size() == sp.grid().size(), ErrorCode::SizeMismatch, "spectrum size does not match grid");
    const std::size_t n = sp.size();
    fftw_complex* buf = detail::work_buffer(n);
    std::memcpy(buf, sp.coeffs().data(), n * sizeof(Complex));
    detail::execute(sp.grid(), FFTW_BACKWARD, buf);
    Field out(sp.grid());
    for (std::size_t i = 0; i < n; ++i) out.values[i] = buf[i][0];
    return out;
}

/// d/dx_dim of a spectrum: multiplies by i k_dim. The unpaired Nyquist slot
/// is zeroed so real fields stay real.
inline Spectrum derivative(const Spectrum& sp, int dim) {
    Spectrum out = sp;
    const int n = sp.grid().points(dim);
    auto& c = out.coeffs();
    for (std::size_t f = 0; f < c.size(); ++f) {
        const int k = sp.wavevector(f)[static_cast<std::size_t>(dim)];
        c[f] = (k == -n / 2) ? Complex(0.0) : times_ik(k, c[f]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Flat binary format: uint32 dims, uint32 size per dim, uint32 real flag,
// then (re, im) float64 pairs in lexicographic signed-wavevector order
// (k1 ascending from -n1/2, then k2, then k3). Little-endian throughout.

static_assert(std::endian::native == std::endian::little, "binary spectrum format assumes a little-endian host");

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }
inline std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    require(static_cast<bool>(is), ErrorCode::Parse, "truncated spectrum header");
    return v;
}

template <class F>
void for_each_lexicographic(const Grid& g, F&& f) {
    auto range = [&](int d) { return g.dims > d ? g.n[static_cast<std::size_t>(d)] : 1; };
    for (int a = 0; a < range(0); ++a)
        for (int b = 0; b < range(1); ++b)
            for (int c = 0; c < range(2); ++c) {
                const std::array<int, 3> k{g.dims > 0 ? a - g.n[0] / 2 : 0, g.dims > 1 ? b - g.n[1] / 2 : 0,
                                           g.dims > 2 ? c - g.n[2] / 2 : 0};
                f(k);
            }
}

}  // namespace detail

inline void write_spectrum(std::ostream& os, const Spectrum& sp) {
    const Grid& g = sp.grid();
    detail::put_u32(os, static_cast<std::uint32_t>(g.dims));
    for (int d = 0; d < g.dims; ++d) detail::put_u32(os, static_cast<std::uint32_t>(g.points(d)));
    detail::put_u32(os, sp.is_real() ? 1u : 0u);
    detail::for_each_lexicographic(g, [&](const std::array<int, 3>& k) {
        const Complex c = sp.at(k);
        const double pair[2] = {c.real(), c.imag()};
        os.write(reinterpret_cast<const char*>(pair), sizeof pair);
    });
    require(static_cast<bool>(os), ErrorCode::Io, "failed writing spectrum");
}

inline Spectrum read_spectrum(std::istream& is) {
    const auto dims = static_cast<int>(detail::get_u32(is));
    require(dims >= 1 && dims <= 3, ErrorCode::Parse, "bad dims in spectrum header");
    std::array<int, 3> n{1, 1, 1};
    for (int d = 0; d < dims; ++d) n[static_cast<std::size_t>(d)] = static_cast<int>(detail::get_u32(is));
    const bool real = detail::get_u32(is) != 0;
    Grid g(dims, n);
    Spectrum sp(g, real);
    detail::for_each_lexicographic(g, [&](const std::array<int, 3>& k) {
        double pair[2];
        is.read(reinterpret_cast<char*>(pair), sizeof pair);
        require(static_cast<bool>(is), ErrorCode::Parse, "truncated spectrum payload");
        sp.at(k) = Complex(pair[0], pair[1]);
    });
    return sp;
}

inline void save_spectrum(const std::string& path, const Spectrum& sp) {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), ErrorCode::Io, "cannot open " + path);
    write_spectrum(os, sp);
}

inline Spectrum load_spectrum(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), ErrorCode::Io, "cannot open " + path);
    return read_spectrum(is);
}

}  // namespace gevrey
