#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "gevrey/error.hpp"

namespace gevrey {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

using Vec3 = std::array<double, 3>;

/// Uniform periodic grid on [0, 2pi)^dims. Unused trailing dimensions have
/// one point. Sizes may differ per dimension (rectangular lattice).
struct Grid {
    int dims = 2;
    std::array<int, 3> n{1, 1, 1};

    Grid() = default;
    Grid(int d, std::array<int, 3> sizes) : dims(d), n(sizes) {
        for (int i = dims; i < 3; ++i) n[static_cast<std::size_t>(i)] = 1;
        validate();
    }

    static Grid cube(int d, int points) { return Grid(d, {points, points, points}); }
    static Grid plane(int n1, int n2) { return Grid(2, {n1, n2, 1}); }

    void validate() const {
        require(dims >= 1 && dims <= 3, ErrorCode::Domain, "grid dims must be 1, 2 or 3");
        for (int i = 0; i < dims; ++i) {
            const int p = n[static_cast<std::size_t>(i)];
            require(p >= 16 && (p & (p - 1)) == 0, ErrorCode::Domain,
                    "grid points per dimension must be a power of two >= 16, got " + std::to_string(p));
        }
    }

    std::size_t size() const noexcept {
        return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]) * static_cast<std::size_t>(n[2]);
    }
    int points(int d) const noexcept { return n[static_cast<std::size_t>(d)]; }
    double spacing(int d) const noexcept { return two_pi / points(d); }
    double coord(int d, int i) const noexcept { return spacing(d) * i; }

    /// Row-major flat index, last dimension fastest.
    std::size_t flat(int i0, int i1 = 0, int i2 = 0) const noexcept {
        return (static_cast<std::size_t>(i0) * static_cast<std::size_t>(n[1]) + static_cast<std::size_t>(i1)) *
                   static_cast<std::size_t>(n[2]) +
               static_cast<std::size_t>(i2);
    }
    std::array<int, 3> unflat(std::size_t f) const noexcept {
        const auto n2 = static_cast<std::size_t>(n[2]);
        const auto n1 = static_cast<std::size_t>(n[1]);
        return {static_cast<int>(f / (n1 * n2)), static_cast<int>((f / n2) % n1), static_cast<int>(f % n2)};
    }
    std::array<double, 3> point(std::size_t f) const noexcept {
        const auto i = unflat(f);
        return {coord(0, i[0]), dims > 1 ? coord(1, i[1]) : 0.0, dims > 2 ? coord(2, i[2]) : 0.0};
    }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Signed wavenumber of FFT storage slot i in a dimension of n points:
/// 0..n/2-1 then -n/2..-1.
constexpr int wavenumber(int i, int n) noexcept { return (n == 1 || i < n / 2) ? i : i - n; }
constexpr int storage_slot(int k, int n) noexcept { return k >= 0 ? k : k + n; }

/// Real samples of a scalar field on a grid.
struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

    template <class F>
    static Field sample(const Grid& g, F&& f) {
        Field out(g);
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = f(g.point(i));
        return out;
    }

    double max_abs() const noexcept {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

}  // namespace gevrey
