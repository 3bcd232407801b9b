#pragma once

// Closed-form Euler solutions used as ground truth.
//
// Shear flow: u(x, t) = (f(x2), 0, g(x1 - t f(x2))) with f = sin. The field
// does not depend on x3, so it is sampled on the (x1, x2) plane.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>

#include "gevrey/error.hpp"
#include "gevrey/grid.hpp"
#include "gevrey/spectral.hpp"
#include "gevrey/spectrum.hpp"

namespace gevrey {

enum class ShearProfile { AnalyticPole, GevreyExp };

struct ShearFlowSpec {
    ShearProfile g = ShearProfile::AnalyticPole;
    double tau0 = 0.5;  // AnalyticPole: g(x) = 1/(tau0^2 + cos^2 x)
    double s = 2.0;     // GevreyExp: g(x) = exp(-|x|^{-1/(s-1)}), x wrapped to [-pi, pi)

    static ShearFlowSpec analytic(double tau0) {
        require(tau0 > 0.0, ErrorCode::Domain, "tau0 must be positive");
        return {ShearProfile::AnalyticPole, tau0, 2.0};
    }
    static ShearFlowSpec gevrey(double s) {
        require(s > 1.0, ErrorCode::Domain, "Gevrey index must exceed 1");
        return {ShearProfile::GevreyExp, 0.5, s};
    }
};

using Mat3 = std::array<std::array<double, 3>, 3>;

namespace detail {

inline double wrap_pi(double x) { return x - two_pi * std::floor((x + std::numbers::pi) / two_pi); }

}  // namespace detail

/// g and g' of the shear profile.
inline std::pair<double, double> shear_g(const ShearFlowSpec& spec, double x) {
    if (spec.g == ShearProfile::AnalyticPole) {
        const double c = std::cos(x);
        const double d = spec.tau0 * spec.tau0 + c * c;
        return {1.0 / d, std::sin(2.0 * x) / (d * d)};
    }
    const double w = detail::wrap_pi(x);
    const double a = std::abs(w);
    if (a == 0.0) return {0.0, 0.0};
    const double p = 1.0 / (spec.s - 1.0);
    const double g = std::exp(-std::pow(a, -p));
    const double dg = g * p * std::pow(a, -p - 1.0);
    return {g, w > 0 ? dg : -dg};
}

inline Vec3 shear_velocity(const ShearFlowSpec& spec, const Vec3& x, double t) {
    const double f = std::sin(x[1]);
    return {f, 0.0, shear_g(spec, x[0] - t * f).first};
}

/// J[i][j] = d u_i / d x_j.
inline Mat3 shear_gradient(const ShearFlowSpec& spec, const Vec3& x, double t) {
    const double f = std::sin(x[1]);
    const double df = std::cos(x[1]);
    const double dg = shear_g(spec, x[0] - t * f).second;
    Mat3 J{};
    J[0][1] = df;
    J[2][0] = dg;
    J[2][1] = -t * df * dg;
    return J;
}

/// Exact particle path: x2 is constant and x1 - t f(x2) is conserved.
inline Vec3 shear_trajectory(const ShearFlowSpec& spec, const Vec3& a, double t) {
    const double f = std::sin(a[1]);
    return {a[0] + t * f, a[1], a[2] + t * shear_g(spec, a[0]).first};
}

/// Component `i` of the shear velocity sampled on a plane grid.
inline Field shear_component(const ShearFlowSpec& spec, const Grid& plane, int i, double t) {
    require(plane.dims == 2, ErrorCode::Domain, "shear flow is sampled on a 2D (x1, x2) grid");
    return Field::sample(plane, [&](const Vec3& p) { return shear_velocity(spec, {p[0], p[1], 0.0}, t)[static_cast<std::size_t>(i)]; });
}

/// W^{1,inf} norm from the closed-form velocity and gradient on the grid.
inline double shear_w1inf(const ShearFlowSpec& spec, const Grid& plane, double t) {
    double umax = 0.0, gmax = 0.0;
    for (std::size_t f = 0; f < plane.size(); ++f) {
        const auto p = plane.point(f);
        const Vec3 x{p[0], p[1], 0.0};
        const auto u = shear_velocity(spec, x, t);
        umax = std::max(umax, std::hypot(u[0], u[1], u[2]));
        for (const auto& row : shear_gradient(spec, x, t))
            for (double v : row) gmax = std::max(gmax, std::abs(v));
    }
    return umax + gmax;
}

// ---------------------------------------------------------------------------
// Radius reference

struct ShearRadiusOptions {
    std::optional<Grid> grid;  // default: adaptive, see shear_reference_grid
    double tail_tol = 1e-10;
};

/// Grid resolving u3 at time t. Along x1 the coefficients of g fall like
/// e^{-a n}, a = asinh(tau0), so |n| <= 37/a reaches 1e-16; a mode n spreads
/// over |m| <= n t in x2 (Bessel factor J_m(n t)).
inline Grid shear_reference_grid(const ShearFlowSpec& spec, double t) {
    const double a = std::asinh(spec.tau0);
    const double n_max = std::ceil(37.0 / a);
    auto pow2 = [](double need) {
        int p = 16;
        while (p < need) p *= 2;
        return p;
    };
    const int n1 = std::max(256, pow2(2.0 * n_max + 32.0));
    const int n2 = std::max(n1, pow2(2.0 * (1.1 * n_max * t + 32.0)));
    return Grid::plane(n1, n2);
}

/// Radius measured by a 2D shell fit (s = 1) of the FFT of u3 at time t.
inline RadiusFit shear_radius_fit(const ShearFlowSpec& spec, double t, const ShearRadiusOptions& opt = {}) {
    require(spec.g == ShearProfile::AnalyticPole, ErrorCode::Domain, "radius reference needs the analytic profile");
    require(t >= 0.0, ErrorCode::Domain, "time must be non-negative");
    const Grid grid = opt.grid.value_or(shear_reference_grid(spec, t));
    const auto sp = forward_transform(shear_component(spec, grid, 2, t));
    const int shells = std::max(grid.n[0], grid.n[1]) / 2;
    const auto profile = shell_profile(sp, shells);
    const double tail = tail_ratio(profile);
    require(tail <= opt.tail_tol, ErrorCode::Unresolved,
            "shear spectrum tail " + std::to_string(tail) + " at t=" + std::to_string(t) + "; refine the grid");
    FitOptions fo;
    fo.s = 1.0;
    return fit_profile(profile, fo);
}

/// arcsinh(tau0) at t = 0 (pole of g nearest the real axis), the measured
/// uniform radius for t > 0.
inline double shear_radius_reference(const ShearFlowSpec& spec, double t, const ShearRadiusOptions& opt = {}) {
    require(spec.g == ShearProfile::AnalyticPole, ErrorCode::Domain, "radius reference needs the analytic profile");
    require(t >= 0.0, ErrorCode::Domain, "time must be non-negative");
    if (t == 0.0) return std::asinh(spec.tau0);
    return shear_radius_fit(spec, t, opt).tau;
}

// ---------------------------------------------------------------------------
// Steady 2D states

/// omega = A sin x sin y, a Laplacian eigenfunction (Delta psi = -2 psi).
inline Field steady_state_field(double amplitude, const Grid& g) {
    require(g.dims == 2, ErrorCode::Domain, "steady state lives on a 2D grid");
    return Field::sample(g, [&](const Vec3& p) { return amplitude * std::sin(p[0]) * std::sin(p[1]); });
}

/// omega = sum_{n>=1} rho^n cos(n y), a steady shear whose coefficients
/// decay exactly like e^{-|k| ln(1/rho)}: the constant-radius control.
inline Field steady_shear_field(double rho, const Grid& g) {
    require(g.dims == 2, ErrorCode::Domain, "steady state lives on a 2D grid");
    require(rho > 0.0 && rho < 1.0, ErrorCode::Domain, "rho must lie in (0, 1)");
    return Field::sample(g, [&](const Vec3& p) {
        const double c = std::cos(p[1]);
        return (rho * c - rho * rho) / (1.0 - 2.0 * rho * c + rho * rho);
    });
}

}  // namespace gevrey
