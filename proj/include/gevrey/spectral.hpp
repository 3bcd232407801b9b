#pragma once

// Fourier-side measurements: shell profiles, the radius-of-regularity fit,
// W^{1,inf} / H^r / Gevrey-weighted norms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "gevrey/error.hpp"
#include "gevrey/grid.hpp"
#include "gevrey/spectrum.hpp"

namespace gevrey {

/// Number of complete shells: the largest radius fully inside the lattice.
inline int resolvable_shells(const Grid& g) {
    int k = g.n[0] / 2;
    for (int d = 1; d < g.dims; ++d) k = std::min(k, g.points(d) / 2);
    return k;
}

/// Shell maxima: entry kappa is max |hat u_k| over kappa <= |k| < kappa + 1.
/// `max_shell` (0 = default) sets the profile length; modes beyond it are
/// ignored.
inline std::vector<double> shell_profile(const Spectrum& sp, int max_shell = 0) {
    require(sp.size() > 0, ErrorCode::Domain, "empty spectrum");
    const int shells = max_shell > 0 ? max_shell : resolvable_shells(sp.grid());
    std::vector<double> prof(static_cast<std::size_t>(shells), 0.0);
    const auto& c = sp.coeffs();
    for (std::size_t f = 0; f < c.size(); ++f) {
        const auto kappa = static_cast<std::size_t>(Spectrum::norm(sp.wavevector(f)));
        if (kappa < prof.size()) prof[kappa] = std::max(prof[kappa], std::abs(c[f]));
    }
    return prof;
}

/// Largest profile value over the outer tenth of the shells, relative to the
/// global maximum (0 for a zero spectrum).
inline double tail_ratio(std::span<const double> profile) {
    if (profile.empty()) return 0.0;
    const double peak = *std::max_element(profile.begin(), profile.end());
    if (peak <= 0.0) return 0.0;
    const std::size_t n = profile.size();
    const std::size_t band = std::max<std::size_t>(2, n / 10);
    double tail = 0.0;
    for (std::size_t i = n - std::min(band, n); i < n; ++i) tail = std::max(tail, profile[i]);
    return tail / peak;
}

inline double tail_ratio(const Spectrum& sp, int max_shell = 0) { return tail_ratio(shell_profile(sp, max_shell)); }

// ---------------------------------------------------------------------------
// Radius fit

struct RadiusFit {
    double tau = 0.0;
    double s = 1.0;
    double logM = 0.0;
    double residual = 0.0;
    int k_lo = 0;
    int k_hi = 0;
    int shells_used = 0;
};

struct FitOptions {
    std::optional<double> s;      // fixed Gevrey index; grid search over [s_min, s_max] if empty
    int k_lo = 4;                 // first shell of the window
    std::optional<int> k_hi;      // last shell; default = last shell above the floor minus 2
    int max_shell = 0;            // profile length, 0 = complete shells only
    double floor_rel = 1e-13;     // shells below floor_rel * max are dropped
    double s_min = 1.0;
    double s_max = 4.0;
    double s_step = 0.05;
    int min_shells = 8;
};

namespace detail {

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms = 0.0;
};

inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += r * r;
    }
    fit.rms = std::sqrt(ss / n);
    return fit;
}

}  // namespace detail

/// Fits log(profile[kappa]) = logM - tau * kappa^{1/s} over the window.
inline RadiusFit fit_profile(std::span<const double> profile, const FitOptions& opt = {}) {
    require(!profile.empty(), ErrorCode::FitUnderdetermined, "empty shell profile");
    const double peak = *std::max_element(profile.begin(), profile.end());
    require(peak > 0.0, ErrorCode::FitUnderdetermined, "zero spectrum");
    const double floor = opt.floor_rel * peak;

    int last = -1;
    for (int k = static_cast<int>(profile.size()) - 1; k >= 0; --k)
        if (profile[static_cast<std::size_t>(k)] > floor) {
            last = k;
            break;
        }
    const int lo = opt.k_lo;
    const int hi = opt.k_hi ? std::min(*opt.k_hi, static_cast<int>(profile.size()) - 1) : last - 2;

    std::vector<double> kappa, logp;
    for (int k = std::max(lo, 0); k <= hi; ++k) {
        const double v = profile[static_cast<std::size_t>(k)];
        if (v > floor) {
            kappa.push_back(static_cast<double>(k));
            logp.push_back(std::log(v));
        }
    }
    require(static_cast<int>(kappa.size()) >= opt.min_shells, ErrorCode::FitUnderdetermined,
            "only " + std::to_string(kappa.size()) + " usable shells in window [" + std::to_string(lo) + ", " +
                std::to_string(hi) + "]");

    auto fit_at = [&](double s) {
        std::vector<double> x(kappa.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::pow(kappa[i], 1.0 / s);
        return detail::least_squares(x, logp);
    };

    double best_s = opt.s.value_or(opt.s_min);
    if (!opt.s) {
        double best_rms = std::numeric_limits<double>::infinity();
        const int steps = static_cast<int>(std::lround((opt.s_max - opt.s_min) / opt.s_step));
        for (int i = 0; i <= steps; ++i) {
            const double s = opt.s_min + i * opt.s_step;
            const double rms = fit_at(s).rms;
            if (rms < best_rms) {
                best_rms = rms;
                best_s = s;
            }
        }
    }
    const auto line = fit_at(best_s);

    RadiusFit out;
    out.tau = -line.slope;
    out.s = best_s;
    out.logM = line.intercept;
    out.residual = line.rms;
    out.k_lo = static_cast<int>(kappa.front());
    out.k_hi = static_cast<int>(kappa.back());
    out.shells_used = static_cast<int>(kappa.size());
    require(out.tau > 0.0, ErrorCode::NoDecay, "fitted radius is not positive: " + std::to_string(out.tau));
    return out;
}

inline RadiusFit estimate_radius(const Spectrum& sp, const FitOptions& opt = {}) {
    return fit_profile(shell_profile(sp, opt.max_shell), opt);
}

// ---------------------------------------------------------------------------
// Norms

/// |u|_inf + |grad u|_inf on the collocation grid; |u| is the pointwise
/// Euclidean norm over components, |grad u| the largest |d_j u_i|.
inline double sup_norm(std::span<const Field> u, std::span<const Field> grad) {
    double umax = 0.0;
    if (!u.empty()) {
        const std::size_t n = u.front().values.size();
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (const auto& c : u) s += c.values[i] * c.values[i];
            umax = std::max(umax, std::sqrt(s));
        }
    }
    double gmax = 0.0;
    for (const auto& g : grad) gmax = std::max(gmax, g.max_abs());
    return umax + gmax;
}

struct W1InfOptions {
    double tail_tol = 1e-10;
    int max_shell = 0;
};

/// W^{1,inf} norm N of a vector field given by its component spectra.
inline double w1inf_norm(std::span<const Spectrum> u_hat, const W1InfOptions& opt = {}) {
    std::vector<Field> u, grad;
    for (const auto& c : u_hat) {
        const double tail = tail_ratio(c, opt.max_shell);
        require(tail <= opt.tail_tol, ErrorCode::Unresolved,
                "spectrum tail " + std::to_string(tail) + " exceeds " + std::to_string(opt.tail_tol));
        u.push_back(inverse_transform(c));
        for (int d = 0; d < c.grid().dims; ++d) grad.push_back(inverse_transform(derivative(c, d)));
    }
    return sup_norm(u, grad);
}

inline double sobolev_norm(const Spectrum& sp, int r) {
    require(r >= 0 && r <= 8, ErrorCode::Domain, "Sobolev index must be in [0, 8]");
    double sum = 0.0;
    const auto& c = sp.coeffs();
    for (std::size_t f = 0; f < c.size(); ++f)
        sum += std::pow(1.0 + Spectrum::norm2(sp.wavevector(f)), r) * std::norm(c[f]);
    return std::sqrt(sum);
}

inline double sobolev_norm(std::span<const Spectrum> u_hat, int r) {
    double sum = 0.0;
    for (const auto& c : u_hat) {
        const double m = sobolev_norm(c, r);
        sum += m * m;
    }
    return std::sqrt(sum);
}

/// Fourier-side Gevrey norm sqrt(sum (1+|k|^2)^r e^{2 tau |k|^{1/s}} |hat u_k|^2).
///
/// Throws DIVERGED when a partial sum passes 1e300, or when the shell sums
/// over the outer half of the lattice grow with |k| (the weight outruns the
/// decay, i.e. tau is at or beyond the field's radius).
inline double gevrey_norm(const Spectrum& sp, double tau, double s, int r) {
    require(tau >= 0.0, ErrorCode::Domain, "Gevrey radius must be non-negative");
    require(s >= 1.0, ErrorCode::Domain, "Gevrey index must be >= 1");
    require(r >= 0 && r <= 8, ErrorCode::Domain, "Sobolev index must be in [0, 8]");

    const auto& c = sp.coeffs();
    std::vector<double> shell_sum;
    for (std::size_t f = 0; f < c.size(); ++f) {
        const auto k = sp.wavevector(f);
        const double kn = Spectrum::norm(k);
        const auto shell = static_cast<std::size_t>(kn);
        if (shell >= shell_sum.size()) shell_sum.resize(shell + 1, 0.0);
        const double a2 = std::norm(c[f]);
        if (a2 == 0.0) continue;
        // Weight in log space so e^{2 tau |k|^{1/s}} cannot overflow on its own.
        const double logw = r * std::log1p(Spectrum::norm2(k)) + 2.0 * tau * std::pow(kn, 1.0 / s) + std::log(a2);
        shell_sum[shell] += logw > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(logw);
    }

    double total = 0.0;
    for (double v : shell_sum) {
        total += v;
        if (!std::isfinite(total) || total > 1e300) fail(ErrorCode::Diverged, "Gevrey partial sum exceeded 1e300");
    }

    std::vector<double> x, y;
    for (std::size_t k = shell_sum.size() / 2; k < shell_sum.size(); ++k)
        if (shell_sum[k] > 0.0) {
            x.push_back(static_cast<double>(k));
            y.push_back(std::log(shell_sum[k]));
        }
    if (x.size() >= 4 && detail::least_squares(x, y).slope > 0.0)
        fail(ErrorCode::Diverged, "Gevrey shell sums grow in the tail");
    return std::sqrt(total);
}

inline double gevrey_norm(std::span<const Spectrum> u_hat, double tau, double s, int r) {
    double sum = 0.0;
    for (const auto& c : u_hat) {
        const double g = gevrey_norm(c, tau, s, r);
        sum += g * g;
    }
    return std::sqrt(sum);
}

}  // namespace gevrey
