#pragma once

// Lower bounds on the radius of Gevrey-class regularity from norm traces:
// the radius ODE, its explicit solution, the compact short-time bound, the
// patched global bound and the norm growth bounds that feed them.
//
// Radii are carried as logarithms: with realistic constants the bounds drop
// far below the smallest double long before the traces end.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "gevrey/csv.hpp"
#include "gevrey/error.hpp"
#include "gevrey/lagrangian.hpp"

namespace gevrey {

struct BoundParams {
    double C0 = 10.0;
    double C = 10.0;
    double tau0 = 0.1;
    double tau_star = 2.0;
    double eps = 0.5;
    double a_star = 0.9;
    double Q0 = 1.0;
    double r_star = 1.0;
    double ode_dt = 1e-4;  // largest RK4 substep for the radius ODE

    void validate() const {
        require(C0 > 0 && C > 0 && tau0 > 0 && tau_star > 0 && eps > 0 && Q0 >= 0 && r_star > 0 && ode_dt > 0,
                ErrorCode::Domain, "bound parameters must be positive");
        require(tau0 <= eps * tau_star, ErrorCode::Domain, "tau0 must not exceed eps * tau_star");
        require(a_star > 0.0 && a_star <= 1.0, ErrorCode::Domain, "a_star must lie in (0, 1]");
    }
};

/// Sampled t, N, M, K with piecewise-linear interpolation between samples.
struct NormSeries {
    std::vector<double> t, N, M, K;

    static NormSeries from_trace(const NormTrace& tr) {
        NormSeries s;
        for (const auto& x : tr.samples) {
            s.t.push_back(x.t);
            s.N.push_back(x.N);
            s.M.push_back(x.M);
            s.K.push_back(x.K);
        }
        return s;
    }

    /// K by the trapezoid rule from N.
    static NormSeries from_samples(std::vector<double> t, std::vector<double> N, std::vector<double> M) {
        NormSeries s{std::move(t), std::move(N), std::move(M), {}};
        s.K = s.cumulative(s.N);
        return s;
    }

    void validate() const {
        require(!t.empty(), ErrorCode::EmptyTrace, "empty norm trace");
        require(N.size() == t.size() && M.size() == t.size() && K.size() == t.size(), ErrorCode::SizeMismatch,
                "norm trace columns differ in length");
        for (std::size_t i = 0; i < t.size(); ++i) {
            require(std::isfinite(N[i]) && std::isfinite(M[i]) && std::isfinite(K[i]), ErrorCode::Domain,
                    "norm trace has non-finite entries");
            if (i) require(t[i] > t[i - 1], ErrorCode::Domain, "trace times must increase");
        }
    }

    std::size_t size() const noexcept { return t.size(); }

    /// Trapezoid running integral of f over the sample times.
    std::vector<double> cumulative(const std::vector<double>& f) const {
        std::vector<double> out(t.size(), 0.0);
        for (std::size_t i = 1; i < t.size(); ++i) out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (f[i - 1] + f[i]);
        return out;
    }

    /// Linear interpolation of column f at time s (clamped to the trace).
    double interp(const std::vector<double>& f, double s) const {
        if (s <= t.front()) return f.front();
        if (s >= t.back()) return f.back();
        const auto it = std::upper_bound(t.begin(), t.end(), s);
        const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
        const double w = (s - t[i]) / (t[i + 1] - t[i]);
        return f[i] + w * (f[i + 1] - f[i]);
    }
};

// ---------------------------------------------------------------------------
// Growth bounds and L

/// Q0 + C0 int_0^t (1 + K^2) M^2.
inline std::vector<double> gevrey_growth_bound(const NormSeries& s, const BoundParams& p) {
    s.validate();
    std::vector<double> f(s.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = (1.0 + s.K[i] * s.K[i]) * s.M[i] * s.M[i];
    auto q = s.cumulative(f);
    for (double& v : q) v = p.Q0 + p.C0 * v;
    return q;
}

/// sqrt(C) M0 e^{C K / 2}.
inline double sobolev_growth_bound(double M0, double K, double C) { return std::sqrt(C) * M0 * std::exp(0.5 * C * K); }

/// L = C0 M + (1 + C0 (1 + K^3)) Q_bound.
inline std::vector<double> L_of_t(const NormSeries& s, const BoundParams& p) {
    const auto q = gevrey_growth_bound(s, p);
    std::vector<double> L(s.size());
    for (std::size_t i = 0; i < L.size(); ++i) L[i] = p.C0 * s.M[i] + (1.0 + p.C0 * (1.0 + std::pow(s.K[i], 3))) * q[i];
    return L;
}

// ---------------------------------------------------------------------------
// Radius ODE: tau' + C0 tau N + C0 tau^{3/2} L = 0, tau(t0) = tau0.

/// log tau at the sample times. RK4 in y = log tau, y' = -C0 N - C0 e^{y/2} L,
/// with N and L linear inside each cell and substeps no longer than ode_dt.
inline std::vector<double> log_tau_ode(const std::vector<double>& t, const std::vector<double>& N,
                                       const std::vector<double>& L, const BoundParams& p) {
    require(!t.empty() && N.size() == t.size() && L.size() == t.size(), ErrorCode::EmptyTrace, "bad ODE inputs");
    p.validate();
    std::vector<double> y(t.size());
    y[0] = std::log(p.tau0);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double span = t[i + 1] - t[i];
        const long n = std::max(1L, static_cast<long>(std::ceil(span / p.ode_dt - 1e-9)));
        const double h = span / static_cast<double>(n);
        auto rhs = [&](double s, double yy) {
            const double w = s / span;
            const double Ns = N[i] + w * (N[i + 1] - N[i]);
            const double Ls = L[i] + w * (L[i + 1] - L[i]);
            return -p.C0 * Ns - p.C0 * std::exp(0.5 * yy) * Ls;
        };
        double yy = y[i];
        for (long j = 0; j < n; ++j) {
            const double s = static_cast<double>(j) * h;
            const double k1 = rhs(s, yy);
            const double k2 = rhs(s + 0.5 * h, yy + 0.5 * h * k1);
            const double k3 = rhs(s + 0.5 * h, yy + 0.5 * h * k2);
            const double k4 = rhs(s + h, yy + h * k3);
            yy += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        y[i + 1] = yy;
    }
    return y;
}

/// tau itself; STEP_UNDERFLOW once tau drops below 1e-300.
inline std::vector<double> integrate_tau_ode(const std::vector<double>& t, const std::vector<double>& N,
                                             const std::vector<double>& L, const BoundParams& p) {
    auto y = log_tau_ode(t, N, L, p);
    for (std::size_t i = 0; i < y.size(); ++i) {
        require(y[i] >= std::log(1e-300), ErrorCode::StepUnderflow,
                "radius ODE fell below 1e-300 at t=" + format_double(t[i]));
        y[i] = std::exp(y[i]);
    }
    return y;
}

inline std::vector<double> integrate_tau_ode(const NormSeries& s, const BoundParams& p) {
    s.validate();
    return integrate_tau_ode(s.t, s.N, L_of_t(s, p), p);
}

// ---------------------------------------------------------------------------
// Explicit forms

/// log of e^{-C0 K} (tau0^{-1/2} + C0 int_0^t L e^{-C0 K})^{-2}, trapezoidal.
inline std::vector<double> log_tau_closed(const std::vector<double>& t, const std::vector<double>& K,
                                          const std::vector<double>& L, const BoundParams& p) {
    require(!t.empty() && K.size() == t.size() && L.size() == t.size(), ErrorCode::EmptyTrace, "bad inputs");
    p.validate();
    std::vector<double> out(t.size());
    double integral = 0.0;
    auto f = [&](std::size_t i) { return L[i] * std::exp(-p.C0 * K[i]); };
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) integral += 0.5 * (t[i] - t[i - 1]) * (f(i - 1) + f(i));
        out[i] = -p.C0 * K[i] - 2.0 * std::log(1.0 / std::sqrt(p.tau0) + p.C0 * integral);
    }
    return out;
}

inline std::vector<double> tau_closed_form(const NormSeries& s, const BoundParams& p) {
    s.validate();
    auto y = log_tau_closed(s.t, s.K, L_of_t(s, p), p);
    for (double& v : y) v = std::exp(v);
    return y;
}

/// log of tau0 (1 + C t Q0 + C t^2 M0^2)^{-2} e^{-C K}.
inline double log_tau_compact(double t, double M0, double Q0, double K, const BoundParams& p) {
    require(t >= 0.0, ErrorCode::Domain, "time must be non-negative");
    return std::log(p.tau0) - 2.0 * std::log1p(p.C * t * Q0 + p.C * t * t * M0 * M0) - p.C * K;
}

inline double tau_compact(double t, double M0, double Q0, double K, const BoundParams& p) {
    return std::exp(log_tau_compact(t, M0, Q0, K, p));
}

/// log of C tau0 e^{-C K^2} e^{-C t Q0 - C t^2 M0^2}.
inline double log_tau_global_compact(double t, double M0, double Q0, double K, const BoundParams& p) {
    return std::log(p.C * p.tau0) - p.C * K * K - p.C * t * Q0 - p.C * t * t * M0 * M0;
}

struct GlobalBound {
    double log_recursion = 0.0;  // iterated per-segment bound
    double log_compact = 0.0;    // final closed form
    std::vector<Segment> segments;
    std::vector<double> Q;       // Q_0 .. Q_k
};

/// Patched bound at the trace end: segments from patch_schedule(N, r_star),
///   tau_k = a*^2 tau_{k-1} (1 + C D Q_{k-1} + C D^2 M^2(T_{k-1}))^{-2} e^{C K(T_{k-1}) - C K(T_k)},
///   Q_k   = Q_{k-1} + C int_{T_{k-1}}^{T_k} (1 + K^2) M^2,
/// with D = T_k - T_{k-1}, alongside the compact final form.
inline GlobalBound tau_global(const NormSeries& s, const BoundParams& p) {
    s.validate();
    p.validate();
    GlobalBound out;
    out.segments = patch_schedule(NTrace{s.t, s.N}, p.r_star);

    std::vector<double> f(s.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = (1.0 + s.K[i] * s.K[i]) * s.M[i] * s.M[i];
    const auto I = s.cumulative(f);

    double log_tau = std::log(p.tau0);
    double Q = p.Q0;
    out.Q.push_back(Q);
    const double two_log_a = 2.0 * std::log(p.a_star);
    for (const auto& seg : out.segments) {
        const double D = seg.T_end - seg.T_start;
        const double M = s.interp(s.M, seg.T_start);
        const double Ka = s.interp(s.K, seg.T_start), Kb = s.interp(s.K, seg.T_end);
        log_tau += two_log_a - 2.0 * std::log1p(p.C * D * Q + p.C * D * D * M * M) + p.C * (Ka - Kb);
        Q += p.C * (s.interp(I, seg.T_end) - s.interp(I, seg.T_start));
        out.Q.push_back(Q);
    }
    out.log_recursion = log_tau;
    out.log_compact = log_tau_global_compact(s.t.back() - s.t.front(), s.M.front(), p.Q0, s.K.back(), p);
    return out;
}

// ---------------------------------------------------------------------------
// Bound trace

struct BoundTrace {
    std::vector<double> t, L, log_tau_ode, log_tau_closed, log_tau_compact, log_tau_global, Q_bound, M_bound;

    CsvTable table() const {
        CsvTable out;
        out.header = {"t", "L", "tau_ode", "tau_closed", "tau_compact", "tau_global", "Q_bound", "M_bound"};
        for (std::size_t i = 0; i < t.size(); ++i)
            out.rows.push_back({t[i], L[i], std::exp(log_tau_ode[i]), std::exp(log_tau_closed[i]),
                                std::exp(log_tau_compact[i]), std::exp(log_tau_global[i]), Q_bound[i], M_bound[i]});
        return out;
    }

    /// Same rows with the radii as natural logarithms.
    CsvTable log_table() const {
        CsvTable out;
        out.header = {"t", "log_tau_ode", "log_tau_closed", "log_tau_compact", "log_tau_global"};
        for (std::size_t i = 0; i < t.size(); ++i)
            out.rows.push_back({t[i], log_tau_ode[i], log_tau_closed[i], log_tau_compact[i], log_tau_global[i]});
        return out;
    }
};

/// Every bound column along the trace. tau_global is the compact final form
/// evaluated at each sample time.
inline BoundTrace bound_trace(const NormSeries& s, const BoundParams& p) {
    s.validate();
    p.validate();
    BoundTrace b;
    b.t = s.t;
    b.L = L_of_t(s, p);
    b.Q_bound = gevrey_growth_bound(s, p);
    b.log_tau_ode = log_tau_ode(s.t, s.N, b.L, p);
    b.log_tau_closed = log_tau_closed(s.t, s.K, b.L, p);
    const double M0 = s.M.front();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double dt = s.t[i] - s.t.front();
        b.log_tau_compact.push_back(log_tau_compact(dt, M0, p.Q0, s.K[i], p));
        b.log_tau_global.push_back(log_tau_global_compact(dt, M0, p.Q0, s.K[i], p));
        b.M_bound.push_back(sobolev_growth_bound(M0, s.K[i], p.C));
    }
    return b;
}

// ---------------------------------------------------------------------------
// Calibration against a measured initial radius

/// tau0 = min(tau_measured / 2, eps tau_star) (the initial radius may always
/// be decreased, and halving it keeps the initial Gevrey norm finite); C is
/// halved from its starting value until C tau0 <= tau_measured / 2, i.e. the
/// t = 0 ordering holds with a factor-2 margin.
inline BoundParams calibrate(BoundParams p, double tau_measured) {
    require(tau_measured > 0.0, ErrorCode::Domain, "measured radius must be positive");
    p.tau0 = std::min(0.5 * tau_measured, p.eps * p.tau_star);
    for (int i = 0; i < 200 && p.C * p.tau0 > 0.5 * tau_measured; ++i) p.C *= 0.5;
    return p;
}

}  // namespace gevrey
