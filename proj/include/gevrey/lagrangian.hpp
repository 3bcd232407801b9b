#pragma once

// Particle paths dx/dt = u(x, t), flow-map Jacobians from companion
// stencils, and the chart-patching bookkeeping driven by N(t) traces.

#include <cmath>
#include <functional>
#include <vector>

#include "gevrey/csv.hpp"
#include "gevrey/error.hpp"
#include "gevrey/euler2d.hpp"
#include "gevrey/grid.hpp"
#include "gevrey/spectrum.hpp"

namespace gevrey {

using VelocityField = std::function<Vec3(const Vec3&, double)>;

/// Tracer points plus, per point, 2*dims companions at a +- h e_j. All
/// positions are unwrapped (not reduced modulo 2 pi).
class TracerSet {
public:
    TracerSet(std::vector<Vec3> points, int dims, double h) : dims_(dims), h_(h), initial_(std::move(points)) {
        require(dims == 2 || dims == 3, ErrorCode::Domain, "tracers live in 2 or 3 dimensions");
        require(h > 0.0, ErrorCode::Domain, "stencil spacing must be positive");
        const std::size_t stride = 1 + 2 * static_cast<std::size_t>(dims);
        positions_.reserve(initial_.size() * stride);
        for (const auto& a : initial_) {
            positions_.push_back(a);
            for (int j = 0; j < dims; ++j)
                for (double sgn : {1.0, -1.0}) {
                    Vec3 p = a;
                    p[static_cast<std::size_t>(j)] += sgn * h;
                    positions_.push_back(p);
                }
        }
    }

    int dims() const noexcept { return dims_; }
    double spacing() const noexcept { return h_; }
    double time() const noexcept { return t_; }
    std::size_t count() const noexcept { return initial_.size(); }
    std::size_t stride() const noexcept { return 1 + 2 * static_cast<std::size_t>(dims_); }

    const Vec3& initial(std::size_t i) const { return initial_[i]; }
    const Vec3& point(std::size_t i) const { return positions_[i * stride()]; }

    /// Every tracked position (points and companions).
    std::vector<Vec3>& positions() noexcept { return positions_; }
    const std::vector<Vec3>& positions() const noexcept { return positions_; }

    void set_time(double t) noexcept { t_ = t; }

private:
    int dims_;
    double h_;
    double t_ = 0.0;
    std::vector<Vec3> initial_;
    std::vector<Vec3> positions_;
};

namespace detail {

inline Vec3 axpy(const Vec3& x, double a, const Vec3& k) { return {x[0] + a * k[0], x[1] + a * k[1], x[2] + a * k[2]}; }

}  // namespace detail

/// Classical RK4, n_steps of size dt, with a velocity given in closed form.
inline void advect(TracerSet& tr, const VelocityField& u, double dt, long n_steps) {
    require(dt > 0.0 && n_steps >= 0, ErrorCode::Domain, "bad step parameters");
    auto& xs = tr.positions();
    const long first = std::lround(tr.time() / dt);
    for (long n = 0; n < n_steps; ++n) {
        const double t = static_cast<double>(first + n) * dt;
        for (auto& x : xs) {
            const Vec3 k1 = u(x, t);
            const Vec3 k2 = u(detail::axpy(x, 0.5 * dt, k1), t + 0.5 * dt);
            const Vec3 k3 = u(detail::axpy(x, 0.5 * dt, k2), t + 0.5 * dt);
            const Vec3 k4 = u(detail::axpy(x, dt, k3), t + dt);
            for (int i = 0; i < 3; ++i) x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    tr.set_time(static_cast<double>(first + n_steps) * dt);
}

/// det of the central-difference flow-map gradient, per point.
inline std::vector<double> jacobian_dets(const TracerSet& tr) {
    const auto& xs = tr.positions();
    const int d = tr.dims();
    const double h2 = 2.0 * tr.spacing();
    std::vector<double> out;
    out.reserve(tr.count());
    for (std::size_t p = 0; p < tr.count(); ++p) {
        const std::size_t base = p * tr.stride();
        double J[3][3] = {};
        for (int j = 0; j < d; ++j) {
            const Vec3& plus = xs[base + 1 + 2 * static_cast<std::size_t>(j)];
            const Vec3& minus = xs[base + 2 + 2 * static_cast<std::size_t>(j)];
            for (int i = 0; i < d; ++i) J[i][j] = (plus[i] - minus[i]) / h2;
        }
        if (d == 2) {
            out.push_back(J[0][0] * J[1][1] - J[0][1] * J[1][0]);
        } else {
            out.push_back(J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                          J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                          J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Off-grid velocity of a 2D spectral field

/// Evaluates (u, v) from their spectra at arbitrary points: a direct mode sum
/// when at most 64^2 modes are nonzero, otherwise Keys bicubic interpolation
/// on a grid oversampled 8x by zero padding.
class SpectralInterpolant {
public:
    static constexpr std::size_t direct_limit = 64 * 64;
    static constexpr int oversample = 8;

    SpectralInterpolant(const Spectrum& u, const Spectrum& v) {
        require(u.grid().dims == 2 && u.grid() == v.grid(), ErrorCode::Domain, "need two 2D spectra on one grid");
        for (std::size_t f = 0; f < u.size(); ++f) {
            if (u[f] == Complex(0.0) && v[f] == Complex(0.0)) continue;
            const auto k = u.wavevector(f);
            modes_.push_back({k[0], k[1], u[f], v[f]});
            kmax_ = std::max({kmax_, std::abs(k[0]), std::abs(k[1])});
        }
        if (modes_.size() > direct_limit) build_fine(u, v);
    }

    bool direct() const noexcept { return fine_u_.empty(); }

    Vec3 operator()(const Vec3& x) const { return direct() ? eval_direct(x) : eval_fine(x); }

private:
    struct Mode {
        int a, b;
        Complex u, v;
    };

    Vec3 eval_direct(const Vec3& x) const {
        const int n = 2 * kmax_ + 1;
        thread_local std::vector<Complex> e1, e2;
        e1.resize(static_cast<std::size_t>(n));
        e2.resize(static_cast<std::size_t>(n));
        for (int k = -kmax_; k <= kmax_; ++k) {
            e1[static_cast<std::size_t>(k + kmax_)] = std::polar(1.0, k * x[0]);
            e2[static_cast<std::size_t>(k + kmax_)] = std::polar(1.0, k * x[1]);
        }
        double su = 0.0, sv = 0.0;
        for (const auto& m : modes_) {
            const Complex e = e1[static_cast<std::size_t>(m.a + kmax_)] * e2[static_cast<std::size_t>(m.b + kmax_)];
            su += m.u.real() * e.real() - m.u.imag() * e.imag();
            sv += m.v.real() * e.real() - m.v.imag() * e.imag();
        }
        return {su, sv, 0.0};
    }

    void build_fine(const Spectrum& u, const Spectrum& v) {
        fine_grid_ = Grid::plane(u.grid().n[0] * oversample, u.grid().n[1] * oversample);
        Spectrum fu(fine_grid_), fv(fine_grid_);
        for (const auto& m : modes_) {
            fu.at({m.a, m.b, 0}) = m.u;
            fv.at({m.a, m.b, 0}) = m.v;
        }
        fine_u_ = inverse_transform(fu).values;
        fine_v_ = inverse_transform(fv).values;
    }

    static double keys(double s) {
        s = std::abs(s);
        if (s < 1.0) return (1.5 * s - 2.5) * s * s + 1.0;
        if (s < 2.0) return ((-0.5 * s + 2.5) * s - 4.0) * s + 2.0;
        return 0.0;
    }

    Vec3 eval_fine(const Vec3& x) const {
        const int n0 = fine_grid_.n[0], n1 = fine_grid_.n[1];
        const double p0 = x[0] / fine_grid_.spacing(0), p1 = x[1] / fine_grid_.spacing(1);
        const double f0 = std::floor(p0), f1 = std::floor(p1);
        double su = 0.0, sv = 0.0;
        for (int i = -1; i <= 2; ++i) {
            const double wi = keys(p0 - (f0 + i));
            const int ii = ((static_cast<int>(f0) + i) % n0 + n0) % n0;
            for (int j = -1; j <= 2; ++j) {
                const double w = wi * keys(p1 - (f1 + j));
                const int jj = ((static_cast<int>(f1) + j) % n1 + n1) % n1;
                const std::size_t f = fine_grid_.flat(ii, jj);
                su += w * fine_u_[f];
                sv += w * fine_v_[f];
            }
        }
        return {su, sv, 0.0};
    }

    std::vector<Mode> modes_;
    int kmax_ = 0;
    Grid fine_grid_;
    std::vector<double> fine_u_, fine_v_;
};

/// Advances solver and tracers together: every RK4 stage of the vorticity
/// also evaluates the tracer velocity from that stage's vorticity.
inline void advect_with_solver(TracerSet& tr, SolverState& s, double dt, long n_steps) {
    require(tr.dims() == 2, ErrorCode::Domain, "2D solver drives 2D tracers");
    auto& xs = tr.positions();
    const std::size_t n = xs.size();
    std::array<std::vector<Vec3>, 4> k;
    for (auto& v : k) v.resize(n);
    static constexpr double c[4] = {0.0, 0.5, 0.5, 1.0};
    for (long it = 0; it < n_steps; ++it) {
        step(s, dt, [&](int stage, const Spectrum& w, double) {
            const auto uv = velocity_spectra(w, *s.lattice);
            const SpectralInterpolant vel(uv[0], uv[1]);
            const auto si = static_cast<std::size_t>(stage);
            for (std::size_t p = 0; p < n; ++p)
                k[si][p] = vel(stage == 0 ? xs[p] : detail::axpy(xs[p], c[stage] * dt, k[si - 1][p]));
        });
        for (std::size_t p = 0; p < n; ++p)
            for (int i = 0; i < 2; ++i) xs[p][i] += dt / 6.0 * (k[0][p][i] + 2.0 * k[1][p][i] + 2.0 * k[2][p][i] + k[3][p][i]);
    }
    tr.set_time(s.time());
}

inline CsvTable tracer_table(const std::vector<const TracerSet*>& snapshots) {
    CsvTable t;
    t.header = {"id", "t", "x1", "x2", "x3", "jac_det"};
    for (const auto* tr : snapshots) {
        const auto dets = jacobian_dets(*tr);
        for (std::size_t i = 0; i < tr->count(); ++i) {
            const auto& x = tr->point(i);
            t.rows.push_back({static_cast<double>(i), tr->time(), x[0], x[1], x[2], dets[i]});
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Patching

/// Piecewise-linear N(t) samples.
struct NTrace {
    std::vector<double> t;
    std::vector<double> N;

    void validate() const {
        require(!t.empty() && t.size() == N.size(), ErrorCode::EmptyTrace, "empty or ragged N trace");
        for (std::size_t i = 0; i < t.size(); ++i) {
            require(N[i] >= 0.0 && std::isfinite(N[i]), ErrorCode::Domain, "N must be finite and nonnegative");
            if (i) require(t[i] > t[i - 1], ErrorCode::Domain, "trace times must increase");
        }
    }
    double T() const { return t.back(); }

    /// Exact integral of the piecewise-linear interpolant over [a, b].
    double integral(double a, double b) const {
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < t.size(); ++i) {
            const double lo = std::max(a, t[i]), hi = std::min(b, t[i + 1]);
            if (hi <= lo) continue;
            sum += 0.5 * (hi - lo) * (at(i, lo) + at(i, hi));
        }
        return sum;
    }

    double at(std::size_t cell, double s) const {
        const double w = (s - t[cell]) / (t[cell + 1] - t[cell]);
        return N[cell] + w * (N[cell + 1] - N[cell]);
    }
};

struct ExitTime {
    double T1 = 0.0;
    bool exited = false;
};

/// Smallest T1 >= start with int_start^T1 N = r_star. Within the final cell
/// the integrand is linear, so T1 solves a quadratic exactly. Returns the
/// trace end (exited = false) if the integral never reaches r_star.
inline ExitTime chart_exit_time(const NTrace& tr, double r_star, std::optional<double> start = {}) {
    tr.validate();
    require(r_star > 0.0, ErrorCode::Domain, "r_star must be positive");
    const double t0 = start.value_or(tr.t.front());
    double remaining = r_star;
    for (std::size_t i = 0; i + 1 < tr.t.size(); ++i) {
        if (tr.t[i + 1] <= t0) continue;
        const double a = std::max(t0, tr.t[i]);
        const double b = tr.t[i + 1];
        const double na = tr.at(i, a), nb = tr.N[i + 1];
        const double cell = 0.5 * (b - a) * (na + nb);
        if (cell >= remaining) {
            const double slope = (nb - na) / (b - a);
            // na x + slope x^2 / 2 = remaining, in cancellation-free form.
            const double disc = std::max(0.0, na * na + 2.0 * slope * remaining);
            const double x = 2.0 * remaining / (na + std::sqrt(disc));
            return {std::min(a + x, b), true};
        }
        remaining -= cell;
    }
    return {tr.T(), false};
}

struct Segment {
    double T_start = 0.0, T_end = 0.0, K_increment = 0.0;
};

/// Repeated exits from t0: boundaries T0 = t0 < T1 < ... < Tk = T.
inline std::vector<Segment> patch_schedule(const NTrace& tr, double r_star) {
    tr.validate();
    std::vector<Segment> segs;
    double a = tr.t.front();
    const double T = tr.T();
    while (true) {
        const auto ex = chart_exit_time(tr, r_star, a);
        const double b = (ex.exited && ex.T1 < T) ? ex.T1 : T;
        segs.push_back({a, b, tr.integral(a, b)});
        if (b >= T) break;
        a = b;
    }
    return segs;
}

inline CsvTable schedule_table(const std::vector<Segment>& segs) {
    CsvTable t;
    t.header = {"segment", "T_start", "T_end", "K_increment"};
    for (std::size_t i = 0; i < segs.size(); ++i)
        t.rows.push_back({static_cast<double>(i), segs[i].T_start, segs[i].T_end, segs[i].K_increment});
    return t;
}

// ---------------------------------------------------------------------------
// Chart covers of the periodic box

struct Chart {
    Vec3 center{};
    double radius = 0.0;
};

struct ChartCover {
    int dims = 2;
    std::vector<Chart> charts;

    double r_star() const {
        require(!charts.empty(), ErrorCode::Domain, "empty cover");
        double r = charts.front().radius;
        for (const auto& c : charts) r = std::min(r, c.radius);
        return 0.5 * r;
    }
};

/// Euclidean distance on the torus of period 2 pi.
inline double torus_distance(const Vec3& a, const Vec3& b, int dims) {
    double s = 0.0;
    for (int i = 0; i < dims; ++i) {
        double d = std::fmod(std::abs(a[i] - b[i]), two_pi);
        d = std::min(d, two_pi - d);
        s += d * d;
    }
    return std::sqrt(s);
}

struct Multiplicity {
    int min = 0, max = 0;
};

/// Charts containing each sample (closed balls), reduced to min and max.
/// Throws GAP when some sample lies in no chart.
inline Multiplicity covering_check(const ChartCover& cover, const std::vector<Vec3>& samples) {
    require(!cover.charts.empty() && !samples.empty(), ErrorCode::Domain, "need charts and samples");
    for (const auto& c : cover.charts) require(c.radius > 0.0, ErrorCode::Domain, "chart radius must be positive");
    Multiplicity m{std::numeric_limits<int>::max(), 0};
    for (const auto& x : samples) {
        int n = 0;
        for (const auto& c : cover.charts) n += torus_distance(x, c.center, cover.dims) <= c.radius;
        m.min = std::min(m.min, n);
        m.max = std::max(m.max, n);
    }
    require(m.min > 0, ErrorCode::Gap, "cover leaves points uncovered");
    return m;
}

}  // namespace gevrey
