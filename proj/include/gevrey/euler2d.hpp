#pragma once

// Pseudospectral incompressible Euler on the 2-torus, vorticity form:
//   d omega / dt = -u . grad omega,  u = (d_y psi, -d_x psi),  -Delta psi = omega,
// classical RK4 at fixed dt with 2/3-rule dealiasing.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "json.hpp"

#include "gevrey/csv.hpp"
#include "gevrey/error.hpp"
#include "gevrey/grid.hpp"
#include "gevrey/spectral.hpp"
#include "gevrey/spectrum.hpp"

namespace gevrey {

/// Per-slot wavenumbers and the dealias mask |k_x|, |k_y| <= floor(N/3).
struct Lattice2D {
    std::vector<double> kx, ky, inv_k2;
    std::vector<unsigned char> mask;
    std::vector<std::size_t> mirror;  // slot of -k
    int cutoff = 0;
    std::size_t active = 0;

    explicit Lattice2D(const Grid& g) {
        require(g.dims == 2, ErrorCode::Domain, "2D solver needs a 2D grid");
        cutoff = std::min(g.n[0], g.n[1]) / 3;
        const std::size_t n = g.size();
        kx.resize(n);
        ky.resize(n);
        inv_k2.resize(n);
        mask.resize(n);
        mirror.resize(n);
        for (std::size_t f = 0; f < n; ++f) {
            const auto i = g.unflat(f);
            const int a = wavenumber(i[0], g.n[0]), b = wavenumber(i[1], g.n[1]);
            kx[f] = a;
            ky[f] = b;
            const double k2 = static_cast<double>(a) * a + static_cast<double>(b) * b;
            inv_k2[f] = k2 > 0 ? 1.0 / k2 : 0.0;
            mask[f] = (std::abs(a) <= cutoff && std::abs(b) <= cutoff) ? 1 : 0;
            active += mask[f];
            mirror[f] = g.flat(storage_slot(-a, g.n[0]), storage_slot(-b, g.n[1]));
        }
    }
};

struct SolverState {
    Grid grid;
    std::shared_ptr<const Lattice2D> lattice;
    Spectrum omega;
    long step = 0;
    double dt = 0.0;  // step size of the run that produced `step`

    double time() const noexcept { return static_cast<double>(step) * dt; }
};

inline void apply_mask(Spectrum& sp, const Lattice2D& lat) {
    auto& c = sp.coeffs();
    for (std::size_t f = 0; f < c.size(); ++f)
        if (!lat.mask[f]) c[f] = 0.0;
}

/// Same projection as Spectrum::enforce_conjugate_symmetry, with the mirror
/// slots precomputed.
inline void symmetrize(Spectrum& sp, const Lattice2D& lat) {
    auto& c = sp.coeffs();
    for (std::size_t f = 0; f < c.size(); ++f) {
        const std::size_t g = lat.mirror[f];
        if (g < f) continue;
        const Complex avg = 0.5 * (c[f] + std::conj(c[g]));
        c[f] = avg;
        c[g] = std::conj(avg);
    }
}

/// State from vorticity coefficients; rejects a nonzero mean (MEAN_MODE),
/// then masks and symmetrizes.
inline SolverState make_state(Spectrum omega) {
    require(omega.grid().dims == 2, ErrorCode::Domain, "2D solver needs a 2D grid");
    const double scale = std::max(1.0, omega.max_abs());
    require(std::abs(omega.at({0, 0, 0})) <= 1e-12 * scale, ErrorCode::MeanMode,
            "vorticity has nonzero mean " + std::to_string(std::abs(omega.at({0, 0, 0}))));
    SolverState s;
    s.grid = omega.grid();
    s.lattice = std::make_shared<Lattice2D>(s.grid);
    omega.at({0, 0, 0}) = 0.0;
    omega.enforce_conjugate_symmetry();
    apply_mask(omega, *s.lattice);
    s.omega = std::move(omega);
    return s;
}

inline SolverState make_state(const Field& omega) { return make_state(forward_transform(omega)); }

/// (hat u, hat v) from hat omega. Throws MEAN_MODE if the mean is nonzero.
inline std::array<Spectrum, 2> velocity_spectra(const Spectrum& omega, const Lattice2D& lat) {
    require(omega.coeffs()[0] == Complex(0.0) || std::abs(omega.coeffs()[0]) <= 1e-12 * std::max(1.0, omega.max_abs()),
            ErrorCode::MeanMode, "vorticity has nonzero mean");
    std::array<Spectrum, 2> uv{Spectrum(omega.grid()), Spectrum(omega.grid())};
    const auto& w = omega.coeffs();
    auto& u = uv[0].coeffs();
    auto& v = uv[1].coeffs();
    for (std::size_t f = 0; f < w.size(); ++f) {
        const Complex psi = w[f] * lat.inv_k2[f];
        u[f] = times_ik(lat.ky[f], psi);
        v[f] = times_ik(-lat.kx[f], psi);
    }
    return uv;
}

inline std::array<Field, 2> velocity_from_vorticity(const SolverState& s) {
    const auto uv = velocity_spectra(s.omega, *s.lattice);
    return {inverse_transform(uv[0]), inverse_transform(uv[1])};
}

/// -u . grad omega, dealiased and symmetrized.
inline Spectrum advection_rhs(const Spectrum& omega, const Lattice2D& lat) {
    const auto uv = velocity_spectra(omega, lat);
    const Field u = inverse_transform(uv[0]);
    const Field v = inverse_transform(uv[1]);
    Spectrum wx(omega.grid()), wy(omega.grid());
    const auto& w = omega.coeffs();
    for (std::size_t f = 0; f < w.size(); ++f) {
        wx[f] = times_ik(lat.kx[f], w[f]);
        wy[f] = times_ik(lat.ky[f], w[f]);
    }
    const Field dx = inverse_transform(wx);
    const Field dy = inverse_transform(wy);
    Field out(omega.grid());
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = -(u.values[i] * dx.values[i] + v.values[i] * dy.values[i]);
    auto rhs = forward_transform(out);
    apply_mask(rhs, lat);
    rhs.at({0, 0, 0}) = 0.0;
    symmetrize(rhs, lat);
    return rhs;
}

inline double max_speed(const SolverState& s) {
    const auto uv = velocity_from_vorticity(s);
    double m = 0.0;
    for (std::size_t i = 0; i < uv[0].values.size(); ++i) {
        const double a = uv[0].values[i], b = uv[1].values[i];
        m = std::max(m, a * a + b * b);
    }
    return std::sqrt(m);
}

/// Called once per RK4 stage with (stage index 0..3, stage vorticity, stage time).
using StageHook = std::function<void(int, const Spectrum&, double)>;

struct StepReport {
    bool cfl_violation = false;
};

/// One RK4 step. CFL (dt <= 0.5 dx / max|u|) is checked and reported, not
/// enforced; a non-finite coefficient throws NAN_DETECTED.
inline StepReport step(SolverState& s, double dt, const StageHook& hook = {}) {
    require(dt > 0.0, ErrorCode::Domain, "dt must be positive");
    if (s.step == 0) s.dt = dt;
    require(dt == s.dt, ErrorCode::Config, "dt differs from the run's step size");
    StepReport rep;
    const double dx = std::min(s.grid.spacing(0), s.grid.spacing(1));
    const double umax = max_speed(s);
    rep.cfl_violation = umax > 0.0 && dt > 0.5 * dx / umax;

    const Lattice2D& lat = *s.lattice;
    const double t = s.time();
    auto axpy = [](const Spectrum& a, double h, const Spectrum& k) {
        Spectrum out = a;
        auto& c = out.coeffs();
        const auto& d = k.coeffs();
        for (std::size_t f = 0; f < c.size(); ++f) c[f] += h * d[f];
        return out;
    };
    auto eval = [&](int stage, const Spectrum& w, double ts) {
        if (hook) hook(stage, w, ts);
        return advection_rhs(w, lat);
    };
    const Spectrum k1 = eval(0, s.omega, t);
    const Spectrum k2 = eval(1, axpy(s.omega, 0.5 * dt, k1), t + 0.5 * dt);
    const Spectrum k3 = eval(2, axpy(s.omega, 0.5 * dt, k2), t + 0.5 * dt);
    const Spectrum k4 = eval(3, axpy(s.omega, dt, k3), t + dt);

    auto& w = s.omega.coeffs();
    for (std::size_t f = 0; f < w.size(); ++f) {
        w[f] += dt / 6.0 * (k1[f] + 2.0 * k2[f] + 2.0 * k3[f] + k4[f]);
        if (!std::isfinite(w[f].real()) || !std::isfinite(w[f].imag()))
            fail(ErrorCode::NanDetected, "non-finite vorticity at step " + std::to_string(s.step + 1));
    }
    ++s.step;
    return rep;
}

// ---------------------------------------------------------------------------
// Norm traces

struct RunConfig {
    double dt = 1e-3;
    double T = 1.0;
    int r = 2;                 // Sobolev index of M
    int sample_every = 10;     // steps between trace samples
    double tail_tol = 1e-6;    // UNRESOLVED threshold on the vorticity tail
    std::optional<double> fit_s;
};

struct NormSample {
    double t = 0, N = 0, M = 0, K = 0, energy = 0, enstrophy = 0;
    double tau = 0, s = 0, residual = 0;  // zero when the radius fit fails
    bool fit_ok = false;
    double tail = 0;
};

struct NormTrace {
    std::vector<NormSample> samples;
    bool unresolved = false;
    bool cfl_warning = false;
    long steps = 0;

    std::vector<double> column(double NormSample::*m) const {
        std::vector<double> out;
        for (const auto& s : samples) out.push_back(s.*m);
        return out;
    }
};

inline double energy(const SolverState& s) {
    const auto uv = velocity_spectra(s.omega, *s.lattice);
    double e = 0.0;
    for (std::size_t f = 0; f < s.omega.size(); ++f) e += std::norm(uv[0][f]) + std::norm(uv[1][f]);
    return 0.5 * e;
}

inline double enstrophy(const SolverState& s) {
    double z = 0.0;
    for (const auto& c : s.omega.coeffs()) z += std::norm(c);
    return 0.5 * z;
}

/// Everything in a trace row except K, which needs the previous sample.
inline NormSample measure(const SolverState& s, const RunConfig& cfg) {
    NormSample out;
    out.t = s.time();
    const auto uv = velocity_spectra(s.omega, *s.lattice);
    std::vector<Field> u{inverse_transform(uv[0]), inverse_transform(uv[1])};
    std::vector<Field> grad;
    for (const auto& c : uv)
        for (int d = 0; d < 2; ++d) grad.push_back(inverse_transform(derivative(c, d)));
    out.N = sup_norm(u, grad);
    out.M = sobolev_norm(std::span<const Spectrum>(uv), cfg.r);
    double e = 0.0;
    for (std::size_t f = 0; f < s.omega.size(); ++f) e += std::norm(uv[0][f]) + std::norm(uv[1][f]);
    out.energy = 0.5 * e;
    out.enstrophy = enstrophy(s);

    const auto profile = shell_profile(s.omega, s.lattice->cutoff);
    out.tail = tail_ratio(profile);
    FitOptions fo;
    fo.s = cfg.fit_s;
    try {
        const auto fit = fit_profile(profile, fo);
        out.tau = fit.tau;
        out.s = fit.s;
        out.residual = fit.residual;
        out.fit_ok = true;
    } catch (const Error&) {
        // Too few shells (e.g. a handful of modes) or no decay: no radius.
    }
    return out;
}

/// Advances `s` to step round(T/dt), sampling every `sample_every` steps and
/// at the end. K starts from `K0` (nonzero when continuing a checkpoint).
inline NormTrace run(SolverState& s, const RunConfig& cfg, double K0 = 0.0) {
    require(cfg.dt > 0 && cfg.T >= 0 && cfg.sample_every > 0, ErrorCode::Config, "bad run configuration");
    const long last = std::lround(cfg.T / cfg.dt);
    if (s.step == 0) s.dt = cfg.dt;
    require(s.dt == cfg.dt, ErrorCode::Config, "checkpoint dt differs from configured dt");

    NormTrace trace;
    auto record = [&] {
        NormSample m = measure(s, cfg);
        if (trace.samples.empty()) {
            m.K = K0;
        } else {
            const auto& p = trace.samples.back();
            m.K = p.K + 0.5 * (m.t - p.t) * (p.N + m.N);
        }
        if (m.tail > cfg.tail_tol) trace.unresolved = true;
        trace.samples.push_back(m);
    };
    record();
    while (s.step < last) {
        const auto rep = step(s, cfg.dt);
        trace.cfl_warning = trace.cfl_warning || rep.cfl_violation;
        ++trace.steps;
        if (s.step % cfg.sample_every == 0 || s.step == last) record();
    }
    return trace;
}

inline CsvTable trace_table(const NormTrace& tr) {
    CsvTable t;
    t.header = {"t", "N", "M", "K", "energy", "enstrophy", "tau_est", "s_est", "fit_residual"};
    for (const auto& s : tr.samples) t.rows.push_back({s.t, s.N, s.M, s.K, s.energy, s.enstrophy, s.tau, s.s, s.residual});
    return t;
}

// ---------------------------------------------------------------------------
// Checkpoints: <prefix>.spec (binary spectrum) + <prefix>.json (step, dt, K).

inline void save_checkpoint(const std::string& prefix, const SolverState& s, double K) {
    save_spectrum(prefix + ".spec", s.omega);
    nlohmann::json j{{"step", s.step}, {"dt", s.dt}, {"K", K}, {"t", s.time()}};
    std::ofstream os(prefix + ".json");
    require(static_cast<bool>(os), ErrorCode::Io, "cannot open " + prefix + ".json");
    os << j.dump(2) << '\n';
}

inline std::pair<SolverState, double> load_checkpoint(const std::string& prefix) {
    SolverState s = make_state(load_spectrum(prefix + ".spec"));
    std::ifstream is(prefix + ".json");
    require(static_cast<bool>(is), ErrorCode::Io, "cannot open " + prefix + ".json");
    nlohmann::json j;
    try {
        is >> j;
        s.step = j.at("step").get<long>();
        s.dt = j.at("dt").get<double>();
        return {std::move(s), j.at("K").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("bad checkpoint sidecar: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Initial data

/// Random analytic vorticity: hat omega_k = e^{-tau0 |k|} (xi_k + i eta_k)
/// with standard normal xi, eta from mt19937_64(seed), zero mean, dealiased,
/// real, then scaled so max |omega| = amplitude.
inline Field random_analytic_vorticity(const Grid& g, double tau0, std::uint64_t seed, double amplitude = 1.0) {
    require(g.dims == 2, ErrorCode::Domain, "2D initial data needs a 2D grid");
    require(tau0 > 0.0, ErrorCode::Domain, "tau0 must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Spectrum sp(g);
    for (std::size_t f = 0; f < sp.size(); ++f) {
        const double xi = normal(rng), eta = normal(rng);
        sp[f] = std::exp(-tau0 * Spectrum::norm(sp.wavevector(f))) * Complex(xi, eta);
    }
    sp.at({0, 0, 0}) = 0.0;
    sp.enforce_conjugate_symmetry();
    apply_mask(sp, Lattice2D(g));
    Field w = inverse_transform(sp);
    const double m = w.max_abs();
    for (double& v : w.values) v *= amplitude / m;
    return w;
}

}  // namespace gevrey
