#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gevrey/radius_bound.hpp"

using namespace gevrey;
using Catch::Approx;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return t;
}

NormSeries constant_series(double T, std::size_t n, double N, double M) {
    auto t = linspace(0.0, T, n);
    return NormSeries::from_samples(t, std::vector<double>(n, N), std::vector<double>(n, M));
}

BoundParams params(double C0, double tau0) {
    BoundParams p;
    p.C0 = C0;
    p.tau0 = tau0;
    return p;
}

}  // namespace

TEST_CASE("parameter validation", "[radius_bound]") {
    BoundParams p;
    CHECK_NOTHROW(p.validate());
    p.tau0 = 1.5;  // eps * tau_star = 1
    CHECK_THROWS_AS(p.validate(), Error);
    p = BoundParams{};
    p.a_star = 1.2;
    CHECK_THROWS_AS(p.validate(), Error);
    p.a_star = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = BoundParams{};
    p.C = -1.0;
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("L and the growth bounds", "[radius_bound]") {
    BoundParams p = params(3.0, 0.2);
    p.Q0 = 0.7;

    const auto zero = constant_series(1.0, 11, 0.0, 0.0);
    for (double L : L_of_t(zero, p)) CHECK(L == Approx((1.0 + p.C0) * p.Q0).epsilon(1e-15));
    for (double q : gevrey_growth_bound(zero, p)) CHECK(q == p.Q0);

    // Q0 = 0, M = m0, K = 0: L = C0 m0 + (1 + C0) C0 m0^2 t.
    p.Q0 = 0.0;
    const double m0 = 0.8;
    const auto flat = constant_series(2.0, 21, 0.0, m0);
    const auto L = L_of_t(flat, p);
    for (std::size_t i = 0; i < L.size(); ++i)
        CHECK(L[i] == Approx(p.C0 * m0 + (1 + p.C0) * p.C0 * m0 * m0 * flat.t[i]).epsilon(1e-13));
    p.Q0 = 0.4;
    const auto q = gevrey_growth_bound(flat, p);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(q[i] == Approx(p.Q0 + p.C0 * m0 * m0 * flat.t[i]).epsilon(1e-13));

    // Monotone inputs give monotone L and Q.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> t{0.0}, N{u(rng)}, M{u(rng)};
    for (int i = 1; i < 50; ++i) {
        t.push_back(t.back() + 0.01 + 0.1 * u(rng));
        N.push_back(N.back() + u(rng));
        M.push_back(M.back() + u(rng));
    }
    const auto mono = NormSeries::from_samples(t, N, M);
    const auto Lm = L_of_t(mono, p);
    const auto Qm = gevrey_growth_bound(mono, p);
    for (std::size_t i = 1; i < Lm.size(); ++i) {
        CHECK(Lm[i] >= Lm[i - 1]);
        CHECK(Qm[i] >= Qm[i - 1]);
    }

    CHECK(sobolev_growth_bound(1.3, 0.0, 1.0) == Approx(1.3));
    for (double K : {0.0, 0.5, 2.0}) CHECK(sobolev_growth_bound(1.3, K, 2.0) == Approx(1.3 * std::sqrt(2.0) * std::exp(K)));
    CHECK(sobolev_growth_bound(1.0, 1.0, 3.0) < sobolev_growth_bound(1.0, 1.1, 3.0));
}

TEST_CASE("radius ODE special cases", "[radius_bound]") {
    const auto t = linspace(0.0, 1.0, 11);
    const std::vector<double> zeros(t.size(), 0.0), ones(t.size(), 1.0);

    BoundParams p = params(2.0, 0.3);
    for (double v : integrate_tau_ode(t, zeros, zeros, p)) CHECK(v == 0.3);

    // L = 0, N = n0: tau0 e^{-C0 n0 t}.
    const std::vector<double> n0(t.size(), 1.7);
    const auto lin = integrate_tau_ode(t, n0, zeros, p);
    for (std::size_t i = 0; i < t.size(); ++i)
        CHECK(std::abs(lin[i] - 0.3 * std::exp(-2.0 * 1.7 * t[i])) <= 1e-8 * lin[i]);

    // N = 0, L = 1, C0 = 2, tau0 = 1: tau = (1 + t)^{-2}.
    p = params(2.0, 1.0);
    const auto sep = integrate_tau_ode(t, zeros, ones, p);
    CHECK(std::abs(sep.back() - 0.25) <= 1e-8 * 0.25);
    for (std::size_t i = 0; i < t.size(); ++i)
        CHECK(std::abs(sep[i] - 1.0 / ((1 + t[i]) * (1 + t[i]))) <= 1e-8 * sep[i]);

    // Far below the smallest double.
    const std::vector<double> huge(t.size(), 500.0);
    CHECK_THROWS_MATCHES(integrate_tau_ode(t, huge, zeros, p), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == ErrorCode::StepUnderflow; }));
    CHECK(log_tau_ode(t, huge, zeros, p).back() == Approx(-2.0 * 500.0).epsilon(1e-12));
}

TEST_CASE("comparison principle", "[radius_bound]") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(u(rng) * 30);
        std::vector<double> t{0.0};
        for (std::size_t i = 1; i < n; ++i) t.push_back(t.back() + 0.01 + 0.05 * u(rng));
        std::vector<double> N1(n), N2(n), L1(n), L2(n);
        for (std::size_t i = 0; i < n; ++i) {
            N1[i] = 3.0 * u(rng);
            N2[i] = N1[i] + 2.0 * u(rng);
            L1[i] = 5.0 * u(rng);
            L2[i] = L1[i] + 5.0 * u(rng);
        }
        BoundParams p = params(1.0 + 4.0 * u(rng), 0.05 + 0.9 * u(rng));
        p.ode_dt = 1e-3;
        const auto a = log_tau_ode(t, N1, L1, p);
        const auto b = log_tau_ode(t, N2, L2, p);
        for (std::size_t i = 0; i < n; ++i) CHECK(b[i] <= a[i] + 1e-12);
    }
}

TEST_CASE("explicit radius", "[radius_bound]") {
    BoundParams p = params(2.0, 0.4);
    const auto t = linspace(0.0, 1.0, 101);
    const std::vector<double> zeros(t.size(), 0.0);
    for (double y : log_tau_closed(t, zeros, zeros, p)) CHECK(std::exp(y) == Approx(0.4).epsilon(1e-15));

    std::vector<double> K(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) K[i] = t[i] * t[i];
    const auto noL = log_tau_closed(t, K, zeros, p);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::exp(noL[i]) == Approx(0.4 * std::exp(-2.0 * K[i])).epsilon(1e-14));

    // Constant N = n0 and L = l0: the integral is l0 (1 - e^{-a t}) / a, a = C0 n0.
    const double n0 = 1.5, l0 = 3.0, a = p.C0 * n0;
    auto closed_at = [&](std::size_t samples) {
        const auto s = linspace(0.0, 1.0, samples);
        std::vector<double> Ks(samples), Ls(samples, l0);
        for (std::size_t i = 0; i < samples; ++i) Ks[i] = n0 * s[i];
        return std::exp(log_tau_closed(s, Ks, Ls, p).back());
    };
    const double exact =
        std::exp(-a) * std::pow(1.0 / std::sqrt(p.tau0) + p.C0 * l0 * (1.0 - std::exp(-a)) / a, -2.0);
    const double coarse = closed_at(100001), fine = closed_at(1000001);
    CHECK(std::abs(coarse - fine) <= 1e-10 * fine);
    CHECK(std::abs(fine - exact) <= 1e-10 * exact);

    // The ODE itself with constant N, L: (tau e^{a t})^{-1/2} grows like (C0/2) int l0 e^{-a s/2}.
    const std::vector<double> N(t.size(), n0), L(t.size(), l0);
    const auto ode = log_tau_ode(t, N, L, p);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double psi = 1.0 / std::sqrt(p.tau0) + p.C0 * l0 * (1.0 - std::exp(-0.5 * a * t[i])) / a;
        CHECK(std::abs(std::exp(ode[i]) - std::exp(-a * t[i]) / (psi * psi)) <= 1e-8 * std::exp(ode[i]));
    }
}

TEST_CASE("compact bound", "[radius_bound]") {
    BoundParams p = params(10.0, 0.3);
    CHECK(tau_compact(0.0, 2.0, 5.0, 0.0, p) == Approx(0.3).epsilon(1e-15));
    CHECK(tau_compact(1.2, 0.0, 0.0, 0.7, p) == Approx(0.3 * std::exp(-10.0 * 0.7)));
    const double before = tau_compact(0.5, 1.0, 2.0, 0.4, p);
    p.C *= 2.0;
    CHECK(tau_compact(0.5, 1.0, 2.0, 0.4, p) < before);
    CHECK_THROWS_AS(tau_compact(-0.1, 1.0, 1.0, 0.0, p), Error);
}

TEST_CASE("patched global bound", "[radius_bound]") {
    BoundParams p = params(10.0, 0.3);
    p.Q0 = 1.0;

    SECTION("N = 1 on [0, 2.5], r* = 1") {
        const auto s = constant_series(2.5, 251, 1.0, 1.0);
        const auto g = tau_global(s, p);
        REQUIRE(g.segments.size() == 3);
        CHECK(g.segments[0].T_end == Approx(1.0));
        CHECK(g.segments[1].T_end == Approx(2.0));
        CHECK(g.segments[2].T_end == Approx(2.5));

        // Per-segment factors by hand. (1 + K^2) M^2 integrates to D + (b^3 - a^3)/3.
        double log_tau = std::log(p.tau0), Q = p.Q0;
        for (const auto& [a, b] : {std::pair{0.0, 1.0}, {1.0, 2.0}, {2.0, 2.5}}) {
            const double D = b - a;
            log_tau += 2.0 * std::log(p.a_star) - 2.0 * std::log(1.0 + p.C * D * Q + p.C * D * D) - p.C * D;
            Q += p.C * (D + (b * b * b - a * a * a) / 3.0);
        }
        CHECK(g.log_recursion == Approx(log_tau).epsilon(1e-4));
        CHECK(g.Q.back() == Approx(Q).epsilon(1e-4));
        CHECK(g.log_compact == Approx(std::log(p.C * p.tau0) - p.C * 6.25 - p.C * 2.5 - p.C * 6.25).epsilon(1e-12));
        CHECK(g.log_compact <= g.log_recursion);
    }
    SECTION("single chart, a* = 1") {
        p.a_star = 1.0;
        const auto s = constant_series(0.6, 61, 0.5, 0.8);
        const auto g = tau_global(s, p);
        REQUIRE(g.segments.size() == 1);
        CHECK(g.log_recursion == Approx(log_tau_compact(0.6, 0.8, p.Q0, 0.3, p)).epsilon(1e-12));
    }
    SECTION("N = 0: one segment, a*^2 below the single-chart bound") {
        const auto s = constant_series(1.0, 11, 0.0, 0.5);
        const auto g = tau_global(s, p);
        REQUIRE(g.segments.size() == 1);
        CHECK(g.log_recursion ==
              Approx(2.0 * std::log(p.a_star) + log_tau_compact(1.0, 0.5, p.Q0, 0.0, p)).epsilon(1e-12));
    }
}

TEST_CASE("bound trace columns", "[radius_bound]") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> t{0.0}, N{1.0}, M{1.0};
    for (int i = 1; i < 200; ++i) {
        t.push_back(t.back() + 0.005);
        N.push_back(1.0 + 0.5 * u(rng));
        M.push_back(M.back() * (1.0 + 0.01 * u(rng)));
    }
    const auto s = NormSeries::from_samples(t, N, M);
    BoundParams p = calibrate(BoundParams{}, 0.6);
    CHECK(p.tau0 == Approx(0.3));
    CHECK(p.C * p.tau0 <= 0.3);
    CHECK(p.C * 2.0 * p.tau0 > 0.3);
    p.Q0 = 2.0;
    p.ode_dt = 1e-3;
    const auto b = bound_trace(s, p);
    const std::vector<const std::vector<double>*> cols{&b.log_tau_ode, &b.log_tau_closed, &b.log_tau_compact,
                                                       &b.log_tau_global};
    for (const auto* c : cols) {
        CHECK(std::isfinite(c->back()));
        for (std::size_t i = 0; i < c->size(); ++i) {
            CHECK((*c)[i] <= std::log(p.tau0) + 1e-14);
            if (i) CHECK((*c)[i] <= (*c)[i - 1]);
        }
    }
    const auto table = b.table();
    CHECK(table.header.size() == 8);
    CHECK(table.rows.size() == t.size());
    CHECK(table.column("tau_ode") == 2);
    CHECK(b.Q_bound.front() == p.Q0);
}
