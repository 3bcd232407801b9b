#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "gevrey/spectral.hpp"

using namespace gevrey;
using Catch::Approx;

namespace {

Spectrum synthetic(const Grid& g, double tau, double s) {
    Spectrum sp(g);
    for (std::size_t f = 0; f < sp.size(); ++f)
        sp[f] = std::exp(-tau * std::pow(Spectrum::norm(sp.wavevector(f)), 1.0 / s));
    return sp;
}

Field smooth_random_field(const Grid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double a[6];
    for (double& v : a) v = u(rng);
    return Field::sample(g, [&](std::array<double, 3> x) {
        return a[0] + a[1] * std::sin(x[0] + a[2]) + a[3] * std::cos(2 * x[1] - a[4]) +
               a[5] * std::exp(std::sin(x[0] + x[1]));
    });
}

}  // namespace

TEST_CASE("transform normalization", "[spectral]") {
    const Grid g = Grid::plane(32, 32);
    const auto one = forward_transform(Field(g, 1.0));
    CHECK(one.at({0, 0, 0}).real() == Approx(1.0).margin(1e-15));
    for (std::size_t f = 1; f < one.size(); ++f) CHECK(std::abs(one[f]) < 1e-15);

    const auto c = forward_transform(Field::sample(g, [](auto x) { return std::cos(x[0]); }));
    CHECK(std::abs(c.at({1, 0, 0}) - Complex(0.5)) < 1e-15);
    CHECK(std::abs(c.at({-1, 0, 0}) - Complex(0.5)) < 1e-15);
    CHECK(c.conjugate_symmetry_defect() < 1e-15);
}

TEST_CASE("transform round trip", "[spectral]") {
    for (const Grid& g : {Grid::cube(1, 64), Grid::plane(64, 32), Grid::cube(3, 16)}) {
        for (unsigned seed = 1; seed <= 3; ++seed) {
            const Field f = smooth_random_field(g, seed);
            const Field back = inverse_transform(forward_transform(f));
            double err = 0.0;
            for (std::size_t i = 0; i < f.values.size(); ++i) err = std::max(err, std::abs(back.values[i] - f.values[i]));
            CHECK(err <= 1e-12 * f.max_abs());
        }
    }
    Field bad(Grid::plane(16, 16));
    bad.values.pop_back();
    CHECK_THROWS_AS(forward_transform(bad), Error);
}

TEST_CASE("spectral derivative", "[spectral]") {
    const Grid g = Grid::plane(32, 64);
    const auto sp = forward_transform(Field::sample(g, [](auto x) { return std::sin(3 * x[0]) * std::cos(x[1]); }));
    const Field d1 = inverse_transform(derivative(sp, 0));
    const Field d2 = inverse_transform(derivative(sp, 1));
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto x = g.point(i);
        err = std::max(err, std::abs(d1.values[i] - 3 * std::cos(3 * x[0]) * std::cos(x[1])));
        err = std::max(err, std::abs(d2.values[i] + std::sin(3 * x[0]) * std::sin(x[1])));
    }
    CHECK(err < 1e-12);
}

TEST_CASE("shell profile", "[spectral]") {
    const Grid g = Grid::plane(32, 32);
    Spectrum single(g);
    single.at({3, 0, 0}) = 2.0;
    const auto p = shell_profile(single);
    REQUIRE(p.size() == 16);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(p[k] == (k == 3 ? 2.0 : 0.0));

    // The axis wavevector (kappa, 0) is the smallest |k| in shell kappa.
    const auto e = shell_profile(synthetic(g, 1.0, 1.0));
    for (std::size_t k = 0; k < e.size(); ++k) CHECK(e[k] == Approx(std::exp(-double(k))).epsilon(1e-14));
}

TEST_CASE("white-noise profile is flat", "[spectral]") {
    // Unit-variance complex Gaussian coefficients. Shell kappa >= 4 holds at
    // least 24 modes, so its max lies in [0.3, 4.5] except with probability
    // far below 1e-9 (P(max < 0.3) <= (1 - e^{-0.09})^24, P(|z| > 4.5)
    // = e^{-20.25} per mode).
    const Grid g = Grid::plane(64, 64);
    for (unsigned seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n(0.0, std::sqrt(0.5));
        Spectrum sp(g, false);
        for (auto& c : sp.coeffs()) c = Complex(n(rng), n(rng));
        const auto p = shell_profile(sp);
        for (std::size_t k = 4; k < p.size(); ++k) {
            CHECK(p[k] > 0.3);
            CHECK(p[k] < 4.5);
        }
    }
}

TEST_CASE("radius fit on constructed spectra", "[spectral]") {
    const Grid g = Grid::plane(256, 256);
    SECTION("fixed s") {
        FitOptions opt;
        opt.s = 1.0;
        const auto fit = estimate_radius(synthetic(g, 0.7, 1.0), opt);
        CHECK(fit.tau == Approx(0.7).margin(1e-3));
        CHECK(fit.s == 1.0);
        CHECK(fit.residual >= 0.0);
        CHECK(fit.k_lo < fit.k_hi);
    }
    SECTION("free s") {
        const auto fit = estimate_radius(synthetic(g, 0.5, 2.0));
        CHECK(fit.tau == Approx(0.5).margin(0.02));
        CHECK(fit.s == Approx(2.0).margin(0.1));
    }
    SECTION("recovery grid") {
        for (double tau : {0.1, 0.5, 1.0, 2.0})
            for (double s : {1.0, 2.0}) {
                CAPTURE(tau, s);
                const auto fit = estimate_radius(synthetic(g, tau, s));
                CHECK(std::abs(fit.tau - tau) <= 0.02 * tau);
                CHECK(std::abs(fit.s - s) <= 0.1);
            }
    }
    SECTION("scale invariance") {
        for (double tau : {0.1, 1.0}) {
            auto sp = synthetic(g, tau, 2.0);
            const auto a = estimate_radius(sp);
            sp *= 3.7e5;
            const auto b = estimate_radius(sp);
            CHECK(std::abs(a.tau - b.tau) <= 1e-10);
            CHECK(std::abs(a.s - b.s) <= 1e-10);
            CHECK(b.logM == Approx(a.logM + std::log(3.7e5)).epsilon(1e-10));
        }
    }
}

TEST_CASE("radius fit errors", "[spectral]") {
    const Grid g = Grid::plane(32, 32);
    // e^{-3 kappa} drops below the floor by shell 10, leaving [4, 7].
    CHECK_THROWS_MATCHES(estimate_radius(synthetic(g, 3.0, 1.0)), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == ErrorCode::FitUnderdetermined;
                         }));
    Spectrum growing(g);
    for (std::size_t f = 0; f < growing.size(); ++f) growing[f] = std::exp(0.1 * Spectrum::norm(growing.wavevector(f)));
    FitOptions opt;
    opt.s = 1.0;
    CHECK_THROWS_MATCHES(estimate_radius(growing, opt), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == ErrorCode::NoDecay; }));
}

TEST_CASE("radius of a function with complex poles", "[spectral]") {
    // g(x) = 1/(0.25 + cos^2 x) has poles at Im x = +-asinh(0.5).
    const Grid g = Grid::cube(1, 1024);
    const auto sp = forward_transform(Field::sample(g, [](auto x) {
        const double c = std::cos(x[0]);
        return 1.0 / (0.25 + c * c);
    }));
    const auto fit = estimate_radius(sp);
    CHECK(fit.tau == Approx(std::asinh(0.5)).epsilon(0.05));
    CHECK(fit.s == Approx(1.0).margin(0.1));
}

TEST_CASE("sup norm", "[spectral]") {
    const Grid g = Grid::cube(3, 16);
    std::vector<Spectrum> u{forward_transform(Field::sample(g, [](auto x) { return std::sin(x[1]); })),
                            Spectrum(g), Spectrum(g)};
    CHECK(w1inf_norm(u) == Approx(2.0).margin(1e-12));

    std::vector<Spectrum> zero{Spectrum(g), Spectrum(g), Spectrum(g)};
    CHECK(w1inf_norm(zero) == 0.0);

    std::vector<Spectrum> rough{forward_transform(smooth_random_field(g, 1))};
    rough[0].at({7, 0, 0}) = 1e-3;
    CHECK_THROWS_AS(w1inf_norm(rough), Error);
}

TEST_CASE("Sobolev norm", "[spectral]") {
    const Grid g = Grid::plane(32, 32);
    Spectrum single(g);
    single.at({1, 0, 0}) = 1.0;
    CHECK(sobolev_norm(single, 0) == Approx(1.0));
    CHECK(sobolev_norm(single, 1) == Approx(std::sqrt(2.0)));

    // cos x: two modes of amplitude 1/2, each weighted (1+1)^2.
    const auto c = forward_transform(Field::sample(g, [](auto x) { return std::cos(x[0]); }));
    CHECK(sobolev_norm(c, 2) == Approx(std::sqrt(2 * 4 * 0.25)).epsilon(1e-14));
    CHECK_THROWS_AS(sobolev_norm(c, 9), Error);

    // Parseval against the normalized physical L^2 norm.
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const Field f = smooth_random_field(g, seed);
        double l2 = 0.0;
        for (double v : f.values) l2 += v * v;
        l2 = std::sqrt(l2 / static_cast<double>(f.values.size()));
        CHECK(sobolev_norm(forward_transform(f), 0) == Approx(l2).epsilon(1e-10));
    }
}

TEST_CASE("Gevrey norm", "[spectral]") {
    const Grid g = Grid::plane(64, 64);
    Spectrum single(g);
    single.at({1, 0, 0}) = 1.0;
    CHECK(gevrey_norm(single, 0.0, 1.0, 0) == Approx(1.0));
    CHECK(gevrey_norm(single, std::log(2.0), 1.0, 0) == Approx(2.0).epsilon(1e-14));

    const auto e = synthetic(g, 1.0, 1.0);
    CHECK_THROWS_MATCHES(gevrey_norm(e, 1.1, 1.0, 0), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& x) { return x.code() == ErrorCode::Diverged; }));

    double prev = 0.0;
    for (int i = 0; i <= 8; ++i) {
        const double v = gevrey_norm(e, 0.1 * i, 1.0, 2);
        CHECK(v >= prev);
        prev = v;
    }
    for (double tau : {0.0, 0.3, 0.6}) {
        double last = 0.0;
        for (int r = 0; r <= 4; ++r) {
            const double v = gevrey_norm(e, tau, 1.0, r);
            CHECK(v >= last);
            last = v;
        }
    }
}

TEST_CASE("binary spectrum round trip", "[spectral]") {
    const Grid g = Grid::plane(16, 32);
    auto sp = forward_transform(smooth_random_field(g, 4));
    std::stringstream buf;
    write_spectrum(buf, sp);
    const std::string bytes = buf.str();
    REQUIRE(bytes.size() == 4 * 4 + g.size() * 16);
    std::uint32_t header[4];
    std::memcpy(header, bytes.data(), sizeof header);
    CHECK(header[0] == 2);
    CHECK(header[1] == 16);
    CHECK(header[2] == 32);
    CHECK(header[3] == 1);
    // First payload entry is the most negative wavevector (-8, -16).
    double first[2];
    std::memcpy(first, bytes.data() + 16, sizeof first);
    CHECK(first[0] == sp.at({-8, -16, 0}).real());
    CHECK(first[1] == sp.at({-8, -16, 0}).imag());

    const auto back = read_spectrum(buf);
    CHECK(back.grid() == g);
    CHECK(back.is_real());
    CHECK(back.coeffs() == sp.coeffs());

    std::stringstream truncated(bytes.substr(0, 40));
    CHECK_THROWS_AS(read_spectrum(truncated), Error);
}
