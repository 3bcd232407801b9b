#pragma once

// Factorial conventions, multi-index Leibniz machinery and the factorial-ratio
// families that appear in the Gevrey-class commutator and pressure estimates.
// Identities are checked in exact rational arithmetic (GMP); non-integer
// Gevrey indices go through a 50-digit binary float.

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/gmp.hpp>

#include "gevrey/error.hpp"

namespace gevrey::comb {

using Integer = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;
using Float = boost::multiprecision::cpp_bin_float_50;

/// Multi-index in N_0^3.
struct MultiIndex {
    std::array<int, 3> c{0, 0, 0};

    constexpr MultiIndex() = default;
    constexpr MultiIndex(int a1, int a2, int a3) : c{a1, a2, a3} {}

    constexpr int order() const noexcept { return c[0] + c[1] + c[2]; }
    constexpr int operator[](std::size_t i) const noexcept { return c[i]; }

    friend constexpr MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) noexcept {
        return {a.c[0] + b.c[0], a.c[1] + b.c[1], a.c[2] + b.c[2]};
    }
    friend constexpr MultiIndex operator-(const MultiIndex& a, const MultiIndex& b) noexcept {
        return {a.c[0] - b.c[0], a.c[1] - b.c[1], a.c[2] - b.c[2]};
    }
    // Lexicographic on (a1, a2, a3); this is the enumeration order everywhere.
    friend constexpr auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

/// Componentwise partial order: beta <= alpha.
constexpr bool precedes(const MultiIndex& beta, const MultiIndex& alpha) noexcept {
    return beta.c[0] <= alpha.c[0] && beta.c[1] <= alpha.c[1] && beta.c[2] <= alpha.c[2];
}

constexpr bool is_valid(const MultiIndex& a) noexcept {
    return a.c[0] >= 0 && a.c[1] >= 0 && a.c[2] >= 0;
}

/// All multi-indices of order m, lexicographic.
inline std::vector<MultiIndex> multi_indices_of_order(int m) {
    std::vector<MultiIndex> out;
    if (m < 0) return out;
    out.reserve(static_cast<std::size_t>((m + 1) * (m + 2) / 2));
    for (int a1 = 0; a1 <= m; ++a1)
        for (int a2 = 0; a2 <= m - a1; ++a2) out.emplace_back(a1, a2, m - a1 - a2);
    return out;
}

/// All beta <= alpha with |beta| = order, lexicographic.
inline std::vector<MultiIndex> sub_indices(const MultiIndex& alpha, int order) {
    std::vector<MultiIndex> out;
    if (order < 0 || order > alpha.order()) return out;
    for (int b1 = 0; b1 <= std::min(alpha.c[0], order); ++b1)
        for (int b2 = 0; b2 <= std::min(alpha.c[1], order - b1); ++b2) {
            const int b3 = order - b1 - b2;
            if (b3 <= alpha.c[2]) out.emplace_back(b1, b2, b3);
        }
    return out;
}

/// n! with the convention n! = 1 for n <= 0.
inline Integer truncated_factorial(long n) {
    Integer r = 1;
    for (long i = 2; i <= n; ++i) r *= i;
    return r;
}

/// C(n, k); zero outside 0 <= k <= n.
inline Integer binomial(long n, long k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    Integer r = 1;
    for (long i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

inline Integer multi_binom(const MultiIndex& alpha, const MultiIndex& beta) {
    require(is_valid(alpha) && is_valid(beta) && precedes(beta, alpha), ErrorCode::Domain,
            "multi_binom requires 0 <= beta <= alpha");
    Integer r = 1;
    for (std::size_t i = 0; i < 3; ++i) r *= binomial(alpha.c[i], beta.c[i]);
    return r;
}

struct IdentityCheck {
    Rational lhs;
    Rational rhs;
    bool holds() const { return lhs == rhs; }
};

/// Triple Leibniz sum versus its factored form.
///
///   lhs = sum_{|alpha|=m} sum_{|beta|=j, beta<=alpha} sum_{|gamma|=k, gamma<=beta}
///             a(gamma) b(alpha-beta, beta-gamma)
///   rhs = (sum_{|gamma|=k} a(gamma)) (sum_{|alpha|=m-k} sum_{|beta|=j-k, beta<=alpha} b(alpha-beta, beta))
///
/// `a(MultiIndex)` and `b(MultiIndex, MultiIndex)` must return Rational.
template <class SeqA, class SeqB>
IdentityCheck lemma_a1_check(int m, int j, int k, SeqA&& a, SeqB&& b) {
    require(0 <= k && k <= j && j <= m, ErrorCode::Domain, "lemma_a1_check requires 0 <= k <= j <= m");
    IdentityCheck out{0, 0};
    for (const auto& alpha : multi_indices_of_order(m))
        for (const auto& beta : sub_indices(alpha, j))
            for (const auto& gamma : sub_indices(beta, k)) out.lhs += a(gamma) * b(alpha - beta, beta - gamma);

    Rational sum_a = 0;
    for (const auto& gamma : multi_indices_of_order(k)) sum_a += a(gamma);
    Rational sum_b = 0;
    for (const auto& alpha : multi_indices_of_order(m - k))
        for (const auto& beta : sub_indices(alpha, j - k)) sum_b += b(alpha - beta, beta);
    out.rhs = sum_a * sum_b;
    return out;
}

/// Discrete convolution identity with geometric weights eta^k, for a
/// sequence a(m, j) supported on m <= support_max. Both sides are exact.
///
/// lhs is the raw triple sum over m >= 3, 1 <= j <= m, 0 <= k <= j; rows with
/// m beyond the support are summed as closed-form geometric tails.
/// rhs is the five-term regrouped form.
template <class SeqA>
IdentityCheck lemma_a2_check(const Rational& eta, SeqA&& a, int support_max) {
    require(eta > 0 && eta < 1, ErrorCode::Domain, "lemma_a2_check requires 0 < eta < 1");
    require(support_max >= 0, ErrorCode::Domain, "support bound must be non-negative");

    auto at = [&](int m, int j) -> Rational {
        if (m < 0 || j < 0 || j > m || m > support_max) return Rational(0);
        return a(m, j);
    };
    const Rational one_minus = 1 - eta;

    IdentityCheck out{0, 0};

    // Brute-force block: every (m, j, k) with m <= cut.
    const int cut = support_max + 3;
    std::vector<Rational> eta_pow(static_cast<std::size_t>(cut + 2), Rational(1));
    for (std::size_t i = 1; i < eta_pow.size(); ++i) eta_pow[i] = eta_pow[i - 1] * eta;
    for (int m = 3; m <= cut; ++m)
        for (int j = 1; j <= m; ++j)
            for (int k = 0; k <= j; ++k) {
                const Rational v = at(m - k, j - k);
                if (v != 0) out.lhs += eta_pow[static_cast<std::size_t>(k)] * v;
            }
    // Tail m > cut: with l = m-k <= support_max and i = j-k, every k >= cut+1-l
    // contributes eta^k a(l, i).
    for (int l = 0; l <= support_max; ++l) {
        const int k0 = cut + 1 - l;
        const Rational tail = eta_pow[static_cast<std::size_t>(k0)] / one_minus;
        for (int i = 0; i <= l; ++i) {
            const Rational v = at(l, i);
            if (v != 0) out.lhs += tail * v;
        }
    }

    const Rational eta2 = eta * eta;
    const Rational eta3 = eta2 * eta;
    Rational big0 = 0;  // sum_{m>=3} a(m,0)
    Rational big1 = 0;  // sum_{m>=3} sum_{1<=j<=m} a(m,j)
    for (int m = 3; m <= support_max; ++m) {
        big0 += at(m, 0);
        for (int j = 1; j <= m; ++j) big1 += at(m, j);
    }
    out.rhs = eta3 / one_minus * at(0, 0) + eta2 / one_minus * (at(1, 0) + at(1, 1)) +
              eta / one_minus * (at(2, 0) + at(2, 1) + at(2, 2)) + eta / one_minus * big0 + big1 / one_minus;
    return out;
}

// ---------------------------------------------------------------------------
// Factorial-ratio families

enum class RatioFamily { ElimTheta, CLow, PressureM4, PressureTF, PressureP1 };

inline constexpr std::array<RatioFamily, 5> all_ratio_families{
    RatioFamily::ElimTheta, RatioFamily::CLow, RatioFamily::PressureM4, RatioFamily::PressureTF,
    RatioFamily::PressureP1};

constexpr std::string_view to_string(RatioFamily f) noexcept {
    switch (f) {
    case RatioFamily::ElimTheta: return "ELIM_THETA";
    case RatioFamily::CLow: return "CLOW";
    case RatioFamily::PressureM4: return "PRESSURE_M4";
    case RatioFamily::PressureTF: return "PRESSURE_TF";
    case RatioFamily::PressureP1: return "PRESSURE_P1";
    }
    return "?";
}

/// Index of a ratio term. `j` is the inner Leibniz index (k for ELIM_THETA);
/// `a3` is only used by PRESSURE_P1.
struct RatioIndex {
    int m = 0;
    int j = 0;
    int a3 = 0;
    friend constexpr bool operator==(const RatioIndex&, const RatioIndex&) = default;
};

/// Smallest m for which the family has a valid index.
constexpr int min_order(RatioFamily f) noexcept {
    switch (f) {
    case RatioFamily::ElimTheta: return 3;
    case RatioFamily::CLow: return 6;
    case RatioFamily::PressureM4: return 4;
    case RatioFamily::PressureTF: return 3;
    case RatioFamily::PressureP1: return 3;
    }
    return 0;
}

/// Valid index ranges:
///   ELIM_THETA   m >= 3, 0 <= j <= m
///   CLOW         m >= 6, 3 <= j <= floor(m/2)
///   PRESSURE_M4  m >= 4, 1 <= j <= m-3
///   PRESSURE_TF  m >= 3, 0 <= j <= m
///   PRESSURE_P1  m >= 3, 1 <= a3 <= m, 0 <= j <= m-a3
constexpr bool in_range(RatioFamily f, const RatioIndex& i) noexcept {
    switch (f) {
    case RatioFamily::ElimTheta:
    case RatioFamily::PressureTF: return i.m >= 3 && i.j >= 0 && i.j <= i.m;
    case RatioFamily::CLow: return i.m >= 6 && i.j >= 3 && i.j <= i.m / 2;
    case RatioFamily::PressureM4: return i.m >= 4 && i.j >= 1 && i.j <= i.m - 3;
    case RatioFamily::PressureP1: return i.m >= 3 && i.a3 >= 1 && i.a3 <= i.m && i.j >= 0 && i.j <= i.m - i.a3;
    }
    return false;
}

/// Valid indices with order exactly m, in (j, a3) lexicographic order.
inline std::vector<RatioIndex> indices_of_order(RatioFamily f, int m) {
    std::vector<RatioIndex> out;
    if (f == RatioFamily::PressureP1) {
        for (int j = 0; j <= m; ++j)
            for (int a3 = 1; a3 <= m; ++a3)
                if (in_range(f, {m, j, a3})) out.push_back({m, j, a3});
        return out;
    }
    for (int j = 0; j <= m; ++j)
        if (in_range(f, {m, j, 0})) out.push_back({m, j, 0});
    return out;
}

struct RatioValue {
    std::optional<Rational> exact;  // present when s is an integer and the family is rational
    Float value;
};

namespace detail {

inline bool is_integer(const Rational& s) { return boost::multiprecision::denominator(s) == 1; }

inline Float to_float(const Rational& q) {
    return Float(boost::multiprecision::numerator(q)) / Float(boost::multiprecision::denominator(q));
}

inline Rational pow_int(const Rational& base, long e) {
    Rational r = 1;
    for (long i = 0; i < e; ++i) r *= base;
    return r;
}

// (n!)^p for the truncated factorial.
inline Float factorial_pow(long n, const Float& p) {
    if (n <= 1) return Float(1);
    return boost::multiprecision::pow(Float(truncated_factorial(n)), p);
}

// Shape shared by the rational families: binom * (f1)!^s (f2)!^s / (f3)!^s.
struct RationalShape {
    long binom_n, binom_k, f1, f2, f3;
};

inline std::optional<RationalShape> rational_shape(RatioFamily f, const RatioIndex& i) {
    switch (f) {
    case RatioFamily::ElimTheta:
    case RatioFamily::PressureTF: return RationalShape{i.m, i.j, i.j - 3, i.m - i.j - 3, i.m - 3};
    case RatioFamily::PressureM4: return RationalShape{i.m - 1, i.j, i.j - 2, i.m - i.j - 3, i.m - 3};
    case RatioFamily::PressureP1: return RationalShape{i.m - i.a3, i.j, i.j - 2, i.m - i.j - 3, i.m - 3};
    case RatioFamily::CLow: return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace detail

/// Evaluates one term of a ratio family at Gevrey index s >= 1.
inline RatioValue ratio_eval(RatioFamily family, const RatioIndex& idx, const Rational& s) {
    require(s >= 1, ErrorCode::Domain, "ratio families are defined for s >= 1");
    require(in_range(family, idx), ErrorCode::Domain,
            std::string(to_string(family)) + " index out of range (m=" + std::to_string(idx.m) +
                ", j=" + std::to_string(idx.j) + ")");
    const Float sf = detail::to_float(s);

    if (auto shape = detail::rational_shape(family, idx)) {
        const Integer b = binomial(shape->binom_n, shape->binom_k);
        const Rational base(truncated_factorial(shape->f1) * truncated_factorial(shape->f2),
                            truncated_factorial(shape->f3));
        RatioValue out;
        if (detail::is_integer(s)) {
            const long e = static_cast<long>(boost::multiprecision::numerator(s));
            out.exact = Rational(b) * detail::pow_int(base, e);
            out.value = detail::to_float(*out.exact);
        } else {
            out.value = Float(b) * boost::multiprecision::pow(detail::to_float(base), sf);
        }
        return out;
    }

    // CLOW: two-term commutator bound, irrational through j^{3/2} and s/4 powers.
    const int m = idx.m;
    const int j = idx.j;
    const Float b = Float(binomial(m, j));
    const Float denom = detail::factorial_pow(m - 3, sf) * Float(m - j + 1);
    const Float tail = detail::factorial_pow(m - j - 2, sf);
    const Float first = detail::factorial_pow(j - 3, sf / 4) * detail::factorial_pow(j - 1, 3 * sf / 4);
    const Float second = detail::factorial_pow(j - 3, sf) * boost::multiprecision::pow(Float(j), Float(1.5));
    return RatioValue{std::nullopt, b * (first + second) * tail / denom};
}

struct RatioScan {
    Float sup;
    RatioIndex argmax;
    std::size_t evaluated = 0;
};

/// Supremum of a family over all valid indices with m <= m_max. Ties keep
/// the first index in enumeration order (m, then j, then a3).
inline RatioScan ratio_scan(RatioFamily family, const Rational& s, int m_max) {
    require(s >= 1, ErrorCode::Domain, "ratio families are defined for s >= 1");
    require(m_max >= min_order(family), ErrorCode::Domain, "m_max below the family's smallest order");
    const Float sf = detail::to_float(s);

    // (n!)^s and (n!)^{s/4}, (n!)^{3s/4} tables; binomials as floats.
    const auto n_max = static_cast<std::size_t>(m_max + 1);
    std::vector<Float> fs(n_max), fs_q(n_max), fs_3q(n_max);
    for (std::size_t n = 0; n < n_max; ++n) {
        const long nl = static_cast<long>(n);
        fs[n] = detail::factorial_pow(nl, sf);
        fs_q[n] = detail::factorial_pow(nl, sf / 4);
        fs_3q[n] = detail::factorial_pow(nl, 3 * sf / 4);
    }
    auto F = [&](long n) -> const Float& { return fs[static_cast<std::size_t>(std::max(n, 0L))]; };
    std::vector<std::vector<Float>> pascal(n_max);
    for (std::size_t n = 0; n < n_max; ++n) {
        pascal[n].assign(n + 1, Float(1));
        for (std::size_t k = 1; k < n; ++k) pascal[n][k] = pascal[n - 1][k - 1] + pascal[n - 1][k];
    }
    auto C = [&](long n, long k) -> Float {
        if (k < 0 || k > n) return Float(0);
        return pascal[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
    };

    RatioScan out{Float(-1), {}, 0};
    auto consider = [&](const Float& v, const RatioIndex& i) {
        ++out.evaluated;
        if (v > out.sup) {
            out.sup = v;
            out.argmax = i;
        }
    };

    for (int m = min_order(family); m <= m_max; ++m) {
        for (const auto& i : indices_of_order(family, m)) {
            if (auto shape = detail::rational_shape(family, i)) {
                consider(C(shape->binom_n, shape->binom_k) * F(shape->f1) * F(shape->f2) / F(shape->f3), i);
            } else {
                const long j = i.j;
                const Float lead = C(m, j) * F(m - j - 2) / (F(m - 3) * Float(m - j + 1));
                const Float first = fs_q[static_cast<std::size_t>(std::max(j - 3, 0L))] *
                                    fs_3q[static_cast<std::size_t>(std::max(j - 1, 0L))];
                const Float second = F(j - 3) * boost::multiprecision::pow(Float(j), Float(1.5));
                consider(lead * (first + second), i);
            }
        }
    }
    return out;
}

inline bool same_sup(const RatioScan& a, const RatioScan& b) { return a.sup == b.sup && a.argmax == b.argmax; }

}  // namespace gevrey::comb
