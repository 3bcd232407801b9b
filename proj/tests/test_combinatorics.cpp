#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gevrey/combinatorics.hpp"

using namespace gevrey;
using namespace gevrey::comb;

namespace {

// Test-side oracle: every multi-index in the box [0, m]^3, filtered by
// order. Deliberately does not reuse sub_indices / multi_indices_of_order.
std::vector<MultiIndex> box(int m) {
    std::vector<MultiIndex> out;
    for (int a = 0; a <= m; ++a)
        for (int b = 0; b <= m; ++b)
            for (int c = 0; c <= m; ++c) out.emplace_back(a, b, c);
    return out;
}

template <class A, class B>
Rational brute_lemma_a1_lhs(int m, int j, int k, A&& a, B&& b) {
    Rational sum = 0;
    const auto all = box(m);
    for (const auto& alpha : all) {
        if (alpha.order() != m) continue;
        for (const auto& beta : all) {
            if (beta.order() != j || !precedes(beta, alpha)) continue;
            for (const auto& gamma : all) {
                if (gamma.order() != k || !precedes(gamma, beta)) continue;
                sum += a(gamma) * b(alpha - beta, beta - gamma);
            }
        }
    }
    return sum;
}

// Re-indexed form of the geometric convolution: each a(l, i) is weighted by
// sum_{k >= k0} eta^k with k0 = max(0, 3 - l, 1 - i).
template <class A>
Rational reindexed_lemma_a2(const Rational& eta, A&& a, int support) {
    Rational sum = 0;
    for (int l = 0; l <= support; ++l)
        for (int i = 0; i <= l; ++i) {
            const int k0 = std::max({0, 3 - l, 1 - i});
            Rational w = 1;
            for (int q = 0; q < k0; ++q) w *= eta;
            sum += a(l, i) * w / (1 - eta);
        }
    return sum;
}

Rational random_positive(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(1, 97);
    std::uniform_int_distribution<int> den(1, 31);
    return Rational(num(rng), den(rng));
}

}  // namespace

TEST_CASE("truncated factorial convention", "[combinatorics]") {
    CHECK(truncated_factorial(-3) == 1);
    CHECK(truncated_factorial(0) == 1);
    CHECK(truncated_factorial(1) == 1);
    CHECK(truncated_factorial(5) == 120);
    CHECK(truncated_factorial(20) == Integer("2432902008176640000"));

    SECTION("constant on n <= 0, monotone on n >= 0") {
        for (long n = -50; n <= 0; ++n) CHECK(truncated_factorial(n) == 1);
        for (long n = 0; n < 60; ++n) CHECK(truncated_factorial(n) <= truncated_factorial(n + 1));
    }
}

TEST_CASE("multi-index enumeration is lexicographic and complete", "[combinatorics]") {
    for (int m = 0; m <= 8; ++m) {
        const auto idx = multi_indices_of_order(m);
        CHECK(idx.size() == static_cast<std::size_t>((m + 1) * (m + 2) / 2));
        CHECK(std::is_sorted(idx.begin(), idx.end()));
    }
    const MultiIndex alpha{2, 1, 3};
    const auto subs = sub_indices(alpha, 3);
    CHECK(std::is_sorted(subs.begin(), subs.end()));
    std::size_t expected = 0;
    for (const auto& b : box(3))
        if (b.order() == 3 && precedes(b, alpha)) ++expected;
    CHECK(subs.size() == expected);
}

TEST_CASE("multi_binom", "[combinatorics]") {
    CHECK(multi_binom({2, 0, 0}, {1, 0, 0}) == 2);
    CHECK(multi_binom({2, 2, 2}, {1, 1, 1}) == 8);
    CHECK(multi_binom({4, 3, 2}, {2, 1, 0}) == 18);  // C(4,2) C(3,1) C(2,0) = 6 * 3 * 1
    CHECK(multi_binom({4, 3, 2}, {0, 0, 0}) == 1);
    CHECK_THROWS_AS(multi_binom({1, 0, 0}, {0, 1, 0}), Error);
    CHECK_THROWS_AS(multi_binom({1, 0, 0}, {2, 0, 0}), Error);
}

TEST_CASE("lemma A1 examples", "[combinatorics][lemma]") {
    auto one_a = [](const MultiIndex&) { return Rational(1); };
    auto one_b = [](const MultiIndex&, const MultiIndex&) { return Rational(1); };

    SECTION("empty index") {
        const auto r = lemma_a1_check(0, 0, 0, one_a, one_b);
        CHECK(r.lhs == 1);
        CHECK(r.rhs == 1);
    }
    SECTION("m=2, j=1, k=1 with unit sequences") {
        const auto r = lemma_a1_check(2, 1, 1, one_a, one_b);
        CHECK(r.lhs == brute_lemma_a1_lhs(2, 1, 1, one_a, one_b));
        CHECK(r.lhs == 9);  // 3 alphas with two unit entries x2, plus 3 pure alphas x1
        CHECK(r.holds());
    }
    SECTION("m=5, j=3, k=2 with index-dependent sequences") {
        auto a = [](const MultiIndex& g) { return Rational(g[0] + 1); };
        auto b = [](const MultiIndex& l, const MultiIndex& mu) { return Rational(l[2] + mu[1] + 1); };
        const auto r = lemma_a1_check(5, 3, 2, a, b);
        CHECK(r.lhs == brute_lemma_a1_lhs(5, 3, 2, a, b));
        CHECK(r.holds());
    }
    SECTION("invalid ranges") {
        CHECK_THROWS_AS(lemma_a1_check(2, 3, 1, one_a, one_b), Error);
        CHECK_THROWS_AS(lemma_a1_check(3, 1, 2, one_a, one_b), Error);
        CHECK_THROWS_AS(lemma_a1_check(3, 2, -1, one_a, one_b), Error);
    }
}

TEST_CASE("lemma A1 holds for randomized rational sequences", "[combinatorics][lemma][property]") {
    std::mt19937_64 rng(20240611);
    for (int trial = 0; trial < 10; ++trial) {
        std::map<MultiIndex, Rational> a;
        std::map<std::pair<MultiIndex, MultiIndex>, Rational> b;
        auto fa = [&](const MultiIndex& g) -> const Rational& {
            auto it = a.find(g);
            if (it == a.end()) it = a.emplace(g, random_positive(rng)).first;
            return it->second;
        };
        auto fb = [&](const MultiIndex& l, const MultiIndex& mu) -> const Rational& {
            auto key = std::make_pair(l, mu);
            auto it = b.find(key);
            if (it == b.end()) it = b.emplace(key, random_positive(rng)).first;
            return it->second;
        };
        for (int m = 0; m <= 6; ++m)
            for (int j = 0; j <= m; ++j)
                for (int k = 0; k <= j; ++k) REQUIRE(lemma_a1_check(m, j, k, fa, fb).holds());
    }
}

TEST_CASE("lemma A2 examples", "[combinatorics][lemma]") {
    SECTION("zero sequence") {
        const auto r = lemma_a2_check(Rational(1, 2), [](int, int) { return Rational(0); }, 5);
        CHECK(r.lhs == 0);
        CHECK(r.rhs == 0);
    }
    SECTION("eta = 1/2, unit sequence on m <= 6") {
        auto a = [](int, int) { return Rational(1); };
        const auto r = lemma_a2_check(Rational(1, 2), a, 6);
        CHECK(r.lhs == reindexed_lemma_a2(Rational(1, 2), a, 6));
        CHECK(r.lhs == Rational(177, 4));
        CHECK(r.holds());
    }
    SECTION("eta = 1/3, a = m + j on m <= 5") {
        auto a = [](int m, int j) { return Rational(m + j); };
        const auto r = lemma_a2_check(Rational(1, 3), a, 5);
        CHECK(r.lhs == reindexed_lemma_a2(Rational(1, 3), a, 5));
        CHECK(r.holds());
    }
    SECTION("eta outside (0,1)") {
        auto a = [](int, int) { return Rational(1); };
        CHECK_THROWS_AS(lemma_a2_check(Rational(0), a, 3), Error);
        CHECK_THROWS_AS(lemma_a2_check(Rational(1), a, 3), Error);
        CHECK_THROWS_AS(lemma_a2_check(Rational(3, 2), a, 3), Error);
    }
}

TEST_CASE("lemma A2 holds for randomized finitely supported sequences", "[combinatorics][lemma][property]") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> support(0, 9);
    for (const Rational eta : {Rational(1, 4), Rational(1, 3), Rational(1, 2), Rational(3, 4)}) {
        for (int trial = 0; trial < 25; ++trial) {
            const int m_sup = support(rng);
            std::map<std::pair<int, int>, Rational> table;
            for (int m = 0; m <= m_sup; ++m)
                for (int j = 0; j <= m; ++j) table[{m, j}] = random_positive(rng);
            auto a = [&](int m, int j) { return table.at({m, j}); };
            const auto r = lemma_a2_check(eta, a, m_sup);
            REQUIRE(r.holds());
            REQUIRE(r.lhs == reindexed_lemma_a2(eta, a, m_sup));
        }
    }
}

TEST_CASE("ratio_eval examples", "[combinatorics][ratio]") {
    const auto v1 = ratio_eval(RatioFamily::ElimTheta, {6, 0}, Rational(1));
    REQUIRE(v1.exact);
    CHECK(*v1.exact == 1);

    // 252 * 2! * 2! / 7!
    const auto v2 = ratio_eval(RatioFamily::ElimTheta, {10, 5}, Rational(1));
    REQUIRE(v2.exact);
    CHECK(*v2.exact == Rational(1, 5));
    CHECK(v2.value == Float(1) / 5);

    const auto v3 = ratio_eval(RatioFamily::PressureM4, {4, 1}, Rational(1));
    REQUIRE(v3.exact);
    CHECK(*v3.exact == 3);

    // s = 3/2 goes through the float path: C(10,5) * (2!*2!/7!)^{3/2}
    const auto v4 = ratio_eval(RatioFamily::ElimTheta, {10, 5}, Rational(3, 2));
    CHECK_FALSE(v4.exact);
    const Float expect = Float(252) * boost::multiprecision::pow(Float(4) / 5040, Float(1.5));
    CHECK(boost::multiprecision::abs(v4.value - expect) < Float(1e-40) * expect);

    // Integer s = 2 squares the factorial part only.
    const auto v5 = ratio_eval(RatioFamily::ElimTheta, {10, 5}, Rational(2));
    REQUIRE(v5.exact);
    CHECK(*v5.exact == Rational(252) * Rational(4, 5040) * Rational(4, 5040));
}

TEST_CASE("ratio_eval domain errors", "[combinatorics][ratio]") {
    CHECK_THROWS_AS(ratio_eval(RatioFamily::ElimTheta, {2, 0}, Rational(1)), Error);
    CHECK_THROWS_AS(ratio_eval(RatioFamily::ElimTheta, {5, 6}, Rational(1)), Error);
    CHECK_THROWS_AS(ratio_eval(RatioFamily::CLow, {6, 4}, Rational(1)), Error);
    CHECK_THROWS_AS(ratio_eval(RatioFamily::PressureM4, {4, 2}, Rational(1)), Error);
    CHECK_THROWS_AS(ratio_eval(RatioFamily::PressureP1, {4, 1, 0}, Rational(1)), Error);
    CHECK_THROWS_AS(ratio_eval(RatioFamily::ElimTheta, {6, 1}, Rational(1, 2)), Error);
}

TEST_CASE("ratio_scan", "[combinatorics][ratio]") {
    SECTION("smallest ELIM_THETA range matches exhaustive evaluation") {
        const auto scan = ratio_scan(RatioFamily::ElimTheta, Rational(1), 3);
        Float best = -1;
        RatioIndex at{};
        for (int k = 0; k <= 3; ++k) {
            const auto v = ratio_eval(RatioFamily::ElimTheta, {3, k}, Rational(1));
            if (v.value > best) {
                best = v.value;
                at = {3, k};
            }
        }
        CHECK(scan.sup == best);
        CHECK(scan.argmax == at);
        CHECK(scan.sup == 3);
        CHECK(scan.evaluated == 4);
    }
    SECTION("scan agrees with pointwise evaluation for every family") {
        for (auto fam : all_ratio_families)
            for (const Rational s : {Rational(1), Rational(3, 2)}) {
                const auto scan = ratio_scan(fam, s, 14);
                Float best = -1;
                for (int m = min_order(fam); m <= 14; ++m)
                    for (const auto& i : indices_of_order(fam, m)) best = std::max(best, ratio_eval(fam, i, s).value);
                CHECK(boost::multiprecision::abs(scan.sup - best) <= Float(1e-40) * best);
            }
    }
    SECTION("sup stabilizes") {
        const auto s50 = ratio_scan(RatioFamily::ElimTheta, Rational(1), 50);
        const auto s200 = ratio_scan(RatioFamily::ElimTheta, Rational(1), 200);
        CHECK(same_sup(s50, s200));
        const auto c100 = ratio_scan(RatioFamily::CLow, Rational(1), 100);
        CHECK(boost::multiprecision::isfinite(c100.sup));
        CHECK(c100.sup > 0);
    }
    SECTION("m_max below the family range") {
        CHECK_THROWS_AS(ratio_scan(RatioFamily::CLow, Rational(1), 5), Error);
    }
}
