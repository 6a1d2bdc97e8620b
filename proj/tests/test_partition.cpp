#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "denjoy/partition.hpp"

using namespace denjoy;

namespace {

real golden() { return (std::sqrt(real(5)) - 1) / 2; }

struct Tuned {
    CircleMap map;
    ContinuedFraction cf;
    MapStats stats;
};

Tuned tuned(CircleMap f, real rho) {
    const TuneResult tr = tune_translation(f, rho, 1e-10);
    CircleMap g = f.with_translation(tr.translation);
    return {g, cf_expand_convergents(rho, 40), validate_p_homeo(g)};
}

Tuned main_pq() { return tuned(make_pq_two_break(CirclePoint(0.2), CirclePoint(0.6), 2, 0.8, 0), golden()); }

// ||q rho|| by direct arithmetic
real dist_to_int(std::int64_t q, real rho) {
    const real x = q * rho;
    return std::abs(x - std::round(x));
}

}  // namespace

TEST_CASE("rotation partition has two lengths") {
    const real rho = golden();
    const ContinuedFraction cf = cf_expand_convergents(rho, 40);
    const DynamicalPartition p = build_partition(make_rotation(rho), cf, CirclePoint(0), 4);
    CHECK(p.q_n == 5);
    CHECK(p.q_prev == 3);
    CHECK(p.elements.size() == 8);
    const real a = dist_to_int(3, rho), b = dist_to_int(5, rho);
    std::set<int> seen;
    for (const auto& e : p.elements) {
        const bool is_a = std::abs(e.interval.length - a) < 1e-14;
        const bool is_b = std::abs(e.interval.length - b) < 1e-14;
        CHECK((is_a || is_b));
        seen.insert(is_a ? 0 : 1);
        CHECK((e.rank_tag == 3) == is_a);
    }
    CHECK(seen.size() == 2);
}

TEST_CASE("partition counts and covering") {
    const Tuned t = main_pq();
    const DynamicalPartition p6 = build_partition(t.map, t.cf, CirclePoint(0), 6);
    CHECK(p6.elements.size() == 21);
    CHECK(std::abs(p6.total_length - 1) <= 13 * 10 * kEps);

    for (int n = 1; n <= 12; ++n) {
        const DynamicalPartition p = build_partition(t.map, t.cf, CirclePoint(0.37), n);
        CHECK(p.elements.size() == static_cast<std::size_t>(t.cf.q(n) + t.cf.q(n - 1)));
        int tag_prev = 0, tag_n = 0;
        for (const auto& e : p.elements) (e.rank_tag == n ? tag_n : tag_prev)++;
        CHECK(tag_prev == t.cf.q(n));
        CHECK(tag_n == t.cf.q(n - 1));
        // disjoint interiors: consecutive lefts advance by the element length
        for (std::size_t k = 0; k + 1 < p.elements.size(); ++k) {
            const auto& a = p.elements[k];
            const auto& b = p.elements[k + 1];
            CHECK(std::abs(ccw_distance(a.interval.left.value(), b.interval.left.value()) - a.interval.length) <
                  1e-13);
        }
    }

    // k1 = 1: n = 1 gives two elements
    const DynamicalPartition p1 = build_partition(t.map, t.cf, CirclePoint(0), 1);
    CHECK(p1.elements.size() == 2);
}

TEST_CASE("refinement") {
    const Tuned t = main_pq();
    for (int n = 1; n < 12; ++n) {
        const auto coarse = build_partition(t.map, t.cf, CirclePoint(0.1), n);
        const auto fine = build_partition(t.map, t.cf, CirclePoint(0.1), n + 1);
        const RefinementReport r = check_refinement(coarse, fine, t.cf);
        CHECK(r.split_elements == t.cf.q(n));
        CHECK(r.persisted_elements == t.cf.q(n - 1));
        for (auto k : r.pieces) CHECK(k == 2);
    }

    // rho = [1, 3, 1, 1, ...]
    ContinuedFraction cf = cf_from_quotients({1, 3});
    for (int i = 0; i < 30; ++i) cf.push(1);
    const real rho = cf.value();
    const ContinuedFraction back = cf_expand_convergents(rho, 10);
    CHECK(back.k(2) == 3);
    const CircleMap r = make_rotation(rho);
    const auto c1 = build_partition(r, cf, CirclePoint(0), 1);
    const auto f2 = build_partition(r, cf, CirclePoint(0), 2);
    const RefinementReport rep = check_refinement(c1, f2, cf);
    REQUIRE(rep.pieces.size() == 1);
    CHECK(rep.pieces[0] == 4);
    // persistence: every rank-n interval of xi_n reappears in xi_{n+1}
    for (const auto& e : c1.elements) {
        if (e.rank_tag != 1) continue;
        const PartitionElement* same = f2.find(1, e.index);
        REQUIRE(same != nullptr);
        CHECK(std::abs(same->interval.left.value() - e.interval.left.value()) < 1e-12);
        CHECK(std::abs(same->interval.length - e.interval.length) < 1e-12);
    }
}

TEST_CASE("Denjoy products") {
    const real rho = golden();
    const ContinuedFraction cf = cf_expand_convergents(rho, 40);
    CHECK(denjoy_product(make_rotation(rho), CirclePoint(0.3), cf.q(8), 0) == 1);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    const Tuned pl = tuned(make_pl_two_break(CirclePoint(0.2), CirclePoint(0.6), 2, 0), rho);
    CHECK(std::abs(pl.stats.v - 2 * std::log(real(2))) < 1e-13);
    for (int i = 0; i < 100; ++i) {
        const real p = denjoy_product(pl.map, CirclePoint(u(rng)), cf.q(8), pl.stats.v);
        CHECK(p >= 0.25 - 1e-12);
        CHECK(p <= 4 + 1e-12);
    }
    const Tuned pq = main_pq();
    for (int i = 0; i < 100; ++i) {
        const real p = denjoy_product(pq.map, CirclePoint(u(rng)), cf.q(10), pq.stats.v);
        CHECK(p >= std::exp(-pq.stats.v) * (1 - 1e-12));
        CHECK(p <= std::exp(pq.stats.v) * (1 + 1e-12));
    }
}

TEST_CASE("decay of element lengths") {
    const real rho = golden();
    const ContinuedFraction cf = cf_expand_convergents(rho, 40);
    const auto rot = max_element_decay(make_rotation(rho), cf, CirclePoint(0), 12);
    // rank 0 generator is [x0, x0 + rho] itself, not ||rho||
    CHECK(std::abs(rot[0].max_length - rho) < 1e-15);
    for (std::size_t i = 1; i < rot.size(); ++i)
        CHECK(std::abs(rot[i].max_length - dist_to_int(cf.q(rot[i].n - 1), rho)) < 1e-13);

    const Tuned t = main_pq();
    const auto rows = max_element_decay(t.map, t.cf, CirclePoint(0), 12);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].max_length <= rows[i - 1].max_length);
    const LogFit fit = fit_log_decay(rows, 4, 12);
    CHECK(fit.slope <= std::log(t.stats.lambda) + 0.05);
}

TEST_CASE("q_n-smallness") {
    const Tuned t = main_pq();
    for (int n = 2; n <= 10; ++n) {
        const auto x = iterate(t.map, CirclePoint(0.3), t.cf.q(n));
        // generator of rank n, oriented by parity
        const CirclePoint xn = x.back();
        const CircleInterval gen = n % 2 ? CircleInterval::between(xn, x.front()) : CircleInterval::between(x.front(), xn);
        CHECK(is_qn_small(t.map, gen, t.cf, n));
        // every rank-(n-1) element of xi_n is q_n-small
        const auto part = build_partition(t.map, t.cf, CirclePoint(0.3), n);
        for (const auto& e : part.elements)
            if (e.rank_tag == n - 1) CHECK(is_qn_small(t.map, e.interval, t.cf, n));
        // twice a rank-(n-1) generator is too long
        const auto& big = *part.find(n - 1, 0);
        CHECK(!is_qn_small(t.map, {big.interval.left, 2 * big.interval.length}, t.cf, n));
        CHECK(!is_qn_small(t.map, {CirclePoint(0), 1}, t.cf, n));
    }
}

TEST_CASE("property: derivative ratios along q_n-close pairs") {
    const Tuned t = main_pq();
    const real ev = std::exp(t.stats.v);
    for (int n = 3; n <= 10; ++n) {
        const auto part = build_partition(t.map, t.cf, CirclePoint(0.05), n);
        for (const auto& e : part.elements) {
            if (e.rank_tag != n - 1) continue;
            const CirclePoint x = e.interval.left, y = e.interval.right();
            for (std::int64_t l : {std::int64_t(1), t.cf.q(n - 1), t.cf.q(n)}) {
                const real ratio = orbit_derivative(t.map, x, l) / orbit_derivative(t.map, y, l);
                CHECK(ratio >= 1 / ev * (1 - 1e-12));
                CHECK(ratio <= ev * (1 + 1e-12));
            }
        }
    }
}

TEST_CASE("property: T^{q_n} images are e^v-comparable") {
    const Tuned t = main_pq();
    const real ev = std::exp(t.stats.v);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0, 1), w(1e-4, 1e-2);
    for (int i = 0; i < 20; ++i) {
        const real l = u(rng), len = w(rng);
        for (int n : {4, 8, 11}) {
            const std::int64_t q = t.cf.q(n);
            const real a = iterate_lift(t.map, l, q), b = iterate_lift(t.map, l + len, q);
            const real ratio = (b - a) / len;
            CHECK(ratio >= 1 / ev);
            CHECK(ratio <= ev);
        }
    }
}
