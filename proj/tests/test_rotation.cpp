#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "denjoy/rotation.hpp"

using namespace denjoy;

namespace {

real golden() { return (std::sqrt(real(5)) - 1) / 2; }

// plain floating CF, independent of the library's exact expansion
std::vector<std::int64_t> naive_cf(long double x, int n) {
    std::vector<std::int64_t> ks;
    for (int i = 0; i < n && x > 1e-12L; ++i) {
        const long double y = 1 / x;
        const auto k = static_cast<std::int64_t>(std::floor(y + 1e-12L));
        ks.push_back(k);
        x = y - k;
    }
    return ks;
}

}  // namespace

TEST_CASE("golden mean expansion") {
    const ContinuedFraction cf = cf_expand_convergents(golden(), 40);
    REQUIRE(cf.depth() >= 10);
    const auto oracle = naive_cf(std::sqrt(5.0L) / 2 - 0.5L, 10);
    for (std::size_t n = 1; n <= 10; ++n) {
        CHECK(cf.k(n) == 1);
        CHECK(cf.k(n) == oracle[n - 1]);
    }
    // Fibonacci by direct recurrence
    std::int64_t a = 1, b = 1;
    for (int n = 0; n <= 10; ++n) {
        CHECK(cf.q(n) == a);
        const std::int64_t c = a + b;
        a = b;
        b = c;
    }
    CHECK(cf.q(9) == 55);
    CHECK(cf.q(10) == 89);
    CHECK(cf.recursion_holds());
    CHECK(!cf.terminates);
}

TEST_CASE("rational expansions terminate") {
    const ContinuedFraction third = cf_expand_convergents(real(1) / 3, 20);
    CHECK(third.quotients == std::vector<std::int64_t>{3});
    CHECK(third.terminates);
    const ContinuedFraction quarter = cf_expand_convergents(0.25, 20);
    CHECK(quarter.quotients == std::vector<std::int64_t>{4});
    CHECK(quarter.q(1) == 4);
    CHECK(quarter.p(1) == 1);
    CHECK(cf_expand_convergents(0.4, 20).quotients == std::vector<std::int64_t>{2, 2});
}

TEST_CASE("farey descent on rigid rotations") {
    const FareyResult third = rho_farey(make_rotation(real(1) / 3), 40);
    CHECK(third.estimate.rational);
    CHECK(third.estimate.fraction.p == 1);
    CHECK(third.estimate.fraction.q == 3);
    CHECK(third.cf.quotients == std::vector<std::int64_t>{3});

    const FareyResult two_thirds = rho_farey(make_rotation(real(2) / 3), 40);
    CHECK(two_thirds.cf.quotients == std::vector<std::int64_t>{1, 2});

    const FareyResult g = rho_farey(make_rotation(golden()), 14);
    CHECK(!g.estimate.rational);
    REQUIRE(g.cf.depth() >= 10);
    std::int64_t fib[] = {1, 1, 2, 3, 5, 8, 13, 21, 34, 55};
    for (std::size_t n = 1; n <= 10; ++n) CHECK(g.cf.k(n) == 1);
    for (int n = 0; n < 10; ++n) CHECK(g.cf.q(n) == fib[n]);
    CHECK(g.estimate.contains(golden()));
}

TEST_CASE("tuned maps share the quotients of the target") {
    const CircleMap pl = make_pl_two_break(CirclePoint(0.2), CirclePoint(0.6), 2, 0);
    const TuneResult tr = tune_translation(pl, golden(), 1e-10);
    const FareyResult fr = rho_farey(pl.with_translation(tr.translation), 12);
    REQUIRE(fr.cf.depth() >= 8);
    for (std::size_t n = 1; n <= 8; ++n) CHECK(fr.cf.k(n) == 1);
}

TEST_CASE("iterate estimate") {
    const RotationEstimate a = rho_iterate_estimate(make_rotation(real(1) / 3), 300);
    CHECK(std::abs(a.value - real(1) / 3) <= real(1) / 300);
    CHECK(a.contains(real(1) / 3));

    const RotationEstimate b = rho_iterate_estimate(make_rotation(0.61803398875), 10000);
    CHECK(b.contains(0.61803398875));
    CHECK(b.width() <= 2e-4 + 1e-15);

    const CircleMap pq = make_pq_two_break(CirclePoint(0.2), CirclePoint(0.6), 2, 0.8, 0.6);
    const RotationEstimate c = rho_iterate_estimate(pq, 10000);
    const FareyResult d = rho_farey(pq, 25);
    CHECK(enclosures_intersect(c, d.estimate));
}

TEST_CASE("tune_translation certifies the target") {
    const TuneResult rot = tune_translation(make_rotation(0), golden(), 1e-10);
    CHECK(std::abs(rot.translation - golden()) <= 1e-10);

    for (const CircleMap& f : {make_pq_two_break(CirclePoint(0.2), CirclePoint(0.6), 2, 0.8, 0),
                               make_pl_two_break(CirclePoint(0.2), CirclePoint(0.6), 2, 0)}) {
        const TuneResult tr = tune_translation(f, golden(), 1e-10);
        CHECK(tr.enclosure.contains(golden()));
        CHECK(tr.achieved_tol <= 1e-10);
        // independent certificate with a fresh Farey descent
        const FareyResult fr = rho_farey(f.with_translation(tr.translation), 30);
        CHECK(enclosures_intersect(fr.estimate, tr.enclosure));
        CHECK(std::abs(fr.estimate.value - golden()) <= 1e-10 + fr.estimate.width());
    }
    CHECK_THROWS(tune_translation(make_rotation(0), golden(), 1e-14));
}

TEST_CASE("property: rotation enclosures contain t") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.001, 0.999);
    for (int i = 0; i < 40; ++i) {
        const real t = u(rng);
        const CircleMap r = make_rotation(t);
        const FareyResult fr = rho_farey(r, 30);
        CHECK(fr.estimate.contains(t));
        CHECK(fr.cf.recursion_holds());
        const RotationEstimate it = rho_iterate_estimate(r, 2000);
        CHECK(it.contains(t));
        CHECK(enclosures_intersect(it, fr.estimate));
        CHECK(cf_expand_convergents(t, 30).recursion_holds());
    }
}

TEST_CASE("property: rho is monotone in t") {
    const CircleMap f = make_pq_two_break(CirclePoint(0.2), CirclePoint(0.6), 2, 0.8, 0);
    real prev_lo = -1;
    for (int i = 0; i < 50; ++i) {
        const real t = real(i) / 50;
        const FareyResult fr = rho_farey(f.with_translation(t), 22);
        const RotationEstimate it = rho_iterate_estimate(f.with_translation(t), 5000);
        CHECK(enclosures_intersect(it, fr.estimate));
        // enclosures move right (allowing overlap)
        CHECK(fr.estimate.upper >= prev_lo);
        prev_lo = fr.estimate.lower;
    }
}
