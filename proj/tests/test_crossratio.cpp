#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "denjoy/crossratio.hpp"
#include "denjoy/partition.hpp"
#include "denjoy/rotation.hpp"

using namespace denjoy;

namespace {

real golden() { return (std::sqrt(real(5)) - 1) / 2; }

CircleMap tuned_pq() {
    const CircleMap f = make_pq_two_break(CirclePoint(0.2), CirclePoint(0.6), 2, 0.8, 0);
    return f.with_translation(tune_translation(f, golden(), 1e-10).translation);
}

// Df = 2 left of 0 and 1 right of it, f(0) = 0
PiecewiseQuadratic pl_frame() { return PiecewiseQuadratic({Segment{-10, 0, -20, 2, 2}, Segment{0, 10, 0, 1, 1}}); }

}  // namespace

TEST_CASE("cross ratio values") {
    CHECK(cross_ratio({0, 1, 2, 3}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(cross_ratio({0, 0.5, 1, 1.5}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(std::abs(cross_ratio({0, 0.1, 0.2, 1.0}) - (0.1 * 0.8) / (0.2 * 0.9)) < 1e-15);
    CHECK(std::abs(cross_ratio({0, 0.1, 0.2, 1.0}) - 0.4444444444) < 1e-10);
    CHECK_THROWS_AS(cross_ratio({0, 1e-20, 0.5, 0.9}), Error);
    CHECK_THROWS_AS(cross_ratio({0, 0.5, 0.4, 0.9}), Error);
}

TEST_CASE("distortion examples") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3, 3), pos(0.01, 1), scale(0.1, 10);
    for (int i = 0; i < 100; ++i) {
        const real z1 = u(rng);
        const Quadruple q{z1, z1 + pos(rng) / 4, 0, 0};
        Quadruple r = q;
        r.z3 = r.z2 + pos(rng) / 4;
        r.z4 = r.z3 + pos(rng) / 4;
        const real a = scale(rng), b = u(rng);
        CHECK(std::abs(distortion(r, [&](real x) { return a * x + b; }) - 1) < 1e-13);
    }

    // images (-2, 0, 1, 2): Cr = 2 * 1 / (3 * 2)
    const PiecewiseQuadratic frame = pl_frame();
    const real d = distortion(Quadruple{-1, 0, 1, 2}, frame);
    CHECK(std::abs(d - (real(1) / 3) / (real(1) / 4)) < 1e-12);
    CHECK(std::abs(d - g_func(1, 2)) < 1e-12);

    // x^2 on [1, 2]: brute-force cross ratios of the squares
    const PiecewiseQuadratic sq({Segment{0, 10, 0, 0, 20}});
    const Quadruple q{1, 1.2, 1.5, 2};
    const long double a1 = 1, a2 = 1.44L, a3 = 2.25L, a4 = 4;
    const long double cr_img = (a2 - a1) * (a4 - a3) / ((a3 - a1) * (a4 - a2));
    const long double cr0 = 0.2L * 0.5L / (0.5L * 0.8L);
    CHECK(std::abs(distortion(q, sq) - static_cast<real>(cr_img / cr0)) < 1e-13);
    CHECK(std::abs(sq.abs_d2_integral(1, 2) - 2 * q.hull()) < 1e-13);
}

TEST_CASE("G and F") {
    CHECK(std::abs(g_func(1, 2) - real(4) / 3) < 1e-15);
    CHECK(g_func(0, 2) == 1);
    // the limit at infinity is sigma itself
    CHECK(std::abs(g_func(1e12, 2) - 2) < 1e-11);
    CHECK(std::abs(g_func(1e12, 0.8) - 0.8) < 1e-11);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 100);
    for (int i = 0; i < 100; ++i) {
        const real x = u(rng);
        CHECK(std::abs(f_func(x, 1, 2) - 1) < 1e-14);
        CHECK(std::abs(f_func(x, 1, 0.8) - 1) < 1e-14);
        CHECK(f_func(x, 0, 2) == g_func(x, 2));
    }
    real prev = g_func(0, 2);
    for (int i = 1; i < 200; ++i) {
        const real g = g_func(i * 0.1, 2);
        CHECK(g >= prev);
        prev = g;
    }
}

TEST_CASE("single-break closed form on PL maps") {
    // sigma(a) = Df_-/Df_+ = 1 / slope_ratio
    const CircleMap pl = make_pl_two_break(CirclePoint(0.3), CirclePoint(0.7), 0.5, 0.1);
    REQUIRE(std::abs(pl.breaks()[0].sigma() - 2) < 1e-14);
    const real a = 0.3, h = 0.01;

    const ClosedFormResult r0 = single_break_closed_form({a - h, a, a + h, a + 2 * h}, pl, BreakSide::left);
    CHECK(std::abs(r0.predicted - real(4) / 3) < 1e-12);
    CHECK(std::abs(r0.actual - real(4) / 3) < 1e-12);
    CHECK(r0.residual < 1e-12);

    const ClosedFormResult r1 =
        single_break_closed_form({a - h / 2, a + h / 2, a + 3 * h / 2, a + 5 * h / 2}, pl, BreakSide::left);
    CHECK(std::abs(r1.predicted - (2 - 0.5) * 2 / (2 - 0.5 + 1)) < 1e-12);
    CHECK(std::abs(r1.actual - 1.2) < 1e-12);

    // break in the right interval
    for (real theta : {0.0, 0.25, 0.5, 0.9}) {
        const real z3 = a - theta * h;
        const Quadruple q{z3 - 2.5 * h, z3 - 0.7 * h, z3, z3 + h};
        const ClosedFormResult r = single_break_closed_form(q, pl, BreakSide::right);
        CHECK(r.residual < 1e-12);
    }
    CHECK_THROWS_AS(single_break_closed_form({a - 3 * h, a - 2 * h, a - h / 2, a + h}, pl, BreakSide::left), Error);
    CHECK_THROWS_AS(single_break_closed_form({a + h, a + 2 * h, a + 3 * h, a + 4 * h}, pl, BreakSide::left), Error);
}

TEST_CASE("single-break residual shrinks linearly on pq maps") {
    const CircleMap f = tuned_pq();
    const Calibration cal = calibrate_constants(f, 99);
    CHECK(cal.k1_hat > 0);
    real h = 0.04;
    real prev = -1;
    for (int i = 0; i < 6; ++i, h /= 2) {
        const Quadruple q{0.2 - 0.4 * h, 0.2 + 0.1 * h, 0.2 + 0.5 * h, 0.2 + h};
        const ClosedFormResult r = single_break_closed_form(q, f, BreakSide::left, cal.k1_hat);
        CHECK(r.residual <= r.residual_bound);
        if (prev > 0) {
            const real ratio = prev / r.residual;
            CHECK(ratio > 1.7);
            CHECK(ratio < 2.3);
        }
        prev = r.residual;
    }
}

TEST_CASE("distortion chain") {
    const Quadruple q{0.31, 0.32, 0.335, 0.35};
    const ChainResult rot = distortion_chain(q, make_rotation(golden()), 55);
    for (real fct : rot.factors) CHECK(std::abs(fct - 1) < 1e-12);
    CHECK(std::abs(rot.total - 1) < 1e-12);

    const CircleMap f = tuned_pq();
    const ChainResult one = distortion_chain(q, f, 1);
    CHECK(std::abs(one.total - distortion(q, f)) < 1e-15);

    const ContinuedFraction cf = cf_expand_convergents(golden(), 40);
    for (int n = 1; n <= 12; ++n) {
        const auto part = build_partition(f, cf, CirclePoint(0.45), n);
        const auto& e = *part.find(n - 1, 0);
        const real l = e.interval.left.value(), len = e.interval.length;
        const Quadruple hq{l + 0.1 * len, l + 0.3 * len, l + 0.55 * len, l + 0.9 * len};
        const ChainResult c = distortion_chain(hq, f, cf.q(n));
        CHECK(std::abs(c.total / c.direct - 1) < 1e-10);
    }
}

TEST_CASE("property: telescoping for compositions") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1), gap(0.005, 0.05);
    const CircleMap g = make_pq_two_break(CirclePoint(0.1), CirclePoint(0.55), 1.7, 0.6, 0.2);
    const CircleMap h = make_pq_two_break(CirclePoint(0.35), CirclePoint(0.8), 0.5, 1.4, 0.4);
    for (int i = 0; i < 100; ++i) {
        const real z1 = u(rng);
        const Quadruple q{z1, z1 + gap(rng), 0, 0};
        Quadruple r = q;
        r.z3 = r.z2 + gap(rng);
        r.z4 = r.z3 + gap(rng);
        const Quadruple hr = map_quadruple(r, [&](real x) { return h.lift(x); });
        const real lhs = distortion(r, [&](real x) { return g.lift(h.lift(x)); });
        const real rhs = distortion(hr, g) * distortion(r, h);
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("property: closed form is exact on PL maps") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.05, 0.95), ratio(0.3, 3), gap(0.001, 0.05);
    for (int i = 0; i < 100; ++i) {
        const real a = 0.2, c = 0.6;
        const CircleMap pl = make_pl_two_break(CirclePoint(a), CirclePoint(c), ratio(rng), u(rng));
        const real g1 = gap(rng), g2 = gap(rng), g3 = gap(rng);
        const BreakSide side = i % 2 ? BreakSide::left : BreakSide::right;
        const real z1 = side == BreakSide::left ? a - u(rng) * g1 : a - g1 - g2 - u(rng) * g3;
        const ClosedFormResult r = single_break_closed_form({z1, z1 + g1, z1 + g1 + g2, z1 + g1 + g2 + g3}, pl, side);
        CHECK(r.d2_integral == 0);
        CHECK(r.residual < 1e-12);
    }
}

TEST_CASE("property: break-free bound and its scaling") {
    const CircleMap f = tuned_pq();
    const Calibration cal = calibrate_constants(f, 5);
    CHECK(cal.c1_hat > 0);
    for (real start : {0.3, 0.7, 0.95}) {
        real h = 0.05;
        real prev_term = -1;
        for (int i = 0; i <= 5; ++i, h /= 2) {
            const Quadruple q{start, start + 0.3 * h, start + 0.55 * h, start + h};
            const real term = smooth_bound_term(q, f);
            CHECK(std::abs(distortion(q, f) - 1) <= cal.c1_hat * term);
            // within one smooth piece the term is (h |D^2 f|)^2, so halving h at least halves it
            if (prev_term > 0) CHECK(prev_term / term >= 2);
            prev_term = term;
        }
    }
}

TEST_CASE("property: normalized coordinates are stable along q_n-small orbits") {
    const CircleMap f = tuned_pq();
    const real ev = std::exp(validate_p_homeo(f).v);
    const ContinuedFraction cf = cf_expand_convergents(golden(), 40);
    for (int n = 4; n <= 10; ++n) {
        const auto part = build_partition(f, cf, CirclePoint(0.77), n);
        const auto& e = *part.find(n - 1, 0);
        const real l = e.interval.left.value(), len = e.interval.length;
        const Quadruple q{l + 0.05 * len, l + 0.3 * len, l + 0.6 * len, l + 0.95 * len};
        const NormalizedCoords c0 = normalized_coords(q);
        const ChainResult ch = distortion_chain(q, f, cf.q(n));
        for (const Quadruple& im : ch.images) {
            const NormalizedCoords c = normalized_coords(im);
            CHECK(c.xi / c0.xi >= 1 / ev);
            CHECK(c.xi / c0.xi <= ev);
            CHECK(c.eta / c0.eta >= 1 / ev);
            CHECK(c.eta / c0.eta <= ev);
        }
    }
}
