#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "denjoy/maps.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

// z1 < z2 < z3 < z4 as lift coordinates, hull shorter than one turn
struct Quadruple {
    real z1 = 0, z2 = 0, z3 = 0, z4 = 0;

    real hull() const { return z4 - z1; }
    Quadruple shifted(real by) const { return {z1 + by, z2 + by, z3 + by, z4 + by}; }
    // throws DegenerateQuadruple on bad ordering or gaps below 10 eps * hull
    void validate() const;
};

real cross_ratio(const Quadruple& q);

template <class F>
Quadruple map_quadruple(const Quadruple& q, F&& f) {
    return {f(q.z1), f(q.z2), f(q.z3), f(q.z4)};
}

// Cr(f(z)) / Cr(z) for any increasing f: real -> real
template <class F>
real distortion(const Quadruple& q, F&& f) {
    const real before = cross_ratio(q);
    return cross_ratio(map_quadruple(q, f)) / before;
}

real distortion(const Quadruple& q, const CircleMap& map);
// Dist(q; f^steps) from the endpoint images, integer turns cancelled first
real distortion_iterate(const Quadruple& q, const CircleMap& map, std::int64_t steps);

real g_func(real x, real sigma);
real f_func(real x, real t, real sigma);
// right-interval mirror: break at relative position theta of [z3, z4]
real f_func_right(real eta, real theta, real sigma);

struct NormalizedCoords {
    real xi = 0;   // (z3 - z2) / (z2 - z1)
    real eta = 0;  // (z3 - z2) / (z4 - z3)
    std::optional<real> z;      // (z2 - c) / (z2 - z1) when c in [z1, z2]
    std::optional<real> theta;  // (c - z3) / (z4 - z3) when c in [z3, z4]
};

NormalizedCoords normalized_coords(const Quadruple& q, std::optional<real> tracked = std::nullopt);

enum class BreakSide { left, right };

struct ClosedFormResult {
    real predicted = 1;
    real actual = 1;
    real residual = 0;
    real d2_integral = 0;     // int over [z1, z4] of |D^2 f|
    real residual_bound = 0;  // k1_hat * d2_integral
    real sigma = 1;
    real position = 0;        // z or theta
    real ratio = 0;           // xi or eta
};

// Exactly one break in the hull, inside the stated side interval.
ClosedFormResult single_break_closed_form(const Quadruple& q, const CircleMap& map, BreakSide side,
                                          real k1_hat = 0);

struct ChainResult {
    real total = 1;
    real direct = 1;
    std::vector<real> factors;
    std::vector<Quadruple> images;  // images[j] is the quadruple before step j, shifted near [0, 1)
};

ChainResult distortion_chain(const Quadruple& q, const CircleMap& map, std::int64_t steps);

// Dominant term of the break-free estimate: h * osc(D^2 f) + (int |D^2 f|)^2 on [z1, z4]
real smooth_bound_term(const Quadruple& q, const CircleMap& map);

struct Calibration {
    real k1_hat = 0;  // 2 x max residual / int |D^2 f|, single break samples
    real c1_hat = 0;  // 2 x max |Dist - 1| / smooth_bound_term, break-free samples
    int samples = 0;
};

Calibration calibrate_constants(const CircleMap& map, std::uint64_t seed, int samples = 1000);

// rows: z1, z2, z3, z4, Cr, Dist, predicted, residual, bound
std::string quadruple_csv_header();
std::string quadruple_csv_row(const Quadruple& q, real cr, real dist, real predicted, real residual, real bound);

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
