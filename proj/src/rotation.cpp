#include "denjoy/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "denjoy/io.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

namespace {

__extension__ using i128 = __int128;
__extension__ using u128 = unsigned __int128;

constexpr std::int64_t kI64Max = std::numeric_limits<std::int64_t>::max();

bool fits(i128 v) { return v <= kI64Max && v >= -kI64Max; }

// f^q(0) - m q - p with the integer parts cancelled before any rounding.
real displacement(const CircleMap& map, std::int64_t p, std::int64_t q, std::int64_t m,
                  std::int64_t cap) {
    if (q > cap)
        fail(ErrorKind::PrecisionBudgetExceeded,
             "denominator " + std::to_string(q) + " exceeds orbit cap " + std::to_string(cap));
    LiftPoint x{0, 0};
    for (std::int64_t i = 0; i < q; ++i) x = map.advance(x);
    return static_cast<real>(x.turns - m * q - p) + x.offset;
}

real rational_cutoff(std::int64_t q) { return 4 * kEps * static_cast<real>(q); }

RotationEstimate reduced(real value, real lower, real upper, RotationMethod method) {
    const real shift = std::floor(value);
    RotationEstimate e;
    e.value = value - shift;
    e.lower = lower - shift;
    e.upper = upper - shift;
    e.method = method;
    return e;
}

}  // namespace

// ---------------------------------------------------------------------------

real ContinuedFraction::value() const {
    const Convergent& c = convergents.back();
    return static_cast<real>(c.p) / static_cast<real>(c.q);
}

void ContinuedFraction::push(std::int64_t k) {
    if (k < 1) fail(ErrorKind::InvalidArgument, "partial quotients must be positive");
    const auto n = static_cast<std::int64_t>(quotients.size()) + 1;
    const i128 pn = i128(k) * p(n - 1) + p(n - 2);
    const i128 qn = i128(k) * q(n - 1) + q(n - 2);
    if (!fits(pn) || !fits(qn)) fail(ErrorKind::InvalidArgument, "convergent overflows 64 bits");
    quotients.push_back(k);
    convergents.push_back({static_cast<std::int64_t>(pn), static_cast<std::int64_t>(qn)});
}

bool ContinuedFraction::recursion_holds() const {
    if (convergents.size() != quotients.size() + 1) return false;
    if (convergents[0].p != 0 || convergents[0].q != 1) return false;
    for (std::size_t i = 1; i < convergents.size(); ++i) {
        const auto n = static_cast<std::int64_t>(i);
        const i128 k = quotients[i - 1];
        if (k * q(n - 1) + q(n - 2) != q(n)) return false;
        if (k * p(n - 1) + p(n - 2) != p(n)) return false;
    }
    return true;
}

ContinuedFraction cf_from_quotients(const std::vector<std::int64_t>& quotients) {
    ContinuedFraction cf;
    for (std::int64_t k : quotients) cf.push(k);
    return cf;
}

bool RotationEstimate::contains(real rho) const {
    for (int s = -1; s <= 1; ++s) {
        if (lower <= rho + s && rho + s <= upper) return true;
    }
    return false;
}

bool enclosures_intersect(const RotationEstimate& a, const RotationEstimate& b) {
    for (int s = -1; s <= 1; ++s) {
        if (a.lower <= b.upper + s && b.lower + s <= a.upper) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------

RotationEstimate rho_iterate_estimate(const CircleMap& map, std::int64_t n, std::int64_t cap) {
    if (n < 1) fail(ErrorKind::InvalidArgument, "iteration count must be positive");
    if (n > cap) fail(ErrorKind::PrecisionBudgetExceeded, "iteration count exceeds orbit cap");
    LiftPoint x{0, 0};
    for (std::int64_t i = 0; i < n; ++i) x = map.advance(x);
    const real nn = static_cast<real>(n);
    // split turns so the quotient stays exact in the integer part
    const std::int64_t whole = x.turns / n;
    const real value = static_cast<real>(whole) +
                       (static_cast<real>(x.turns - whole * n) + x.offset) / nn;
    return reduced(value, value - 1 / nn, value + 1 / nn, RotationMethod::iterate);
}

FareyResult rho_farey(const CircleMap& map, std::int64_t depth, std::int64_t cap) {
    if (depth < 1) fail(ErrorKind::InvalidArgument, "Farey depth must be positive");
    const auto m = static_cast<std::int64_t>(std::floor(map.translation()));

    FareyResult out;
    Convergent left{0, 1}, right{1, 1};
    std::vector<std::int64_t> runs;  // alternating run lengths, starting with a (maybe empty) L run
    runs.push_back(0);
    bool last_right = false;
    bool hit = false;
    Convergent hit_at;

    for (std::int64_t step = 0; step < depth; ++step) {
        const Convergent med{left.p + right.p, left.q + right.q};
        const real d = displacement(map, med.p, med.q, m, cap);
        out.orbit_evaluations += med.q;
        if (std::abs(d) <= rational_cutoff(med.q)) {
            hit = true;
            hit_at = med;
            break;
        }
        const bool go_right = d > 0;  // rho > p/q
        if (step == 0) {
            if (go_right) runs.push_back(0);
        } else if (go_right != last_right) {
            runs.push_back(0);
        }
        ++runs.back();
        last_right = go_right;
        (go_right ? left : right) = med;
    }

    // First L run of length a gives k1 = a + 1; every later run is one quotient.
    // The run in progress only counts once it is closed by an exact hit.
    std::vector<std::int64_t> ks;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const bool closed = i + 1 < runs.size() || hit;
        if (!closed) break;
        std::int64_t k = runs[i] + (i == 0 ? 1 : 0);
        if (i + 1 == runs.size()) k += 1;  // closed by the hit
        ks.push_back(k);
    }
    out.cf = cf_from_quotients(ks);
    out.cf.terminates = hit;

    const real base = static_cast<real>(m);
    if (hit) {
        const real r = base + static_cast<real>(hit_at.p) / static_cast<real>(hit_at.q);
        out.estimate = reduced(r, r, r, RotationMethod::farey);
        out.estimate.rational = true;
        out.estimate.fraction = hit_at;
        out.left = out.right = hit_at;
    } else {
        const real lo = base + static_cast<real>(left.p) / static_cast<real>(left.q);
        const real hi = base + static_cast<real>(right.p) / static_cast<real>(right.q);
        out.estimate = reduced(real(0.5) * (lo + hi), lo, hi, RotationMethod::farey);
        out.left = left;
        out.right = right;
    }
    return out;
}

ContinuedFraction cf_expand_convergents(real rho, std::size_t n_max) {
    if (!(rho > 0 && rho < 1)) fail(ErrorKind::InvalidArgument, "rho must lie in (0, 1)");
    constexpr int bits = std::numeric_limits<real>::digits;
    int e = 0;
    const real mant = std::frexp(rho, &e);
    const int shift = bits - e;
    if (shift > 126) fail(ErrorKind::InvalidArgument, "rho too small to expand");
    // rho is exactly num / den
    u128 num = static_cast<u128>(static_cast<std::uint64_t>(std::ldexp(mant, bits)));
    u128 den = u128(1) << shift;

    ContinuedFraction cf;
    const real tiny = 1000 * kEps;
    while (cf.depth() < n_max && num != 0) {
        const u128 k = den / num;
        const u128 r = den % num;
        if (k > static_cast<u128>(kI64Max)) break;
        const auto n = static_cast<std::int64_t>(cf.depth()) + 1;
        const i128 qn = i128(static_cast<std::int64_t>(k)) * cf.q(n - 1) + cf.q(n - 2);
        if (!fits(qn)) break;
        cf.push(static_cast<std::int64_t>(k));
        const real residual = static_cast<real>(r) / static_cast<real>(num);
        if (r == 0 || residual < tiny) {
            cf.terminates = true;
            break;
        }
        // past this point the quotients describe the rounding of the input
        const real qr = static_cast<real>(cf.q(n));
        if (16 * kEps * qr * qr > 1) break;
        den = num;
        num = r;
    }
    return cf;
}

// ---------------------------------------------------------------------------

TuneResult tune_translation(const CircleMap& family, const ContinuedFraction& target, real tol,
                            std::int64_t cap) {
    if (!(tol >= real(1e-12))) fail(ErrorKind::InvalidArgument, "tolerance below 1e-12");
    if (target.depth() < 2) fail(ErrorKind::InvalidArgument, "target continued fraction too short");

    std::size_t N = 0;
    bool found = false;
    for (std::size_t n = 1; n + 1 <= target.depth(); ++n) {
        const real w = 1 / (static_cast<real>(target.q(n)) * static_cast<real>(target.q(n + 1)));
        if (w <= tol) {
            N = n;
            found = true;
            break;
        }
    }
    if (!found) fail(ErrorKind::TolUnreachable, "target expansion too shallow for the tolerance");
    if (target.q(N + 1) > cap)
        fail(ErrorKind::TolUnreachable, "certifying denominator exceeds orbit cap");

    Convergent lo{target.p(N), target.q(N)};
    Convergent hi{target.p(N + 1), target.q(N + 1)};
    if (i128(lo.p) * hi.q > i128(hi.p) * lo.q) std::swap(lo, hi);

    auto d_lo = [&](real t) { return displacement(family.with_translation(t), lo.p, lo.q, 0, cap); };
    auto d_hi = [&](real t) { return displacement(family.with_translation(t), hi.p, hi.q, 0, cap); };

    // rho(f_0) = 0 and rho(f_1) = 1 for a degree-one family with g(0) = 0
    if (!(d_hi(0) < 0) || !(d_lo(1) > 0))
        fail(ErrorKind::NotBracketed, "rho(f_0), rho(f_1) do not straddle the target");

    TuneResult res;
    res.target = target;
    res.bracket_index = N;
    real t_lo = 0, t_hi = 1;
    for (int i = 0; i < 200; ++i) {
        const real t = real(0.5) * (t_lo + t_hi);
        res.bisections = i + 1;
        if (d_lo(t) <= rational_cutoff(lo.q)) {
            t_lo = t;
            continue;
        }
        if (d_hi(t) >= -rational_cutoff(hi.q)) {
            t_hi = t;
            continue;
        }
        const real a = static_cast<real>(lo.p) / static_cast<real>(lo.q);
        const real b = static_cast<real>(hi.p) / static_cast<real>(hi.q);
        res.translation = t;
        res.enclosure.value = real(0.5) * (a + b);
        res.enclosure.lower = a;
        res.enclosure.upper = b;
        res.enclosure.method = RotationMethod::farey;
        res.achieved_tol = b - a;
        return res;
    }
    fail(ErrorKind::TolUnreachable, "bisection budget exhausted");
}

TuneResult tune_translation(const CircleMap& family, real target_rho, real tol, std::int64_t cap) {
    return tune_translation(family, cf_expand_convergents(target_rho, 64), tol, cap);
}

std::string cf_table_csv(const ContinuedFraction& cf, real rho) {
    std::ostringstream out;
    out << "n,k_n,p_n,q_n,abs_err\n";
    for (std::size_t n = 1; n <= cf.depth(); ++n) {
        const auto i = static_cast<std::int64_t>(n);
        const real approx = static_cast<real>(cf.p(i)) / static_cast<real>(cf.q(i));
        out << n << ',' << cf.k(n) << ',' << cf.p(i) << ',' << cf.q(i) << ','
            << fmt_real(std::abs(rho - approx)) << '\n';
    }
    return out.str();
}

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
