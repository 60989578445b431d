#include "seqcert/relax_scalar.hpp"

#include <cmath>

#include "seqcert/errors.hpp"

namespace seqcert {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

double sigmoid_deriv(double x) {
    double s = sigmoid(x);
    return s * (1.0 - s);
}

double tanh_deriv(double x) {
    double t = std::tanh(x);
    return 1.0 - t * t;
}

namespace {

void check_order(double l, double u, const char* fn) {
    if (!(l <= u)) throw DomainError(std::string(fn) + ": interval endpoints out of order");
}

ScalarRelaxation point(double y) {
    return {0.0, y, 0.0, y, y, y};
}

// Shared s-curve scheme; f must be monotone increasing with its only
// inflection at 0, f' unimodal peaking at 0.
ScalarRelaxation scurve(double l, double u, double (*f)(double), double (*df)(double)) {
    ScalarRelaxation r;
    r.lb = f(l);
    r.ub = f(u);
    if (l == u) return point(r.lb);
    double chord = (f(u) - f(l)) / (u - l);
    double dmin = std::min(df(l), df(u));
    if (l >= 0.0) {  // concave stretch: chord below, shallow tangent above
        r.lo_slope = chord;
        r.lo_bias = f(l) - chord * l;
        r.hi_slope = dmin;
        r.hi_bias = f(u) - dmin * u;
    } else if (u <= 0.0) {  // convex stretch: mirrored
        r.lo_slope = dmin;
        r.lo_bias = f(l) - dmin * l;
        r.hi_slope = chord;
        r.hi_bias = f(u) - chord * u;
    } else {  // straddles the inflection: parallel lines at the endpoints
        r.lo_slope = dmin;
        r.lo_bias = f(l) - dmin * l;
        r.hi_slope = dmin;
        r.hi_bias = f(u) - dmin * u;
    }
    return r;
}

}  // namespace

ScalarRelaxation relu_relax(double l, double u) {
    check_order(l, u, "relu_relax");
    if (l >= 0.0) return {1.0, 0.0, 1.0, 0.0, l, u};
    if (u <= 0.0) return {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    ScalarRelaxation r;
    r.hi_slope = u / (u - l);
    r.hi_bias = -u * l / (u - l);
    r.lo_slope = (u >= -l) ? 1.0 : 0.0;
    r.lo_bias = 0.0;
    r.lb = 0.0;
    r.ub = u;
    return r;
}

ScalarRelaxation tanh_relax(double l, double u) {
    check_order(l, u, "tanh_relax");
    return scurve(
        l, u, [](double x) { return std::tanh(x); }, &tanh_deriv);
}

ScalarRelaxation sigmoid_relax(double l, double u) {
    check_order(l, u, "sigmoid_relax");
    return scurve(l, u, &sigmoid, &sigmoid_deriv);
}

ScalarRelaxation exp_relax(double l, double u) {
    check_order(l, u, "exp_relax");
    double el = std::exp(l), eu = std::exp(u);
    if (!std::isfinite(eu)) throw NumericalError("exp_relax: exp overflow on upper endpoint");
    if (l == u) return point(el);
    ScalarRelaxation r;
    r.hi_slope = (eu - el) / (u - l);
    r.hi_bias = el - r.hi_slope * l;
    double d = std::min(0.5 * (l + u), l + 1.0 - 1e-2);
    double ed = std::exp(d);
    r.lo_slope = ed;
    r.lo_bias = ed * (1.0 - d);
    r.lb = el;
    r.ub = eu;
    return r;
}

ScalarRelaxation reciprocal_relax(double l, double u) {
    check_order(l, u, "reciprocal_relax");
    if (l <= 0.0) throw DomainError("reciprocal_relax: needs a strictly positive interval");
    if (l == u) return point(1.0 / l);
    ScalarRelaxation r;
    r.hi_slope = -1.0 / (l * u);  // chord slope of 1/x
    r.hi_bias = 1.0 / l - r.hi_slope * l;
    double m = 0.5 * (l + u);
    r.lo_slope = -1.0 / (m * m);
    r.lo_bias = 2.0 / m;
    r.lb = 1.0 / u;
    r.ub = 1.0 / l;
    return r;
}

ScalarRelaxation rsqrt_relax(double l, double u) {
    check_order(l, u, "rsqrt_relax");
    if (l <= 0.0) throw DomainError("rsqrt_relax: needs a strictly positive interval");
    double fl = 1.0 / std::sqrt(l), fu = 1.0 / std::sqrt(u);
    if (l == u) return point(fl);
    ScalarRelaxation r;
    r.hi_slope = (fu - fl) / (u - l);
    r.hi_bias = fl - r.hi_slope * l;
    double m = 0.5 * (l + u);
    double fm = 1.0 / std::sqrt(m);
    r.lo_slope = -0.5 * fm / m;
    r.lo_bias = 1.5 * fm;
    r.lb = fu;
    r.ub = fl;
    return r;
}

namespace {

// Slope of an upper pivot line a*q + 1 chosen to minimize the area of the
// gap over [a_lo, a_hi] admissible slopes: the area is linear in the slope
// with sign b^2 - a^2, so an endpoint wins; exact balance picks 0 when
// admissible, else the midpoint.
double pivot_slope(double a, double b, double s_lo, double s_hi) {
    double w = b * b - a * a;
    if (w > 0.0) return s_lo;
    if (w < 0.0) return s_hi;
    if (s_lo <= 0.0 && 0.0 <= s_hi) return 0.0;
    return 0.5 * (s_lo + s_hi);
}

// Hat relaxation in centered coordinates q = x - m, g(q) = relu(1 - |q|),
// for spans with a < 0 < b. Outer spans never reach here.
ScalarRelaxation hat_crossing(double a, double b);

ScalarRelaxation hat_three_right(double a, double b) {
    // a in (-1, 0), b >= 1: pieces 1+q, 1-q, 0. Secant from (a, 1+a) to
    // (1, 0) stays below: it is a chord of the concave part on [a, 1] and
    // negative beyond. Pivot slope range [-1/b, 1].
    ScalarRelaxation r;
    r.lo_slope = -(1.0 + a) / (1.0 - a);
    r.lo_bias = (1.0 + a) / (1.0 - a);
    r.hi_slope = pivot_slope(a, b, -1.0 / b, 1.0);
    r.hi_bias = 1.0;
    r.lb = 0.0;
    r.ub = 1.0;
    return r;
}

ScalarRelaxation hat_crossing(double a, double b) {
    if (a > -1.0 && b < 1.0) {  // peak only, no clipping
        ScalarRelaxation r;
        double chord = -(a + b) / (b - a);
        r.lo_slope = chord;
        r.lo_bias = (1.0 + a) - chord * a;
        r.hi_slope = pivot_slope(a, b, -1.0, 1.0);
        r.hi_bias = 1.0;
        r.lb = std::min(1.0 + a, 1.0 - b);
        r.ub = 1.0;
        return r;
    }
    if (a > -1.0) return hat_three_right(a, b);
    if (b < 1.0) {  // mirror of the three-piece case
        ScalarRelaxation m = hat_three_right(-b, -a);
        ScalarRelaxation r = m;
        r.lo_slope = -m.lo_slope;
        r.hi_slope = -m.hi_slope;
        return r;
    }
    // both flats present: floor below, pivot above
    ScalarRelaxation r;
    r.lo_slope = 0.0;
    r.lo_bias = 0.0;
    r.hi_slope = pivot_slope(a, b, -1.0 / b, -1.0 / a);
    r.hi_bias = 1.0;
    r.lb = 0.0;
    r.ub = 1.0;
    return r;
}

}  // namespace

ScalarRelaxation hat_relax(double l, double u, double m) {
    check_order(l, u, "hat_relax");
    double a = l - m, b = u - m;

    ScalarRelaxation q;
    if (b <= -1.0 || a >= 1.0) {
        q = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    } else if (a >= 0.0) {
        // right flank g = relu(1-q): ReLU rule on z = 1-q
        ScalarRelaxation z = relu_relax(1.0 - b, 1.0 - a);
        q.lo_slope = -z.lo_slope;
        q.lo_bias = z.lo_slope + z.lo_bias;
        q.hi_slope = -z.hi_slope;
        q.hi_bias = z.hi_slope + z.hi_bias;
        q.lb = z.lb;
        q.ub = z.ub;
    } else if (b <= 0.0) {
        // left flank g = relu(1+q): ReLU rule on z = 1+q
        ScalarRelaxation z = relu_relax(1.0 + a, 1.0 + b);
        q.lo_slope = z.lo_slope;
        q.lo_bias = z.lo_slope + z.lo_bias;
        q.hi_slope = z.hi_slope;
        q.hi_bias = z.hi_slope + z.hi_bias;
        q.lb = z.lb;
        q.ub = z.ub;
    } else {
        q = hat_crossing(a, b);
    }

    // shift back from q = x - m to x
    ScalarRelaxation r = q;
    r.lo_bias = q.lo_bias - q.lo_slope * m;
    r.hi_bias = q.hi_bias - q.hi_slope * m;
    return r;
}

}  // namespace seqcert
