#pragma once

namespace seqcert {

// Sound linear relaxation of a scalar function on [l, u]:
//   lo_slope*x + lo_bias  <=  f(x)  <=  hi_slope*x + hi_bias   for x in [l,u]
// with the interval [lb, ub] enclosing f([l, u]).
struct ScalarRelaxation {
    double lo_slope = 0.0, lo_bias = 0.0;
    double hi_slope = 0.0, hi_bias = 0.0;
    double lb = 0.0, ub = 0.0;
};

// Three-case ReLU rule. Crossing case: upper chord u(x-l)/(u-l), lower
// lambda*x with lambda = 1 if u >= |l| else 0 (area minimizing); the
// interval floor is clamped to 0, which the true range never leaves.
ScalarRelaxation relu_relax(double l, double u);

// S-shaped curves share one scheme: lambda is the chord slope, lambda' the
// smaller endpoint derivative; the chord side switches with the sign of the
// interval so each line stays on the correct side of the inflection point.
ScalarRelaxation tanh_relax(double l, double u);
ScalarRelaxation sigmoid_relax(double l, double u);

// Convex exponential: tangent below at d = min(midpoint, l + 1 - 1e-2),
// chord above. Throws NumericalError when exp overflows to infinity.
ScalarRelaxation exp_relax(double l, double u);

// 1/y and 1/sqrt(y) on strictly positive intervals: tangent at the midpoint
// below, chord above. Throws DomainError when l <= 0.
ScalarRelaxation reciprocal_relax(double l, double u);
ScalarRelaxation rsqrt_relax(double l, double u);

// Hat function relu(1 - |p - m|) used by bilinear sampling, relaxed over
// p in [l, u]. Outer spans reduce to the ReLU rule on a shifted argument;
// spans covering the peak use chord-below / pivot-line-above with the free
// slope chosen to minimize the area under the line over [l, u].
ScalarRelaxation hat_relax(double l, double u, double m);

double sigmoid(double x);
double sigmoid_deriv(double x);
double tanh_deriv(double x);

}  // namespace seqcert
