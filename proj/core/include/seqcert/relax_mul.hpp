#pragma once

namespace seqcert {

// Sound planes for a bivariate function h(x, y) on a box:
//   lo.a*x + lo.b*y + lo.c  <=  h  <=  hi.a*x + hi.b*y + hi.c
struct Plane {
    double a = 0.0, b = 0.0, c = 0.0;
    double eval(double x, double y) const { return a * x + b * y + c; }
};

struct PlanePair {
    Plane lo, hi;
    double lb = 0.0, ub = 0.0;
};

// McCormick-style planes for x*y:
//   lower: l_y*x + l_x*y - l_x*l_y     upper: u_y*x + l_x*y - l_x*u_y
// Interval = min/max of the four corner products. same_operand tightens the
// interval for x*x (never below zero when the interval straddles 0).
PlanePair mul_relax(double lx, double ux, double ly, double uy, bool same_operand = false);

}  // namespace seqcert
