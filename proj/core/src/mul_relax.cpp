#include "seqcert/relax_mul.hpp"

#include <algorithm>

#include "seqcert/errors.hpp"

namespace seqcert {

PlanePair mul_relax(double lx, double ux, double ly, double uy, bool same_operand) {
    if (!(lx <= ux) || !(ly <= uy))
        throw DomainError("mul_relax: interval endpoints out of order");
    PlanePair p;
    p.lo = {ly, lx, -lx * ly};
    p.hi = {uy, lx, -lx * uy};
    double c0 = lx * ly, c1 = lx * uy, c2 = ux * ly, c3 = ux * uy;
    p.lb = std::min(std::min(c0, c1), std::min(c2, c3));
    p.ub = std::max(std::max(c0, c1), std::max(c2, c3));
    if (same_operand && p.lb < 0.0 && lx < 0.0 && ux > 0.0) p.lb = 0.0;
    return p;
}

}  // namespace seqcert
