#include "seqcert/linexpr.hpp"

namespace seqcert {

void LinExpr::add_scaled(const LinExpr& other, double s) {
    if (s == 0.0) return;
    bias += s * other.bias;
    terms.reserve(terms.size() + other.terms.size());
    for (const LinTerm& t : other.terms) terms.push_back({t.layer, t.idx, s * t.c});
}

}  // namespace seqcert
