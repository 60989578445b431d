#pragma once

#include <cstdint>
#include <vector>

namespace seqcert {

// One summand of a linear expression: coefficient c on neuron idx of an
// abstract-state layer. Expressions may mix terms from several layers
// (residual adds, two-operand products); substitution handles that by
// always eliminating the topologically latest layer first.
struct LinTerm {
    std::int32_t layer = 0;
    std::int32_t idx = 0;
    double c = 0.0;
};

struct LinExpr {
    std::vector<LinTerm> terms;
    double bias = 0.0;

    LinExpr() = default;
    explicit LinExpr(double constant) : bias(constant) {}

    void add(std::int32_t layer, std::int32_t idx, double c) {
        if (c != 0.0) terms.push_back({layer, idx, c});
    }
    static LinExpr single(std::int32_t layer, std::int32_t idx, double c, double bias = 0.0) {
        LinExpr e;
        e.bias = bias;
        e.add(layer, idx, c);
        return e;
    }
    // this += s * other
    void add_scaled(const LinExpr& other, double s);
};

}  // namespace seqcert
