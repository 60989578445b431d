#pragma once

#include <cstddef>
#include <vector>

namespace seqcert {

// Linearized log-sum-exp softmax bounds for one output index j given input
// intervals of its group. coeffs/bias describe a plane over the group's
// pre-softmax scores; [lb, ub] already intersects the ratio bounds with
// [0, 1] and the plane range over the box.
struct SoftmaxPlanes {
    std::vector<double> lo_coeffs;
    double lo_bias = 0.0;
    std::vector<double> hi_coeffs;
    double hi_bias = 0.0;
    double lb = 0.0, ub = 1.0;
};

// Tangent planes (taken at the box midpoint) of the convex lower and concave
// upper log-sum-exp surrogate of softmax output j. Inputs are shifted by a
// group constant before exponentials so nothing overflows.
SoftmaxPlanes lse_softmax_planes(const std::vector<double>& l, const std::vector<double>& u,
                                 std::size_t j);

// Interval of softmax output j implied purely by the group's input box
// (exact range endpoints, reached at box corners).
void softmax_output_range(const std::vector<double>& l, const std::vector<double>& u,
                          std::size_t j, double& plo, double& phi);

// Index with the widest interval (ties -> lowest index); the refinement
// layer rewrites that output as one minus the sum of the others.
std::size_t choose_refine_index(const std::vector<double>& l, const std::vector<double>& u);

}  // namespace seqcert
