#pragma once

// Internal: sparse row representation of every exact-affine node kind. The
// abstract interpreter, the corner-bound oracle and the TPS grid lowering all
// read node coefficients from this one place.

#include <cstdint>
#include <string>
#include <vector>

#include "seqcert/network.hpp"

namespace seqcert {

struct RowTerm {
    std::int32_t slot;  // index into node.inputs
    std::int32_t idx;   // neuron within that input
    double c;
};

struct AffineRows {
    std::vector<std::vector<RowTerm>> rows;  // one per output neuron
    std::vector<double> bias;
};

bool is_exact_affine(NodeKind k);

// Throws KindError for non-affine kinds.
AffineRows exact_affine_rows(const Network& net, const Node& node);

// Dense LU solve with partial pivoting for the small TPS kernel system.
// a is n*n row-major and is overwritten; b holds the solution on return.
void solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n,
                 const std::string& ctx);

// Thin-plate radial basis U(r^2) = r^2 * log(r^2), U(0) = 0.
double tps_u(double r2);

}  // namespace seqcert
