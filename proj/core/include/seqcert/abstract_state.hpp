#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "seqcert/linexpr.hpp"
#include "seqcert/tensor.hpp"

namespace seqcert {

// Polyhedral bounds for one layer: per neuron a lower and an upper linear
// expression over earlier layers, plus a cached concrete interval obtained
// by backsubstitution. Layer 0 is the input box; its expressions are the
// identity and its intervals are the region itself.
struct LayerBounds {
    std::string id;
    std::size_t width = 0;
    std::vector<LinExpr> lo, hi;
    std::vector<double> lb, ub;
    // (offset, length) ranges whose true values sum to one exactly
    // (softmax outputs). Interval evaluations over such a range solve the
    // one-constraint LP instead of reading endpoints independently.
    std::vector<std::pair<std::size_t, std::size_t>> simplex;
};

enum class Dir { Lower, Upper };

struct AbstractState {
    std::vector<LayerBounds> layers;
    std::unordered_map<std::string, int> index;

    int add_layer(LayerBounds l);
    bool has(const std::string& id) const { return index.count(id) != 0; }
    int layer_index(const std::string& id) const;
    const LayerBounds& layer(const std::string& id) const;
    LayerBounds& layer(const std::string& id);
};

// State seeded with the input region: identity expressions, region intervals.
AbstractState init_abstract(const IntervalBox& region);

// Worst-case value of e over the input region after recursively substituting
// every non-input layer's expressions (lower expr for positive coefficients
// on a Lower query, upper expr otherwise, mirrored for Upper).
double backsubstitute(const AbstractState& st, const LinExpr& e, Dir dir);

// Batched form: bounds all expressions in one sweep down the state, sharing
// the per-layer substitution work. exprs[i] -> out[i].
void backsubstitute_batch(const AbstractState& st, const std::vector<LinExpr>& exprs,
                          Dir dir, std::vector<double>& out);

// Fills layer lb/ub from its own expressions (both directions batched).
void finalize_intervals(AbstractState& st, int layer_idx);

}  // namespace seqcert
