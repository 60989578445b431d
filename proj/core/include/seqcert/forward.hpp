#pragma once

#include <map>
#include <string>
#include <vector>

#include "seqcert/network.hpp"

namespace seqcert {

// Options that change how composite nodes are decomposed. The concrete
// trace must mirror the abstract decomposition layer for layer, so the two
// sides share this struct.
enum class SoftmaxScheme { Lse, Compositional };

// Evaluates the graph on one image. For Attention-decoder networks the
// recurrent decoder is driven greedily after the encoder; the result is the
// per-step score matrix. Output is row-major [frames x classes] (or
// [frames x feat] when only the encoder is requested). Pure: repeated calls
// return identical bits.
std::vector<double> forward(const Network& net, const std::vector<double>& image);

// forward() on the graph only (no attention decoder steps).
std::vector<double> forward_graph(const Network& net, const std::vector<double>& image);

// Concrete values for every node and for every auxiliary layer that the
// abstract interpreter materializes (gate pre-activations, softmax
// sub-steps, attention internals, ...). Keys match the abstract state's
// layer ids exactly, which is what the sampling oracle compares against.
struct TraceOptions {
    SoftmaxScheme scheme = SoftmaxScheme::Lse;
    bool refine_softmax = true;
    // Greedy labels to feed the attention decoder (from the unperturbed
    // image); empty means "decode greedily from this very input".
    std::vector<int> forced_prev_labels;
};

struct AbstractState;  // abstract_state.hpp

// hints: when the trace accompanies an abstract state, box-derived constants
// (the overflow shift in the compositional softmax) are read back from that
// state so traced aux layers compute exactly the function the state bounded.
std::map<std::string, std::vector<double>> forward_trace(
    const Network& net, const std::vector<double>& image, const TraceOptions& opts,
    const AbstractState* hints = nullptr);

std::vector<double> to_doubles(const Tensor& t);
Tensor to_tensor(const std::vector<std::uint32_t>& dims, const std::vector<double>& v);

}  // namespace seqcert
