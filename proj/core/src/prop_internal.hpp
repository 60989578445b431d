#pragma once

// Shared layer builders behind propagate(); each appends one abstract layer
// and returns its index. Composite node transformers and the step-driven
// decoders are built from these.

#include <cstdint>
#include <string>
#include <vector>

#include "rows.hpp"
#include "seqcert/abstract_state.hpp"
#include "seqcert/network.hpp"
#include "seqcert/plane_fit.hpp"
#include "seqcert/propagate.hpp"
#include "seqcert/relax_scalar.hpp"

namespace seqcert::prop {

struct Ctx {
    const Network& net;
    AbstractState& st;
    const PropagateOptions& opts;

    void check_deadline() const;                // throws TimeoutError past the deadline
    int layer_of(const std::string& id) const;  // node id -> state layer index
};

// One neuron of an existing abstract layer.
struct Ref {
    int layer = -1;
    std::int32_t idx = 0;
};

struct MulPair {
    Ref a, b;
    bool same = false;  // true when both refs name the same neuron (x*x)
};

int add_affine_layer(Ctx& cx, const std::string& id, const AffineRows& rows,
                     const std::vector<int>& slot_layers);
int add_const_layer(Ctx& cx, const std::string& id, const std::vector<double>& values);

using ScalarFn = ScalarRelaxation (*)(double, double);
int add_scalar_layer(Ctx& cx, const std::string& id, int src, ScalarFn fn);

int add_mul_layer(Ctx& cx, const std::string& id, const std::vector<MulPair>& pairs);
int add_surface_layer(Ctx& cx, const std::string& id, SurfaceKind kind,
                      const std::vector<MulPair>& pairs);

// Softmax over contiguous groups of the source layer, honoring the scheme
// and refinement flags in cx.opts; the returned layer's id is exactly `id`.
int add_softmax_chain(Ctx& cx, const std::string& id, int src, std::size_t group);

int add_layernorm_chain(Ctx& cx, const std::string& id, int src, std::size_t group, double eps,
                        const float* gamma, const float* beta);

// LSTM cell wiring: gate rows read x from weight columns [0, x_cnt) and the
// hidden state from the trailing `hidden` columns; any middle columns are
// assumed folded into `bias` by the caller. Negative layer = zero operand.
struct LstmWires {
    int x_layer = -1;
    std::size_t x_off = 0, x_cnt = 0;
    int h_layer = -1;
    std::size_t h_off = 0;
    int c_layer = -1;
    std::size_t c_off = 0;
};

struct LstmLayers {
    int h = -1, c = -1;
};

LstmLayers add_lstm_cell(Ctx& cx, const std::string& prefix, const LstmWires& w,
                         const float* weight, std::size_t cols, const std::vector<double>& bias,
                         std::size_t hidden);

void add_lstm_node(Ctx& cx, const Node& n);
void add_attention_block(Ctx& cx, const Node& n, int src);
void add_bilinear_sample(Ctx& cx, const Node& n, int grid, int image);

}  // namespace seqcert::prop
