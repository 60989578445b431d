#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqcert/tensor.hpp"

namespace seqcert {

enum class NodeKind {
    Input,
    Affine,
    Conv2d,
    BatchNorm,
    MaxPool,
    AvgPool,
    ReLU,
    Tanh,
    Sigmoid,
    Exp,
    Reciprocal,
    Rsqrt,
    Mul,
    Add,
    Normalization,
    LayerNorm,
    Softmax,
    PatchEmbed,
    PosEnc,
    BilinearSample,
    TpsGrid,
    LstmCell,
    AttentionBlock,
    Reshape,
    Slice,
    Concat,
};

const char* kind_name(NodeKind k);
NodeKind kind_from_name(const std::string& name);

// One graph node. Parameters live in generic bags keyed by name; each kind
// documents its keys in serialize.cpp. Weight tensors are resolved against
// the blob at load time.
struct Node {
    std::string id;
    NodeKind kind = NodeKind::Input;
    std::vector<std::string> inputs;

    std::map<std::string, std::int64_t> ints;
    std::map<std::string, double> floats;
    std::map<std::string, Tensor> tensors;
    std::map<std::string, std::vector<std::int64_t>> intlists;  // e.g. Reshape perm

    // Filled by shape inference during validation.
    std::vector<std::uint32_t> out_dims;

    std::size_t width() const { return Tensor::count(out_dims); }

    std::int64_t geti(const std::string& key) const;
    std::int64_t geti(const std::string& key, std::int64_t fallback) const;
    double getf(const std::string& key, double fallback) const;
    const Tensor& gett(const std::string& key) const;
    bool hast(const std::string& key) const { return tensors.count(key) != 0; }
    bool hasil(const std::string& key) const { return intlists.count(key) != 0; }
    const std::vector<std::int64_t>& getil(const std::string& key) const;
};

enum class DecoderKind { Ctc, Attention, VitStr };

const char* decoder_name(DecoderKind k);
DecoderKind decoder_from_name(const std::string& name);

// Recurrent attention decoder driven per step outside the static graph.
// Scores y_t = W0 s_t + b0; certification queries run on these scores.
struct AttnDecoderParams {
    int hidden = 0;     // LSTM state width
    int att_dim = 0;    // width of the tanh attention projection
    int feat = 0;       // encoder feature width per frame
    int classes = 0;
    int max_steps = 0;
    Tensor W;      // [att_dim x hidden]   applied to s_{t-1}
    Tensor V;      // [att_dim x feat]     applied to h_t
    Tensor b;      // [att_dim]
    Tensor a;      // [att_dim]            e = a . tanh(W s + V h + b)
    Tensor Wlstm;  // [4*hidden x (feat + classes + hidden)] gate order i,f,g,o
    Tensor blstm;  // [4*hidden]
    Tensor W0;     // [classes x hidden]
    Tensor b0;     // [classes]
};

// Class-index conventions for sequence decoding.
struct ClassMeta {
    int classes = 0;
    int blank = 0;  // CTC blank index
    int go = -1;    // [GO] index (attention / vit)
    int eos = -1;   // [s] index
    std::vector<std::string> alphabet;  // optional symbol per class index
};

struct Network {
    std::vector<Node> nodes;  // topologically ordered; node inputs precede it
    std::string output;       // id of the logits / feature-sequence node
    DecoderKind decoder = DecoderKind::Ctc;
    int frames = 0;           // rows of the output matrix
    ClassMeta meta;
    std::optional<AttnDecoderParams> attn;

    std::unordered_map<std::string, int> index;  // id -> position in nodes

    const Node& node(const std::string& id) const;
    Node& node(const std::string& id);
    const Node& input_node() const;
    const Node& output_node() const { return node(output); }
    bool has(const std::string& id) const { return index.count(id) != 0; }

    void rebuild_index();
};

// Checks structural invariants and runs shape inference: unique ids, single
// Input, inputs precede consumers, per-kind dimension rules, output widths
// consistent with the decoder kind. Throws ShapeError/KindError/ParseError.
void validate(Network& net);

// Symbol string for a class index ("?" when no alphabet is present).
std::string class_symbol(const ClassMeta& meta, int cls);

}  // namespace seqcert
