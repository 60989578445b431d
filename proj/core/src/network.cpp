#include "seqcert/network.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include "seqcert/errors.hpp"

namespace seqcert {

namespace {

struct KindEntry {
    NodeKind kind;
    const char* name;
};

constexpr std::array<KindEntry, 26> kKinds = {{
    {NodeKind::Input, "Input"},
    {NodeKind::Affine, "Affine"},
    {NodeKind::Conv2d, "Conv2d"},
    {NodeKind::BatchNorm, "BatchNorm"},
    {NodeKind::MaxPool, "MaxPool"},
    {NodeKind::AvgPool, "AvgPool"},
    {NodeKind::ReLU, "ReLU"},
    {NodeKind::Tanh, "Tanh"},
    {NodeKind::Sigmoid, "Sigmoid"},
    {NodeKind::Exp, "Exp"},
    {NodeKind::Reciprocal, "Reciprocal"},
    {NodeKind::Rsqrt, "Rsqrt"},
    {NodeKind::Mul, "Mul"},
    {NodeKind::Add, "Add"},
    {NodeKind::Normalization, "Normalization"},
    {NodeKind::LayerNorm, "LayerNorm"},
    {NodeKind::Softmax, "Softmax"},
    {NodeKind::PatchEmbed, "PatchEmbed"},
    {NodeKind::PosEnc, "PosEnc"},
    {NodeKind::BilinearSample, "BilinearSample"},
    {NodeKind::TpsGrid, "TpsGrid"},
    {NodeKind::LstmCell, "LstmCell"},
    {NodeKind::AttentionBlock, "AttentionBlock"},
    {NodeKind::Reshape, "Reshape"},
    {NodeKind::Slice, "Slice"},
    {NodeKind::Concat, "Concat"},
}};

[[noreturn]] void fail_shape(const Node& n, const std::string& what) {
    throw ShapeError("validate: node '" + n.id + "' (" + kind_name(n.kind) + "): " + what);
}

std::uint32_t conv_out_extent(const Node& n, std::int64_t in, std::int64_t k, std::int64_t s,
                              std::int64_t p) {
    std::int64_t span = in + 2 * p - k;
    if (s <= 0 || k <= 0 || span < 0 || span % s != 0)
        fail_shape(n, "kernel/stride/padding do not tile the input extent");
    return static_cast<std::uint32_t>(span / s + 1);
}

const Tensor& need_tensor(const Node& n, const std::string& key,
                          const std::vector<std::uint32_t>& dims) {
    const Tensor& t = n.gett(key);
    if (t.dims != dims) fail_shape(n, "tensor '" + key + "' has unexpected dims");
    return t;
}

}  // namespace

const char* kind_name(NodeKind k) {
    for (const auto& e : kKinds)
        if (e.kind == k) return e.name;
    return "?";
}

NodeKind kind_from_name(const std::string& name) {
    for (const auto& e : kKinds)
        if (name == e.name) return e.kind;
    throw ParseError("kind_from_name: unknown node kind '" + name + "'");
}

const char* decoder_name(DecoderKind k) {
    switch (k) {
        case DecoderKind::Ctc: return "ctc";
        case DecoderKind::Attention: return "attn";
        case DecoderKind::VitStr: return "vitstr";
    }
    return "?";
}

DecoderKind decoder_from_name(const std::string& name) {
    if (name == "ctc") return DecoderKind::Ctc;
    if (name == "attn") return DecoderKind::Attention;
    if (name == "vitstr") return DecoderKind::VitStr;
    throw ParseError("decoder_from_name: unknown decoder '" + name + "'");
}

std::int64_t Node::geti(const std::string& key) const {
    auto it = ints.find(key);
    if (it == ints.end())
        throw ParseError("node '" + id + "': missing int param '" + key + "'");
    return it->second;
}

std::int64_t Node::geti(const std::string& key, std::int64_t fallback) const {
    auto it = ints.find(key);
    return it == ints.end() ? fallback : it->second;
}

double Node::getf(const std::string& key, double fallback) const {
    auto it = floats.find(key);
    return it == floats.end() ? fallback : it->second;
}

const Tensor& Node::gett(const std::string& key) const {
    auto it = tensors.find(key);
    if (it == tensors.end())
        throw ParseError("node '" + id + "': missing tensor param '" + key + "'");
    return it->second;
}

const std::vector<std::int64_t>& Node::getil(const std::string& key) const {
    auto it = intlists.find(key);
    if (it == intlists.end())
        throw ParseError("node '" + id + "': missing int list param '" + key + "'");
    return it->second;
}

const Node& Network::node(const std::string& id) const {
    auto it = index.find(id);
    if (it == index.end()) throw ParseError("network: no node with id '" + id + "'");
    return nodes[static_cast<std::size_t>(it->second)];
}

Node& Network::node(const std::string& id) {
    auto it = index.find(id);
    if (it == index.end()) throw ParseError("network: no node with id '" + id + "'");
    return nodes[static_cast<std::size_t>(it->second)];
}

const Node& Network::input_node() const {
    for (const auto& n : nodes)
        if (n.kind == NodeKind::Input) return n;
    throw ParseError("network: no Input node");
}

void Network::rebuild_index() {
    index.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (index.count(nodes[i].id))
            throw ParseError("network: duplicate node id '" + nodes[i].id + "'");
        index[nodes[i].id] = static_cast<int>(i);
    }
}

std::string class_symbol(const ClassMeta& meta, int cls) {
    if (cls >= 0 && static_cast<std::size_t>(cls) < meta.alphabet.size())
        return meta.alphabet[static_cast<std::size_t>(cls)];
    return "?";
}

void validate(Network& net) {
    if (net.nodes.empty()) throw ParseError("validate: empty network");
    net.rebuild_index();

    int input_count = 0;
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        Node& n = net.nodes[i];
        for (const auto& in : n.inputs) {
            auto it = net.index.find(in);
            if (it == net.index.end())
                throw ParseError("validate: node '" + n.id + "' consumes unknown id '" + in + "'");
            if (it->second >= static_cast<int>(i))
                throw ParseError("validate: node '" + n.id + "' consumes '" + in +
                                 "' which does not precede it");
        }
        if (n.kind == NodeKind::Input) {
            ++input_count;
            if (!n.inputs.empty()) fail_shape(n, "Input node cannot have inputs");
            if (n.out_dims.empty()) fail_shape(n, "Input node needs dims");
            continue;
        }
        if (n.inputs.empty()) fail_shape(n, "non-Input node needs at least one input");

        auto in_dims = [&](std::size_t slot) -> const std::vector<std::uint32_t>& {
            return net.node(n.inputs.at(slot)).out_dims;
        };
        auto in_width = [&](std::size_t slot) {
            return Tensor::count(in_dims(slot));
        };

        switch (n.kind) {
            case NodeKind::Input:
                break;
            case NodeKind::Affine: {
                const Tensor& w = n.gett("weight");
                if (w.dims.size() != 2) fail_shape(n, "weight must be rank 2");
                std::uint32_t out = w.dims[0], in = w.dims[1];
                if (in_width(0) != in) fail_shape(n, "input width != weight columns");
                if (n.hast("bias")) need_tensor(n, "bias", {out});
                n.out_dims = {out};
                break;
            }
            case NodeKind::Conv2d: {
                const auto& d = in_dims(0);
                if (d.size() != 3) fail_shape(n, "input must be [C,H,W]");
                const Tensor& w = n.gett("weight");
                if (w.dims.size() != 4 || w.dims[1] != d[0])
                    fail_shape(n, "weight must be [OC,C,KH,KW] matching input channels");
                std::int64_t sh = n.geti("sh", 1), sw = n.geti("sw", 1);
                std::int64_t ph = n.geti("ph", 0), pw = n.geti("pw", 0);
                std::uint32_t oh = conv_out_extent(n, d[1], w.dims[2], sh, ph);
                std::uint32_t ow = conv_out_extent(n, d[2], w.dims[3], sw, pw);
                if (n.hast("bias")) need_tensor(n, "bias", {w.dims[0]});
                n.out_dims = {w.dims[0], oh, ow};
                break;
            }
            case NodeKind::BatchNorm: {
                const auto& d = in_dims(0);
                if (d.empty()) fail_shape(n, "input needs dims");
                std::uint32_t c = d[0];
                need_tensor(n, "gamma", {c});
                need_tensor(n, "beta", {c});
                need_tensor(n, "mean", {c});
                need_tensor(n, "var", {c});
                n.out_dims = d;
                break;
            }
            case NodeKind::MaxPool:
            case NodeKind::AvgPool: {
                const auto& d = in_dims(0);
                if (d.size() != 3) fail_shape(n, "input must be [C,H,W]");
                std::int64_t kh = n.geti("kh"), kw = n.geti("kw");
                std::int64_t sh = n.geti("sh", kh), sw = n.geti("sw", kw);
                std::uint32_t oh = conv_out_extent(n, d[1], kh, sh, 0);
                std::uint32_t ow = conv_out_extent(n, d[2], kw, sw, 0);
                n.out_dims = {d[0], oh, ow};
                break;
            }
            case NodeKind::ReLU:
            case NodeKind::Tanh:
            case NodeKind::Sigmoid:
            case NodeKind::Exp:
            case NodeKind::Reciprocal:
            case NodeKind::Rsqrt:
                n.out_dims = in_dims(0);
                break;
            case NodeKind::Mul: {
                if (n.inputs.size() != 2) fail_shape(n, "Mul needs exactly two inputs");
                if (in_width(0) != in_width(1)) fail_shape(n, "operand widths differ");
                n.out_dims = in_dims(0);
                break;
            }
            case NodeKind::Add: {
                if (n.inputs.size() < 2) fail_shape(n, "Add needs at least two inputs");
                for (std::size_t s = 1; s < n.inputs.size(); ++s)
                    if (in_width(s) != in_width(0)) fail_shape(n, "operand widths differ");
                n.out_dims = in_dims(0);
                break;
            }
            case NodeKind::Normalization: {
                std::size_t w = in_width(0);
                std::int64_t g = n.geti("group", static_cast<std::int64_t>(w));
                if (g <= 0 || w % static_cast<std::size_t>(g) != 0)
                    fail_shape(n, "group must divide the width");
                n.out_dims = in_dims(0);
                break;
            }
            case NodeKind::LayerNorm: {
                std::size_t w = in_width(0);
                std::int64_t d = n.geti("dim");
                if (d <= 0 || w % static_cast<std::size_t>(d) != 0)
                    fail_shape(n, "dim must divide the width");
                need_tensor(n, "gamma", {static_cast<std::uint32_t>(d)});
                need_tensor(n, "beta", {static_cast<std::uint32_t>(d)});
                n.out_dims = in_dims(0);
                break;
            }
            case NodeKind::Softmax: {
                std::size_t w = in_width(0);
                std::int64_t g = n.geti("group", static_cast<std::int64_t>(w));
                if (g < 2 || w % static_cast<std::size_t>(g) != 0)
                    fail_shape(n, "group must be >= 2 and divide the width");
                n.out_dims = in_dims(0);
                break;
            }
            case NodeKind::PatchEmbed: {
                const auto& d = in_dims(0);
                if (d.size() != 3) fail_shape(n, "input must be [C,H,W]");
                std::int64_t p = n.geti("patch");
                if (p <= 0 || d[1] % p != 0 || d[2] % p != 0)
                    fail_shape(n, "patch must tile H and W");
                std::uint32_t tokens = static_cast<std::uint32_t>((d[1] / p) * (d[2] / p));
                const Tensor& w = n.gett("weight");
                std::uint32_t flat = static_cast<std::uint32_t>(p * p) * d[0];
                if (w.dims.size() != 2 || w.dims[0] != flat)
                    fail_shape(n, "weight must be [patch*patch*C, D]");
                if (n.hast("bias")) need_tensor(n, "bias", {w.dims[1]});
                n.out_dims = {tokens, w.dims[1]};
                break;
            }
            case NodeKind::PosEnc: {
                const Tensor& t = n.gett("table");
                if (Tensor::count(t.dims) != in_width(0))
                    fail_shape(n, "table width != input width");
                n.out_dims = in_dims(0);
                break;
            }
            case NodeKind::TpsGrid: {
                const Tensor& ctrl = n.gett("ctrl");
                if (ctrl.dims.size() != 2 || ctrl.dims[1] != 2 || ctrl.dims[0] < 3)
                    fail_shape(n, "ctrl must be [K,2] with K >= 3");
                std::size_t k = ctrl.dims[0];
                if (in_width(0) != 2 * k) fail_shape(n, "theta width must be 2K");
                std::int64_t oh = n.geti("out_h"), ow = n.geti("out_w");
                if (oh <= 0 || ow <= 0) fail_shape(n, "out_h/out_w must be positive");
                n.out_dims = {2, static_cast<std::uint32_t>(oh), static_cast<std::uint32_t>(ow)};
                break;
            }
            case NodeKind::BilinearSample: {
                if (n.inputs.size() != 2) fail_shape(n, "needs [grid, image] inputs");
                const auto& g = in_dims(0);
                const auto& im = in_dims(1);
                if (im.size() != 3) fail_shape(n, "image must be [C,H,W]");
                if (g.empty() || g[0] != 2) fail_shape(n, "grid must be [2,...]");
                std::size_t npts = Tensor::count(g) / 2;
                std::vector<std::uint32_t> od(g.begin() + 1, g.end());
                od.insert(od.begin(), im[0]);
                if (Tensor::count(od) != im[0] * npts) fail_shape(n, "grid layout mismatch");
                n.out_dims = od;
                break;
            }
            case NodeKind::LstmCell: {
                std::int64_t h = n.geti("hidden");
                if (h <= 0) fail_shape(n, "hidden must be positive");
                std::size_t x = in_width(0);
                if (n.inputs.size() > 2) fail_shape(n, "at most [x, prev] inputs");
                if (n.inputs.size() == 2 && in_width(1) != 2 * static_cast<std::size_t>(h))
                    fail_shape(n, "prev state width must be 2*hidden");
                need_tensor(n, "weight",
                            {static_cast<std::uint32_t>(4 * h),
                             static_cast<std::uint32_t>(x + static_cast<std::size_t>(h))});
                need_tensor(n, "bias", {static_cast<std::uint32_t>(4 * h)});
                n.out_dims = {static_cast<std::uint32_t>(2 * h)};
                break;
            }
            case NodeKind::AttentionBlock: {
                const auto& d = in_dims(0);
                if (d.size() != 2) fail_shape(n, "input must be [T,D]");
                std::uint32_t dim = d[1];
                std::int64_t heads = n.geti("heads", 1);
                if (heads <= 0 || dim % heads != 0) fail_shape(n, "heads must divide D");
                for (const char* key : {"wq", "wk", "wv", "wo"})
                    need_tensor(n, key, {dim, dim});
                for (const char* key : {"bq", "bk", "bv", "bo", "ln1_g", "ln1_b", "ln2_g", "ln2_b"})
                    need_tensor(n, key, {dim});
                const Tensor& m0 = n.gett("mlp0_w");
                if (m0.dims.size() != 2 || m0.dims[1] != dim) fail_shape(n, "mlp0_w must be [Dh,D]");
                need_tensor(n, "mlp0_b", {m0.dims[0]});
                need_tensor(n, "mlp1_w", {dim, m0.dims[0]});
                need_tensor(n, "mlp1_b", {dim});
                n.out_dims = d;
                break;
            }
            case NodeKind::Reshape: {
                std::size_t w = in_width(0);
                if (n.hasil("perm")) {
                    const auto& p = n.getil("perm");
                    if (p.size() != w) fail_shape(n, "perm size != width");
                    std::vector<bool> seen(w, false);
                    for (auto v : p) {
                        if (v < 0 || static_cast<std::size_t>(v) >= w || seen[static_cast<std::size_t>(v)])
                            fail_shape(n, "perm is not a permutation");
                        seen[static_cast<std::size_t>(v)] = true;
                    }
                }
                if (n.hasil("dims")) {
                    const auto& dl = n.getil("dims");
                    std::vector<std::uint32_t> od(dl.begin(), dl.end());
                    if (Tensor::count(od) != w) fail_shape(n, "dims product != width");
                    n.out_dims = od;
                } else {
                    n.out_dims = {static_cast<std::uint32_t>(w)};
                }
                break;
            }
            case NodeKind::Slice: {
                std::int64_t off = n.geti("offset"), len = n.geti("length");
                if (off < 0 || len <= 0 ||
                    static_cast<std::size_t>(off + len) > in_width(0))
                    fail_shape(n, "slice window out of range");
                if (n.hasil("dims")) {
                    const auto& dl = n.getil("dims");
                    std::vector<std::uint32_t> od(dl.begin(), dl.end());
                    if (Tensor::count(od) != static_cast<std::size_t>(len))
                        fail_shape(n, "dims product != length");
                    n.out_dims = od;
                } else {
                    n.out_dims = {static_cast<std::uint32_t>(len)};
                }
                break;
            }
            case NodeKind::Concat: {
                if (n.inputs.size() < 2) fail_shape(n, "Concat needs at least two inputs");
                std::size_t w = 0;
                for (std::size_t s = 0; s < n.inputs.size(); ++s) w += in_width(s);
                n.out_dims = {static_cast<std::uint32_t>(w)};
                break;
            }
        }
    }

    if (input_count != 1) throw ParseError("validate: network must have exactly one Input node");
    if (!net.has(net.output)) throw ParseError("validate: output id '" + net.output + "' not found");

    if (net.meta.classes < 2) throw ParseError("validate: need at least two classes");
    if (net.frames < 1) throw ParseError("validate: frames must be >= 1");
    std::size_t out_w = net.output_node().width();
    switch (net.decoder) {
        case DecoderKind::Ctc:
            if (net.meta.blank < 0 || net.meta.blank >= net.meta.classes)
                throw ParseError("validate: blank index out of range");
            [[fallthrough]];
        case DecoderKind::VitStr:
            if (out_w != static_cast<std::size_t>(net.frames) *
                             static_cast<std::size_t>(net.meta.classes))
                throw ShapeError("validate: output width must be frames*classes");
            break;
        case DecoderKind::Attention: {
            if (!net.attn) throw ParseError("validate: attn decoder params missing");
            const auto& a = *net.attn;
            if (a.hidden <= 0 || a.att_dim <= 0 || a.feat <= 0 || a.max_steps <= 0)
                throw ParseError("validate: attn decoder sizes must be positive");
            if (a.classes != net.meta.classes)
                throw ParseError("validate: attn decoder classes != meta classes");
            if (out_w != static_cast<std::size_t>(net.frames) * static_cast<std::size_t>(a.feat))
                throw ShapeError("validate: encoder output width must be frames*feat");
            break;
        }
    }
    if (net.decoder != DecoderKind::Ctc) {
        if (net.meta.go < 0 || net.meta.go >= net.meta.classes ||
            net.meta.eos < 0 || net.meta.eos >= net.meta.classes)
            throw ParseError("validate: go/eos indices out of range");
    }
}

}  // namespace seqcert
