#include "seqcert/lowering.hpp"

#include "seqcert/errors.hpp"

namespace seqcert {

std::vector<Node> lower_patch_embedding(const Node& node,
                                        const std::vector<std::uint32_t>& in_dims) {
    if (node.kind != NodeKind::PatchEmbed)
        throw KindError("lower_patch_embedding: node is not a PatchEmbed");
    if (in_dims.size() != 3) throw ShapeError("lower_patch_embedding: input must be [C,H,W]");
    std::size_t C = in_dims[0], H = in_dims[1], W = in_dims[2];
    std::size_t P = static_cast<std::size_t>(node.geti("patch"));
    const Tensor& w = node.gett("weight");  // [P*P*C, D]
    std::size_t D = w.dims[1];
    std::size_t TY = H / P, TX = W / P;

    Node conv;
    conv.id = node.id + "~conv";
    conv.kind = NodeKind::Conv2d;
    conv.inputs = node.inputs;
    conv.ints["sh"] = static_cast<std::int64_t>(P);
    conv.ints["sw"] = static_cast<std::int64_t>(P);

    // Repack [P*P*C, D] (flat index (c,py,px)) into [D,C,P,P]. Plain float
    // copies, so both row builders emit identical coefficient sequences and
    // the two paths sum in the same order.
    Tensor cw;
    cw.dims = {static_cast<std::uint32_t>(D), static_cast<std::uint32_t>(C),
               static_cast<std::uint32_t>(P), static_cast<std::uint32_t>(P)};
    cw.data.resize(Tensor::count(cw.dims));
    for (std::size_t d = 0; d < D; ++d)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t py = 0; py < P; ++py)
                for (std::size_t px = 0; px < P; ++px)
                    cw.data[((d * C + c) * P + py) * P + px] =
                        w.data[((c * P + py) * P + px) * D + d];
    conv.tensors["weight"] = std::move(cw);
    if (node.hast("bias")) conv.tensors["bias"] = node.gett("bias");

    Node resh;
    resh.id = node.id;
    resh.kind = NodeKind::Reshape;
    resh.inputs = {conv.id};
    std::vector<std::int64_t> perm(TY * TX * D);
    for (std::size_t ty = 0; ty < TY; ++ty)
        for (std::size_t tx = 0; tx < TX; ++tx)
            for (std::size_t d = 0; d < D; ++d)
                perm[(ty * TX + tx) * D + d] =
                    static_cast<std::int64_t>((d * TY + ty) * TX + tx);
    resh.intlists["perm"] = std::move(perm);
    resh.intlists["dims"] = {static_cast<std::int64_t>(TY * TX), static_cast<std::int64_t>(D)};

    return {std::move(conv), std::move(resh)};
}

Node lower_positional_encoding(const Node& node) {
    if (node.kind != NodeKind::PosEnc)
        throw KindError("lower_positional_encoding: node is not a PosEnc");
    const Tensor& table = node.gett("table");
    std::size_t w = table.data.size();

    Node aff;
    aff.id = node.id;
    aff.kind = NodeKind::Affine;
    aff.inputs = node.inputs;
    Tensor eye;
    eye.dims = {static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(w)};
    eye.data.assign(w * w, 0.0f);
    for (std::size_t i = 0; i < w; ++i) eye.data[i * w + i] = 1.0f;
    aff.tensors["weight"] = std::move(eye);
    Tensor bias = table;
    bias.dims = {static_cast<std::uint32_t>(w)};
    aff.tensors["bias"] = std::move(bias);
    return aff;
}

void lower_network(Network& net) {
    std::vector<Node> lowered;
    lowered.reserve(net.nodes.size() + 4);
    bool changed = false;
    for (Node& n : net.nodes) {
        if (n.kind == NodeKind::PatchEmbed) {
            const auto& in_dims = net.node(n.inputs.at(0)).out_dims;
            for (Node& r : lower_patch_embedding(n, in_dims)) lowered.push_back(std::move(r));
            changed = true;
        } else if (n.kind == NodeKind::PosEnc) {
            lowered.push_back(lower_positional_encoding(n));
            changed = true;
        } else {
            lowered.push_back(std::move(n));
        }
    }
    net.nodes = std::move(lowered);
    if (changed) validate(net);
}

}  // namespace seqcert
