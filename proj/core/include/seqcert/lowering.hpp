#pragma once

#include <vector>

#include "seqcert/network.hpp"

namespace seqcert {

// Rewrites a PatchEmbed node into an equivalent Conv2d (kernel = stride =
// patch size) followed by a Reshape carrying the channel-major -> token-major
// index permutation, plus an optional class-token prepend handled inside the
// Reshape's affine image. Forward outputs match the flatten+project semantics
// bit for bit because both paths accumulate in the same order.
std::vector<Node> lower_patch_embedding(const Node& node,
                                        const std::vector<std::uint32_t>& in_dims);

// Rewrites a PosEnc node into an identity Affine whose bias is the encoding
// table, so downstream passes only ever see exact-affine arithmetic.
Node lower_positional_encoding(const Node& node);

// Applies all lowering rewrites in place and revalidates.
void lower_network(Network& net);

}  // namespace seqcert
