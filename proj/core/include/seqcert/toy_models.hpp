#pragma once

#include <cstdint>
#include <vector>

#include "seqcert/network.hpp"

namespace seqcert {
namespace toys {

// Desk-scale fixtures (well under 50k parameters each) exercising every
// layer family end to end. Weights are seeded and scaled so the clean
// decodes are non-degenerate.

// conv -> pool -> norm -> frames -> unrolled LSTM -> per-frame class scores.
Network ctc(std::uint64_t seed);

// Same encoder shape plus a recurrent attention decoder over the frame
// features.
Network attention(std::uint64_t seed);

// patch embedding -> class token -> positional encoding -> transformer
// block(s) -> per-frame class scores ([GO] on frame 0).
Network vitstr(std::uint64_t seed);

// input -> two hidden ReLU layers -> softmax(softmax_dim) -> scalar head.
// The ablation harness sweeps softmax_dim.
Network relu_softmax_probe(std::uint64_t seed, int in_dim, int hidden, int softmax_dim);

// Tiny single-node networks for per-kind soundness sweeps.
Network unary_probe(NodeKind kind, std::uint64_t seed, int width);

std::vector<double> random_image(std::uint64_t seed, std::size_t n,
                                 double lo = 0.05, double hi = 0.95);

}  // namespace toys
}  // namespace seqcert
