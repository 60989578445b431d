#pragma once

#include <string>
#include <vector>

#include "seqcert/network.hpp"

namespace seqcert {

// Collapse a frame-label path: merge adjacent repeats, then drop blanks.
std::vector<int> ctc_collapse(const std::vector<int>& path, int blank);

// Row-wise argmax of a [frames x classes] score matrix.
std::vector<int> frame_argmax(const std::vector<double>& scores, int frames, int classes);

// Decoded class sequence for the network's scores (output of forward()):
//   ctc    -> collapse of per-frame argmaxes
//   attn   -> per-step argmaxes up to and excluding [s]
//   vitstr -> per-frame argmaxes after the leading [GO], up to excluding [s]
std::vector<int> greedy_labels(const Network& net, const std::vector<double>& scores);

std::string labels_to_text(const ClassMeta& meta, const std::vector<int>& labels);

// Per-frame softmax confidences of the chosen labels.
std::vector<double> frame_confidences(const std::vector<double>& scores, int frames, int classes);

}  // namespace seqcert
