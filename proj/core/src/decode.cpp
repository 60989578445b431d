#include "seqcert/decode.hpp"

#include <cmath>

#include "seqcert/errors.hpp"

namespace seqcert {

std::vector<int> ctc_collapse(const std::vector<int>& path, int blank) {
    std::vector<int> out;
    int prev = blank;
    for (int c : path) {
        if (c != prev && c != blank) out.push_back(c);
        prev = c;
    }
    return out;
}

std::vector<int> frame_argmax(const std::vector<double>& scores, int frames, int classes) {
    if (scores.size() != static_cast<std::size_t>(frames) * static_cast<std::size_t>(classes))
        throw SizeError("frame_argmax: score count != frames * classes");
    std::vector<int> out(static_cast<std::size_t>(frames));
    for (int t = 0; t < frames; ++t) {
        const double* row = scores.data() + static_cast<std::size_t>(t) * classes;
        int best = 0;
        for (int c = 1; c < classes; ++c)
            if (row[c] > row[best]) best = c;
        out[static_cast<std::size_t>(t)] = best;
    }
    return out;
}

std::vector<int> greedy_labels(const Network& net, const std::vector<double>& scores) {
    int classes = net.meta.classes;
    int frames = static_cast<int>(scores.size()) / classes;
    std::vector<int> arg = frame_argmax(scores, frames, classes);
    switch (net.decoder) {
        case DecoderKind::Ctc:
            return ctc_collapse(arg, net.meta.blank);
        case DecoderKind::Attention: {
            std::vector<int> out;
            for (int c : arg) {
                if (c == net.meta.eos) break;
                out.push_back(c);
            }
            return out;
        }
        case DecoderKind::VitStr: {
            std::vector<int> out;
            for (std::size_t t = 1; t < arg.size(); ++t) {
                if (arg[t] == net.meta.eos) break;
                out.push_back(arg[t]);
            }
            return out;
        }
    }
    return {};
}

std::string labels_to_text(const ClassMeta& meta, const std::vector<int>& labels) {
    std::string out;
    for (int c : labels) out += class_symbol(meta, c);
    return out;
}

std::vector<double> frame_confidences(const std::vector<double>& scores, int frames,
                                      int classes) {
    if (scores.size() != static_cast<std::size_t>(frames) * static_cast<std::size_t>(classes))
        throw SizeError("frame_confidences: score count != frames * classes");
    std::vector<double> out(static_cast<std::size_t>(frames));
    for (int t = 0; t < frames; ++t) {
        const double* row = scores.data() + static_cast<std::size_t>(t) * classes;
        double mx = row[0];
        for (int c = 1; c < classes; ++c) mx = std::max(mx, row[c]);
        double z = 0.0;
        for (int c = 0; c < classes; ++c) z += std::exp(row[c] - mx);
        out[static_cast<std::size_t>(t)] = 1.0 / z;  // exp(max - max) / z
    }
    return out;
}

}  // namespace seqcert
