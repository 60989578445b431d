#include "seqcert/certify.hpp"

#include <algorithm>

#include "prop_internal.hpp"
#include "seqcert/decode.hpp"
#include "seqcert/errors.hpp"

namespace seqcert {

const char* status_name(Status s) {
    switch (s) {
        case Status::Certified: return "certified";
        case Status::Unknown: return "unknown";
        case Status::Falsified: return "falsified";
    }
    return "unknown";
}

PathEnumeration enumerate_ctc_paths(const std::vector<std::set<int>>& cands,
                                    const std::vector<int>& target, int blank,
                                    std::uint64_t guard) {
    PathEnumeration out;
    std::size_t T = cands.size();
    std::vector<std::vector<int>> opts(T);
    for (std::size_t t = 0; t < T; ++t) {
        if (cands[t].empty()) throw SizeError("enumerate_ctc_paths: empty candidate set");
        opts[t].assign(cands[t].begin(), cands[t].end());
    }

    std::vector<std::size_t> pick(T, 0);
    std::vector<int> path(T);
    for (;;) {
        if (++out.paths_checked > guard)
            throw SizeError("enumerate_ctc_paths: path budget exceeded");
        for (std::size_t t = 0; t < T; ++t) path[t] = opts[t][pick[t]];
        if (ctc_collapse(path, blank) != target) {
            out.all_match = false;
            out.witness = path;
            return out;
        }
        // odometer increment over the candidate product
        std::size_t t = T;
        while (t > 0) {
            --t;
            if (++pick[t] < opts[t].size()) break;
            pick[t] = 0;
            if (t == 0) return out;
        }
        if (T == 0) return out;
    }
}

namespace {

// Number of frame-label paths, saturating at cap.
std::uint64_t path_count(const std::vector<std::set<int>>& cands, std::uint64_t cap) {
    std::uint64_t n = 1;
    for (const auto& s : cands) {
        n *= static_cast<std::uint64_t>(s.size());
        if (n > cap) return cap + 1;
    }
    return n;
}

Verdict run_ctc(const Network& net, const CertifyRequest& req) {
    Verdict v;
    std::vector<double> scores = forward(net, req.image);
    int classes = net.meta.classes;
    int frames = net.frames;
    std::vector<int> arg = frame_argmax(scores, frames, classes);
    v.greedy = ctc_collapse(arg, net.meta.blank);

    IntervalBox region = input_region(req.image, req.eps, req.clip_lo, req.clip_hi);
    AbstractState st = propagate(net, region, req.prop);

    std::vector<std::set<int>> cands(static_cast<std::size_t>(frames));
    for (int t = 0; t < frames; ++t) {
        cands[static_cast<std::size_t>(t)] =
            certify_frame(st, net.output, classes, t, arg[static_cast<std::size_t>(t)]);
        v.candks.push_back(static_cast<int>(cands[static_cast<std::size_t>(t)].size()));
    }
    for (int t = 0; t < frames; ++t)
        if (v.candks[static_cast<std::size_t>(t)] > 3) {
            v.status = Status::Unknown;
            v.note = "frame " + std::to_string(t) + " has " +
                     std::to_string(v.candks[static_cast<std::size_t>(t)]) + " candidates";
            return v;
        }

    std::uint64_t guard = 10'000'000ULL;
    if (path_count(cands, guard) > guard) {
        v.status = Status::Unknown;
        v.note = "candidate path space exceeds the enumeration budget";
        return v;
    }
    PathEnumeration pe = enumerate_ctc_paths(cands, v.greedy, net.meta.blank, guard);
    if (pe.all_match) {
        v.status = Status::Certified;
    } else {
        v.status = Status::Unknown;
        v.note = "a candidate path collapses to a different sequence";
    }
    return v;
}

Verdict run_vitstr(const Network& net, const CertifyRequest& req) {
    Verdict v;
    std::vector<double> scores = forward(net, req.image);
    int classes = net.meta.classes;
    int frames = net.frames;
    std::vector<int> arg = frame_argmax(scores, frames, classes);
    v.greedy = greedy_labels(net, scores);

    int stop = -1;  // index of the first end-symbol frame after [GO]
    for (int t = 1; t < frames; ++t)
        if (arg[static_cast<std::size_t>(t)] == net.meta.eos) {
            stop = t;
            break;
        }
    if (stop < 0) {
        v.status = Status::Unknown;
        v.note = "greedy decoding never reaches the end symbol";
        return v;
    }

    IntervalBox region = input_region(req.image, req.eps, req.clip_lo, req.clip_hi);
    AbstractState st = propagate(net, region, req.prop);

    for (int t = 1; t <= stop; ++t) {
        std::set<int> m =
            certify_frame(st, net.output, classes, t, arg[static_cast<std::size_t>(t)]);
        v.candks.push_back(static_cast<int>(m.size()));
        if (m.size() > 1) {
            v.status = Status::Unknown;
            v.note = "frame " + std::to_string(t) + " is not pinned";
            return v;
        }
    }
    v.status = Status::Certified;
    return v;
}

}  // namespace

AbstractState propagate_attention_steps(const Network& net, const IntervalBox& region,
                                        const PropagateOptions& opts,
                                        const std::vector<int>& step_labels) {
    if (!net.attn) throw KindError("propagate_attention_steps: network has no attention decoder");
    const AttnDecoderParams& a = *net.attn;
    AbstractState st = propagate(net, region, opts);
    prop::Ctx cx{net, st, opts};

    std::size_t T = static_cast<std::size_t>(net.frames);
    std::size_t F = static_cast<std::size_t>(a.feat);
    std::size_t A = static_cast<std::size_t>(a.att_dim);
    std::size_t H = static_cast<std::size_t>(a.hidden);
    std::size_t C = static_cast<std::size_t>(a.classes);
    std::size_t cols = F + C + H;
    int feats = cx.layer_of(net.output);
    int prev_h = -1, prev_c = -1;

    for (std::size_t step = 0; step < step_labels.size(); ++step) {
        cx.check_deadline();
        std::string id = "dec" + std::to_string(step);

        AffineRows pre;
        pre.rows.resize(T * A);
        pre.bias.assign(T * A, 0.0);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t ai = 0; ai < A; ++ai) {
                std::size_t o = t * A + ai;
                pre.bias[o] = static_cast<double>(a.b.data[ai]);
                for (std::size_t f = 0; f < F; ++f) {
                    double c = static_cast<double>(a.V.data[ai * F + f]);
                    if (c != 0.0)
                        pre.rows[o].push_back({0, static_cast<std::int32_t>(t * F + f), c});
                }
                if (prev_h >= 0)
                    for (std::size_t h = 0; h < H; ++h) {
                        double c = static_cast<double>(a.W.data[ai * H + h]);
                        if (c != 0.0)
                            pre.rows[o].push_back({1, static_cast<std::int32_t>(h), c});
                    }
            }
        std::vector<int> pre_slots{feats};
        if (prev_h >= 0) pre_slots.push_back(prev_h);
        int lpre = prop::add_affine_layer(cx, id + "#pre", pre, pre_slots);

        int lth = prop::add_scalar_layer(cx, id + "#th", lpre, &tanh_relax);

        AffineRows er;
        er.rows.resize(T);
        er.bias.assign(T, 0.0);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t ai = 0; ai < A; ++ai) {
                double c = static_cast<double>(a.a.data[ai]);
                if (c != 0.0)
                    er.rows[t].push_back({0, static_cast<std::int32_t>(t * A + ai), c});
            }
        int le = prop::add_affine_layer(cx, id + "#e", er, {lth});

        int lal = prop::add_softmax_chain(cx, id + "#al", le, T);

        std::vector<prop::MulPair> ghp(T * F);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t f = 0; f < F; ++f) {
                prop::MulPair& mp = ghp[t * F + f];
                mp.a = {lal, static_cast<std::int32_t>(t)};
                mp.b = {feats, static_cast<std::int32_t>(t * F + f)};
            }
        int lgh = prop::add_mul_layer(cx, id + "#gh", ghp);

        AffineRows gr;
        gr.rows.resize(F);
        gr.bias.assign(F, 0.0);
        for (std::size_t f = 0; f < F; ++f)
            for (std::size_t t = 0; t < T; ++t)
                gr.rows[f].push_back({0, static_cast<std::int32_t>(t * F + f), 1.0});
        int lg = prop::add_affine_layer(cx, id + "#g", gr, {lgh});

        int prev_label = step == 0 ? net.meta.go : step_labels[step - 1];
        std::vector<double> bias(4 * H);
        for (std::size_t r = 0; r < 4 * H; ++r)
            bias[r] = static_cast<double>(a.blstm.data[r]) +
                      static_cast<double>(
                          a.Wlstm.data[r * cols + F + static_cast<std::size_t>(prev_label)]);

        prop::LstmWires w;
        w.x_layer = lg;
        w.x_off = 0;
        w.x_cnt = F;
        w.h_layer = prev_h;
        w.c_layer = prev_c;
        prop::LstmLayers hc =
            prop::add_lstm_cell(cx, id + "#cell", w, a.Wlstm.data.data(), cols, bias, H);
        prev_h = hc.h;
        prev_c = hc.c;

        AffineRows yr;
        yr.rows.resize(C);
        yr.bias.assign(C, 0.0);
        for (std::size_t c = 0; c < C; ++c) {
            yr.bias[c] = static_cast<double>(a.b0.data[c]);
            for (std::size_t h = 0; h < H; ++h) {
                double cc = static_cast<double>(a.W0.data[c * H + h]);
                if (cc != 0.0) yr.rows[c].push_back({0, static_cast<std::int32_t>(h), cc});
            }
        }
        prop::add_affine_layer(cx, id + "#y", yr, {hc.h});
    }
    return st;
}

namespace {

Verdict run_attention(const Network& net, const CertifyRequest& req) {
    Verdict v;
    const AttnDecoderParams& a = *net.attn;
    std::vector<double> scores = forward(net, req.image);
    int classes = a.classes;
    int steps = static_cast<int>(scores.size()) / classes;
    std::vector<int> labels = frame_argmax(scores, steps, classes);
    v.greedy = greedy_labels(net, scores);

    if (labels.empty() || labels.back() != net.meta.eos) {
        v.status = Status::Unknown;
        v.note = "greedy decoding never reaches the end symbol";
        return v;
    }

    IntervalBox region = input_region(req.image, req.eps, req.clip_lo, req.clip_hi);
    AbstractState st = propagate_attention_steps(net, region, req.prop, labels);

    for (int step = 0; step < steps; ++step) {
        std::set<int> m = certify_frame(st, "dec" + std::to_string(step) + "#y", classes, 0,
                                        labels[static_cast<std::size_t>(step)]);
        v.candks.push_back(static_cast<int>(m.size()));
        if (m.size() > 1) {
            v.status = Status::Unknown;
            v.note = "decoder step " + std::to_string(step) + " is not pinned";
            return v;
        }
    }
    v.status = Status::Certified;
    return v;
}

}  // namespace

Verdict certify_ctc(const Network& net, const CertifyRequest& req) {
    try {
        return run_ctc(net, req);
    } catch (const TimeoutError& e) {
        Verdict v;
        v.timeout = true;
        v.note = e.what();
        return v;
    }
}

Verdict certify_vitstr(const Network& net, const CertifyRequest& req) {
    try {
        return run_vitstr(net, req);
    } catch (const TimeoutError& e) {
        Verdict v;
        v.timeout = true;
        v.note = e.what();
        return v;
    }
}

Verdict certify_attention(const Network& net, const CertifyRequest& req) {
    try {
        return run_attention(net, req);
    } catch (const TimeoutError& e) {
        Verdict v;
        v.timeout = true;
        v.note = e.what();
        return v;
    }
}

Verdict certify_sample(const Network& net, const CertifyRequest& req) {
    switch (net.decoder) {
        case DecoderKind::Ctc: return certify_ctc(net, req);
        case DecoderKind::Attention: return certify_attention(net, req);
        case DecoderKind::VitStr: return certify_vitstr(net, req);
    }
    throw KindError("certify_sample: unknown decoder kind");
}

}  // namespace seqcert
