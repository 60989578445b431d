#include "seqcert/forward.hpp"

#include <algorithm>
#include <cmath>

#include "rows.hpp"
#include "seqcert/abstract_state.hpp"
#include "seqcert/errors.hpp"
#include "seqcert/relax_scalar.hpp"

namespace seqcert {

std::vector<double> to_doubles(const Tensor& t) {
    return std::vector<double>(t.data.begin(), t.data.end());
}

Tensor to_tensor(const std::vector<std::uint32_t>& dims, const std::vector<double>& v) {
    Tensor t;
    t.dims = dims;
    t.data.assign(v.begin(), v.end());
    if (t.data.size() != Tensor::count(dims))
        throw ShapeError("to_tensor: dims product != value count");
    return t;
}

namespace {

using Vec = std::vector<double>;

double hat(double p) {
    double v = 1.0 - std::fabs(p);
    return v > 0.0 ? v : 0.0;
}

struct Evaluator {
    const Network& net;
    const TraceOptions* topts;           // non-null when tracing aux layers
    const AbstractState* hints;          // box-derived constants, may be null
    std::map<std::string, Vec>* trace;   // aux + node values when tracing
    std::map<std::string, Vec> vals;

    Evaluator(const Network& n, const TraceOptions* o, const AbstractState* h,
              std::map<std::string, Vec>* tr)
        : net(n), topts(o), hints(h), trace(tr) {}

    const Vec& value(const std::string& id) const {
        auto it = vals.find(id);
        if (it == vals.end()) throw ParseError("forward: value of '" + id + "' not computed yet");
        return it->second;
    }

    void set(const std::string& id, Vec v) {
        if (trace) (*trace)[id] = v;
        vals[id] = std::move(v);
    }

    void aux(const std::string& id, const Vec& v) {
        if (trace) (*trace)[id] = v;
    }

    // ---- composite pieces shared by graph nodes and the attention decoder ----

    Vec layer_norm(const std::string& id, const Vec& x, std::size_t group, double eps,
                   const float* gamma, const float* beta) {
        std::size_t w = x.size();
        Vec c(w), c2(w), v(w / group), r(w / group), nn(w), out(w);
        for (std::size_t base = 0, g = 0; base < w; base += group, ++g) {
            double mu = 0.0;
            for (std::size_t i = 0; i < group; ++i) mu += x[base + i];
            mu /= static_cast<double>(group);
            double s2 = 0.0;
            for (std::size_t i = 0; i < group; ++i) {
                c[base + i] = x[base + i] - mu;
                c2[base + i] = c[base + i] * c[base + i];
                s2 += c2[base + i];
            }
            v[g] = s2 / static_cast<double>(group) + eps;
            r[g] = 1.0 / std::sqrt(v[g]);
            for (std::size_t i = 0; i < group; ++i) {
                nn[base + i] = c[base + i] * r[g];
                out[base + i] = static_cast<double>(gamma[i]) * nn[base + i] +
                                static_cast<double>(beta[i]);
            }
        }
        aux(id + ".c", c);
        aux(id + ".c2", c2);
        aux(id + ".v", v);
        aux(id + ".r", r);
        aux(id + ".n", nn);
        aux(id, out);
        return out;
    }

    // Softmax over contiguous groups. In compositional mode the overflow
    // shift must match what the abstract side chose; it is read back from
    // the shift layer's bias when an abstract state is supplied.
    Vec softmax(const std::string& id, const Vec& x, std::size_t group) {
        std::size_t w = x.size();
        Vec out(w);
        bool comp = topts && topts->scheme == SoftmaxScheme::Compositional;
        bool refine = topts && topts->refine_softmax;

        Vec sh(w), ex(w), zs(w / group), qs(w / group);
        for (std::size_t base = 0, g = 0; base < w; base += group, ++g) {
            double cg;
            if (comp && hints && hints->has(id + "#s")) {
                const LayerBounds& L = hints->layer(id + "#s");
                cg = -L.lo[base].bias;
            } else {
                cg = x[base];
                for (std::size_t i = 1; i < group; ++i) cg = std::max(cg, x[base + i]);
            }
            double z = 0.0;
            for (std::size_t i = 0; i < group; ++i) {
                sh[base + i] = x[base + i] - cg;
                ex[base + i] = std::exp(sh[base + i]);
                z += ex[base + i];
            }
            zs[g] = z;
            qs[g] = 1.0 / z;
            for (std::size_t i = 0; i < group; ++i) out[base + i] = ex[base + i] * qs[g];
        }
        if (comp) {
            aux(id + "#s", sh);
            aux(id + "#e", ex);
            aux(id + "#z", zs);
            aux(id + "#q", qs);
            aux(id + "#p", out);
        }
        if (refine) aux(id + "#u", out);
        aux(id, out);
        return out;
    }

    struct LstmOut {
        Vec h, c;
    };

    // Gate order in the weight rows: input, forget, candidate, output.
    LstmOut lstm_cell(const std::string& id, const Vec& x, const Vec& h_prev, const Vec& c_prev,
                      const float* w, const float* b, std::size_t hidden) {
        std::size_t xin = x.size(), cols = xin + hidden;
        Vec g(4 * hidden);
        for (std::size_t r = 0; r < 4 * hidden; ++r) {
            double s = static_cast<double>(b[r]);
            const float* row = w + r * cols;
            for (std::size_t i = 0; i < xin; ++i) s += static_cast<double>(row[i]) * x[i];
            for (std::size_t i = 0; i < hidden; ++i)
                s += static_cast<double>(row[xin + i]) * h_prev[i];
            g[r] = s;
        }
        Vec fc(hidden), ic(hidden), c(hidden), h(hidden);
        for (std::size_t d = 0; d < hidden; ++d) {
            double ig = g[d], fg = g[hidden + d], cg = g[2 * hidden + d], og = g[3 * hidden + d];
            fc[d] = sigmoid(fg) * c_prev[d];
            ic[d] = sigmoid(ig) * std::tanh(cg);
            c[d] = fc[d] + ic[d];
            h[d] = sigmoid(og) * std::tanh(c[d]);
        }
        aux(id + "#g", g);
        aux(id + "#fc", fc);
        aux(id + "#ic", ic);
        aux(id + "#c", c);
        aux(id + "#h", h);
        return {std::move(h), std::move(c)};
    }

    // ---- per-node dispatch --------------------------------------------------

    void eval_node(const Node& n) {
        if (n.kind == NodeKind::Input) return;
        const Vec& in0 = value(n.inputs.at(0));

        switch (n.kind) {
            case NodeKind::Affine: {
                const Tensor& w = n.gett("weight");
                std::size_t rows = w.dims[0], cols = w.dims[1];
                const float* bias = n.hast("bias") ? n.gett("bias").data.data() : nullptr;
                Vec out(rows);
                for (std::size_t r = 0; r < rows; ++r) {
                    double s = bias ? static_cast<double>(bias[r]) : 0.0;
                    const float* row = w.data.data() + r * cols;
                    for (std::size_t c = 0; c < cols; ++c)
                        s += static_cast<double>(row[c]) * in0[c];
                    out[r] = s;
                }
                set(n.id, std::move(out));
                return;
            }
            case NodeKind::Conv2d:
            case NodeKind::BatchNorm:
            case NodeKind::AvgPool:
            case NodeKind::Normalization:
            case NodeKind::PosEnc:
            case NodeKind::PatchEmbed:
            case NodeKind::TpsGrid:
            case NodeKind::Reshape:
            case NodeKind::Slice:
            case NodeKind::Concat:
            case NodeKind::Add: {
                AffineRows rows = exact_affine_rows(net, n);
                Vec out(rows.rows.size());
                for (std::size_t r = 0; r < rows.rows.size(); ++r) {
                    double s = rows.bias[r];
                    for (const RowTerm& t : rows.rows[r])
                        s += t.c * value(n.inputs[static_cast<std::size_t>(t.slot)])
                                     [static_cast<std::size_t>(t.idx)];
                    out[r] = s;
                }
                set(n.id, std::move(out));
                return;
            }
            case NodeKind::ReLU: {
                Vec out(in0.size());
                for (std::size_t i = 0; i < in0.size(); ++i) out[i] = in0[i] > 0 ? in0[i] : 0.0;
                set(n.id, std::move(out));
                return;
            }
            case NodeKind::Tanh: {
                Vec out(in0.size());
                for (std::size_t i = 0; i < in0.size(); ++i) out[i] = std::tanh(in0[i]);
                set(n.id, std::move(out));
                return;
            }
            case NodeKind::Sigmoid: {
                Vec out(in0.size());
                for (std::size_t i = 0; i < in0.size(); ++i) out[i] = sigmoid(in0[i]);
                set(n.id, std::move(out));
                return;
            }
            case NodeKind::Exp: {
                Vec out(in0.size());
                for (std::size_t i = 0; i < in0.size(); ++i) out[i] = std::exp(in0[i]);
                set(n.id, std::move(out));
                return;
            }
            case NodeKind::Reciprocal: {
                Vec out(in0.size());
                for (std::size_t i = 0; i < in0.size(); ++i) out[i] = 1.0 / in0[i];
                set(n.id, std::move(out));
                return;
            }
            case NodeKind::Rsqrt: {
                Vec out(in0.size());
                for (std::size_t i = 0; i < in0.size(); ++i) out[i] = 1.0 / std::sqrt(in0[i]);
                set(n.id, std::move(out));
                return;
            }
            case NodeKind::Mul: {
                const Vec& in1 = value(n.inputs.at(1));
                Vec out(in0.size());
                for (std::size_t i = 0; i < in0.size(); ++i) out[i] = in0[i] * in1[i];
                set(n.id, std::move(out));
                return;
            }
            case NodeKind::MaxPool: {
                const auto& d = net.node(n.inputs[0]).out_dims;
                std::size_t C = d[0], H = d[1], W = d[2];
                std::size_t OH = n.out_dims[1], OW = n.out_dims[2];
                std::int64_t kh = n.geti("kh"), kw = n.geti("kw");
                std::int64_t sh = n.geti("sh", kh), sw = n.geti("sw", kw);
                Vec out(n.width());
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t oy = 0; oy < OH; ++oy)
                        for (std::size_t ox = 0; ox < OW; ++ox) {
                            double m = -HUGE_VAL;
                            for (std::int64_t ky = 0; ky < kh; ++ky)
                                for (std::int64_t kx = 0; kx < kw; ++kx) {
                                    std::size_t iy = oy * static_cast<std::size_t>(sh) +
                                                     static_cast<std::size_t>(ky);
                                    std::size_t ix = ox * static_cast<std::size_t>(sw) +
                                                     static_cast<std::size_t>(kx);
                                    m = std::max(m, in0[(c * H + iy) * W + ix]);
                                }
                            out[(c * OH + oy) * OW + ox] = m;
                        }
                set(n.id, std::move(out));
                return;
            }
            case NodeKind::LayerNorm: {
                std::size_t g = static_cast<std::size_t>(n.geti("dim"));
                Vec out = layer_norm(n.id, in0, g, n.getf("eps", 1e-5),
                                     n.gett("gamma").data.data(), n.gett("beta").data.data());
                set(n.id, std::move(out));
                return;
            }
            case NodeKind::Softmax: {
                std::size_t g = static_cast<std::size_t>(
                    n.geti("group", static_cast<std::int64_t>(in0.size())));
                Vec out = softmax(n.id, in0, g);
                set(n.id, std::move(out));
                return;
            }
            case NodeKind::LstmCell: {
                std::size_t hidden = static_cast<std::size_t>(n.geti("hidden"));
                Vec h_prev(hidden, 0.0), c_prev(hidden, 0.0);
                if (n.inputs.size() == 2) {
                    const Vec& prev = value(n.inputs[1]);
                    h_prev.assign(prev.begin(), prev.begin() + static_cast<std::ptrdiff_t>(hidden));
                    c_prev.assign(prev.begin() + static_cast<std::ptrdiff_t>(hidden), prev.end());
                }
                LstmOut r = lstm_cell(n.id, in0, h_prev, c_prev, n.gett("weight").data.data(),
                                      n.gett("bias").data.data(), hidden);
                Vec out(2 * hidden);
                std::copy(r.h.begin(), r.h.end(), out.begin());
                std::copy(r.c.begin(), r.c.end(), out.begin() + static_cast<std::ptrdiff_t>(hidden));
                set(n.id, std::move(out));
                return;
            }
            case NodeKind::AttentionBlock: {
                eval_attention_block(n, in0);
                return;
            }
            case NodeKind::BilinearSample: {
                eval_bilinear(n, in0, value(n.inputs.at(1)));
                return;
            }
            case NodeKind::Input:
                return;
        }
    }

    void eval_attention_block(const Node& n, const Vec& x) {
        std::size_t T = n.out_dims[0], D = n.out_dims[1];
        std::size_t heads = static_cast<std::size_t>(n.geti("heads", 1));
        std::size_t dh = D / heads;
        double eps = n.getf("eps", 1e-5);
        double scale = 1.0 / std::sqrt(static_cast<double>(dh));

        Vec ln1 = layer_norm(n.id + "#ln1", x, D, eps, n.gett("ln1_g").data.data(),
                             n.gett("ln1_b").data.data());

        auto proj = [&](const char* wk, const char* bk, const Vec& src) {
            const Tensor& w = n.gett(wk);
            const Tensor& b = n.gett(bk);
            Vec out(T * D);
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t d = 0; d < D; ++d) {
                    double s = static_cast<double>(b.data[d]);
                    for (std::size_t e = 0; e < D; ++e)
                        s += static_cast<double>(w.data[d * D + e]) * src[t * D + e];
                    out[t * D + d] = s;
                }
            return out;
        };

        Vec q = proj("wq", "bq", ln1), k = proj("wk", "bk", ln1), v = proj("wv", "bv", ln1);
        aux(n.id + "#q", q);
        aux(n.id + "#k", k);
        aux(n.id + "#v", v);

        Vec qk(heads * T * T * dh);
        for (std::size_t h = 0; h < heads; ++h)
            for (std::size_t i = 0; i < T; ++i)
                for (std::size_t j = 0; j < T; ++j)
                    for (std::size_t d = 0; d < dh; ++d)
                        qk[((h * T + i) * T + j) * dh + d] =
                            q[i * D + h * dh + d] * k[j * D + h * dh + d];
        aux(n.id + "#qk", qk);

        Vec sc(heads * T * T);
        for (std::size_t h = 0; h < heads; ++h)
            for (std::size_t i = 0; i < T; ++i)
                for (std::size_t j = 0; j < T; ++j) {
                    double s = 0.0;
                    for (std::size_t d = 0; d < dh; ++d)
                        s += qk[((h * T + i) * T + j) * dh + d];
                    sc[(h * T + i) * T + j] = s * scale;
                }
        aux(n.id + "#sc", sc);

        Vec al = softmax(n.id + "#sm", sc, T);

        Vec av(heads * T * T * dh);
        for (std::size_t h = 0; h < heads; ++h)
            for (std::size_t i = 0; i < T; ++i)
                for (std::size_t j = 0; j < T; ++j)
                    for (std::size_t d = 0; d < dh; ++d)
                        av[((h * T + i) * T + j) * dh + d] =
                            al[(h * T + i) * T + j] * v[j * D + h * dh + d];
        aux(n.id + "#av", av);

        Vec ctx(T * D, 0.0);
        for (std::size_t h = 0; h < heads; ++h)
            for (std::size_t i = 0; i < T; ++i)
                for (std::size_t d = 0; d < dh; ++d) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < T; ++j)
                        s += av[((h * T + i) * T + j) * dh + d];
                    ctx[i * D + h * dh + d] = s;
                }
        aux(n.id + "#ctx", ctx);

        Vec pr = proj("wo", "bo", ctx);
        aux(n.id + "#proj", pr);

        Vec res1(T * D);
        for (std::size_t i = 0; i < T * D; ++i) res1[i] = x[i] + pr[i];
        aux(n.id + "#res1", res1);

        Vec ln2 = layer_norm(n.id + "#ln2", res1, D, eps, n.gett("ln2_g").data.data(),
                             n.gett("ln2_b").data.data());

        const Tensor& m0w = n.gett("mlp0_w");
        const Tensor& m0b = n.gett("mlp0_b");
        const Tensor& m1w = n.gett("mlp1_w");
        const Tensor& m1b = n.gett("mlp1_b");
        std::size_t dmlp = m0w.dims[0];
        Vec h0(T * dmlp), h0r(T * dmlp), h1(T * D), out(T * D);
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t d = 0; d < dmlp; ++d) {
                double s = static_cast<double>(m0b.data[d]);
                for (std::size_t e = 0; e < D; ++e)
                    s += static_cast<double>(m0w.data[d * D + e]) * ln2[t * D + e];
                h0[t * dmlp + d] = s;
                h0r[t * dmlp + d] = s > 0 ? s : 0.0;
            }
            for (std::size_t d = 0; d < D; ++d) {
                double s = static_cast<double>(m1b.data[d]);
                for (std::size_t e = 0; e < dmlp; ++e)
                    s += static_cast<double>(m1w.data[d * dmlp + e]) * h0r[t * dmlp + e];
                h1[t * D + d] = s;
                out[t * D + d] = res1[t * D + d] + s;
            }
        }
        aux(n.id + "#mlp0", h0);
        aux(n.id + "#mlp0r", h0r);
        aux(n.id + "#mlp1", h1);
        set(n.id, std::move(out));
    }

    void eval_bilinear(const Node& n, const Vec& grid, const Vec& img) {
        const auto& gd = net.node(n.inputs[0]).out_dims;  // [2, oh, ow]
        const auto& id = net.node(n.inputs[1]).out_dims;  // [C, H, W]
        std::size_t npts = Tensor::count(gd) / 2;
        std::size_t C = id[0], H = id[1], W = id[2];

        Vec rx(npts * W), ry(npts * H), rr(npts * H * W), ri(C * npts * H * W), out(C * npts);
        for (std::size_t i = 0; i < npts; ++i) {
            for (std::size_t m = 0; m < W; ++m)
                rx[i * W + m] = hat(grid[i] - static_cast<double>(m));
            for (std::size_t nn = 0; nn < H; ++nn)
                ry[i * H + nn] = hat(grid[npts + i] - static_cast<double>(nn));
            for (std::size_t nn = 0; nn < H; ++nn)
                for (std::size_t m = 0; m < W; ++m)
                    rr[(i * H + nn) * W + m] = rx[i * W + m] * ry[i * H + nn];
        }
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t i = 0; i < npts; ++i) {
                double s = 0.0;
                for (std::size_t nn = 0; nn < H; ++nn)
                    for (std::size_t m = 0; m < W; ++m) {
                        double p = rr[(i * H + nn) * W + m] * img[(c * H + nn) * W + m];
                        ri[((c * npts + i) * H + nn) * W + m] = p;
                        s += p;
                    }
                out[c * npts + i] = s;
            }
        aux(n.id + "#rx", rx);
        aux(n.id + "#ry", ry);
        aux(n.id + "#rr", rr);
        aux(n.id + "#ri", ri);
        set(n.id, std::move(out));
    }

    // ---- recurrent attention decoder ----------------------------------------

    Vec run_attention_decoder(const Vec& feats) {
        const AttnDecoderParams& a = *net.attn;
        std::size_t T = static_cast<std::size_t>(net.frames);
        std::size_t F = static_cast<std::size_t>(a.feat);
        std::size_t A = static_cast<std::size_t>(a.att_dim);
        std::size_t Hd = static_cast<std::size_t>(a.hidden);
        std::size_t C = static_cast<std::size_t>(a.classes);

        const std::vector<int>* forced =
            (topts && !topts->forced_prev_labels.empty()) ? &topts->forced_prev_labels : nullptr;
        std::size_t max_steps = forced ? forced->size()
                                       : static_cast<std::size_t>(a.max_steps);

        Vec s(Hd, 0.0), cc(Hd, 0.0);
        int prev = net.meta.go;
        Vec logits;
        for (std::size_t step = 0; step < max_steps; ++step) {
            std::string id = "dec" + std::to_string(step);

            Vec pre(T * A);
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t ai = 0; ai < A; ++ai) {
                    double sum = static_cast<double>(a.b.data[ai]);
                    for (std::size_t h = 0; h < Hd; ++h)
                        sum += static_cast<double>(a.W.data[ai * Hd + h]) * s[h];
                    for (std::size_t f = 0; f < F; ++f)
                        sum += static_cast<double>(a.V.data[ai * F + f]) * feats[t * F + f];
                    pre[t * A + ai] = sum;
                }
            aux(id + "#pre", pre);

            Vec th(T * A);
            for (std::size_t i = 0; i < T * A; ++i) th[i] = std::tanh(pre[i]);
            aux(id + "#th", th);

            Vec e(T);
            for (std::size_t t = 0; t < T; ++t) {
                double sum = 0.0;
                for (std::size_t ai = 0; ai < A; ++ai)
                    sum += static_cast<double>(a.a.data[ai]) * th[t * A + ai];
                e[t] = sum;
            }
            aux(id + "#e", e);

            Vec al = softmax(id + "#al", e, T);

            Vec gh(T * F);
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t f = 0; f < F; ++f) gh[t * F + f] = al[t] * feats[t * F + f];
            aux(id + "#gh", gh);

            Vec g(F, 0.0);
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t f = 0; f < F; ++f) g[f] += gh[t * F + f];
            aux(id + "#g", g);

            Vec x(F + C, 0.0);
            std::copy(g.begin(), g.end(), x.begin());
            if (prev >= 0 && static_cast<std::size_t>(prev) < C) x[F + static_cast<std::size_t>(prev)] = 1.0;
            LstmOut cell = lstm_cell(id + "#cell", x, s, cc, a.Wlstm.data.data(),
                                     a.blstm.data.data(), Hd);
            s = cell.h;
            cc = cell.c;

            Vec y(C);
            for (std::size_t c = 0; c < C; ++c) {
                double sum = static_cast<double>(a.b0.data[c]);
                for (std::size_t h = 0; h < Hd; ++h)
                    sum += static_cast<double>(a.W0.data[c * Hd + h]) * s[h];
                y[c] = sum;
            }
            aux(id + "#y", y);
            logits.insert(logits.end(), y.begin(), y.end());

            int label;
            if (forced) {
                label = (*forced)[step];
            } else {
                label = 0;
                for (std::size_t c = 1; c < C; ++c)
                    if (y[c] > y[static_cast<std::size_t>(label)]) label = static_cast<int>(c);
                if (label == net.meta.eos) break;
            }
            prev = label;
        }
        return logits;
    }

    Vec run_graph(const Vec& image) {
        for (const Node& n : net.nodes) {
            if (n.kind == NodeKind::Input) {
                if (image.size() != n.width())
                    throw ShapeError("forward: image width != Input dims");
                set(n.id, image);
            } else {
                eval_node(n);
            }
        }
        return value(net.output);
    }
};

}  // namespace

std::vector<double> forward_graph(const Network& net, const std::vector<double>& image) {
    Evaluator ev(net, nullptr, nullptr, nullptr);
    return ev.run_graph(image);
}

std::vector<double> forward(const Network& net, const std::vector<double>& image) {
    Evaluator ev(net, nullptr, nullptr, nullptr);
    Vec feats = ev.run_graph(image);
    if (net.decoder == DecoderKind::Attention) return ev.run_attention_decoder(feats);
    return feats;
}

std::map<std::string, std::vector<double>> forward_trace(const Network& net,
                                                         const std::vector<double>& image,
                                                         const TraceOptions& opts,
                                                         const AbstractState* hints) {
    std::map<std::string, Vec> trace;
    Evaluator ev(net, &opts, hints, &trace);
    Vec feats = ev.run_graph(image);
    if (net.decoder == DecoderKind::Attention) ev.run_attention_decoder(feats);
    return trace;
}

}  // namespace seqcert
