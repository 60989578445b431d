#include "seqcert/propagate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

#include "prop_internal.hpp"
#include "seqcert/errors.hpp"
#include "seqcert/relax_mul.hpp"
#include "seqcert/softmax_bounds.hpp"

namespace seqcert {
namespace prop {

void Ctx::check_deadline() const {
    if (opts.has_deadline && std::chrono::steady_clock::now() > opts.deadline)
        throw TimeoutError("propagate: deadline exceeded");
}

int Ctx::layer_of(const std::string& id) const {
    return st.layer_index(id);
}

namespace {

// Keeps lb <= ub when two independently sound bounds cross by float dust.
void tighten(LayerBounds& lay, std::size_t i, double lo, double hi) {
    lay.lb[i] = std::max(lay.lb[i], lo);
    lay.ub[i] = std::min(lay.ub[i], hi);
    if (lay.lb[i] > lay.ub[i]) {
        double m = 0.5 * (lay.lb[i] + lay.ub[i]);
        lay.lb[i] = m;
        lay.ub[i] = m;
    }
}

std::uint64_t pair_seed(const McLpConfig& cfg, const std::string& id, std::size_t k,
                        const Box2& b) {
    std::uint64_t s = mix_seed(cfg.seed, id.data(), id.size());
    std::uint64_t kk = static_cast<std::uint64_t>(k);
    s = mix_seed(s, &kk, sizeof kk);
    double box[4] = {b.lx, b.ux, b.ly, b.uy};
    return mix_seed(s, box, sizeof box);
}

}  // namespace

int add_affine_layer(Ctx& cx, const std::string& id, const AffineRows& rows,
                     const std::vector<int>& slot_layers) {
    LayerBounds lay;
    lay.id = id;
    lay.width = rows.rows.size();
    lay.lo.resize(lay.width);
    lay.hi.resize(lay.width);
    lay.lb.assign(lay.width, 0.0);
    lay.ub.assign(lay.width, 0.0);

    bool all_simple = true;
    for (std::size_t r = 0; r < lay.width; ++r) {
        LinExpr e;
        e.bias = rows.bias[r];
        e.terms.reserve(rows.rows[r].size());
        for (const RowTerm& t : rows.rows[r]) {
            int L = slot_layers.at(static_cast<std::size_t>(t.slot));
            e.add(static_cast<std::int32_t>(L), t.idx, t.c);
        }
        if (e.terms.size() > 1) all_simple = false;
        lay.lo[r] = e;
        lay.hi[r] = std::move(e);
    }

    int idx = cx.st.add_layer(std::move(lay));
    LayerBounds& L = cx.st.layers[static_cast<std::size_t>(idx)];
    if (all_simple) {
        for (std::size_t r = 0; r < L.width; ++r) {
            if (L.lo[r].terms.empty()) {
                L.lb[r] = L.ub[r] = L.lo[r].bias;
                continue;
            }
            const LinTerm& t = L.lo[r].terms[0];
            const LayerBounds& src = cx.st.layers[static_cast<std::size_t>(t.layer)];
            double a = t.c * src.lb[static_cast<std::size_t>(t.idx)] + L.lo[r].bias;
            double b = t.c * src.ub[static_cast<std::size_t>(t.idx)] + L.lo[r].bias;
            L.lb[r] = std::min(a, b);
            L.ub[r] = std::max(a, b);
        }
    } else {
        finalize_intervals(cx.st, idx);
    }
    return idx;
}

int add_const_layer(Ctx& cx, const std::string& id, const std::vector<double>& values) {
    LayerBounds lay;
    lay.id = id;
    lay.width = values.size();
    lay.lo.resize(lay.width);
    lay.hi.resize(lay.width);
    lay.lb = values;
    lay.ub = values;
    for (std::size_t i = 0; i < lay.width; ++i) {
        lay.lo[i] = LinExpr(values[i]);
        lay.hi[i] = LinExpr(values[i]);
    }
    return cx.st.add_layer(std::move(lay));
}

int add_scalar_layer(Ctx& cx, const std::string& id, int src, ScalarFn fn) {
    const LayerBounds& s = cx.st.layers[static_cast<std::size_t>(src)];
    LayerBounds lay;
    lay.id = id;
    lay.width = s.width;
    lay.lo.resize(lay.width);
    lay.hi.resize(lay.width);
    lay.lb.assign(lay.width, 0.0);
    lay.ub.assign(lay.width, 0.0);
    for (std::size_t i = 0; i < lay.width; ++i) {
        ScalarRelaxation r = fn(s.lb[i], s.ub[i]);
        lay.lo[i] = LinExpr::single(static_cast<std::int32_t>(src), static_cast<std::int32_t>(i),
                                    r.lo_slope, r.lo_bias);
        lay.hi[i] = LinExpr::single(static_cast<std::int32_t>(src), static_cast<std::int32_t>(i),
                                    r.hi_slope, r.hi_bias);
        lay.lb[i] = r.lb;
        lay.ub[i] = r.ub;
    }
    return cx.st.add_layer(std::move(lay));
}

namespace {

void operand_box(const Ctx& cx, const Ref& r, double& lo, double& hi) {
    const LayerBounds& lay = cx.st.layers[static_cast<std::size_t>(r.layer)];
    lo = lay.lb[static_cast<std::size_t>(r.idx)];
    hi = lay.ub[static_cast<std::size_t>(r.idx)];
}

}  // namespace

int add_mul_layer(Ctx& cx, const std::string& id, const std::vector<MulPair>& pairs) {
    LayerBounds lay;
    lay.id = id;
    lay.width = pairs.size();
    lay.lo.resize(lay.width);
    lay.hi.resize(lay.width);
    lay.lb.assign(lay.width, 0.0);
    lay.ub.assign(lay.width, 0.0);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const MulPair& mp = pairs[i];
        double la, ua, lb2, ub2;
        operand_box(cx, mp.a, la, ua);
        operand_box(cx, mp.b, lb2, ub2);
        if ((la == 0.0 && ua == 0.0) || (lb2 == 0.0 && ub2 == 0.0)) {
            lay.lo[i] = LinExpr(0.0);  // pinned-zero operand: product vanishes
            lay.hi[i] = LinExpr(0.0);
            continue;
        }
        PlanePair p = mul_relax(la, ua, lb2, ub2, mp.same);
        LinExpr lo, hi;
        lo.bias = p.lo.c;
        hi.bias = p.hi.c;
        if (mp.same) {
            lo.add(mp.a.layer, mp.a.idx, p.lo.a + p.lo.b);
            hi.add(mp.a.layer, mp.a.idx, p.hi.a + p.hi.b);
        } else {
            lo.add(mp.a.layer, mp.a.idx, p.lo.a);
            lo.add(mp.b.layer, mp.b.idx, p.lo.b);
            hi.add(mp.a.layer, mp.a.idx, p.hi.a);
            hi.add(mp.b.layer, mp.b.idx, p.hi.b);
        }
        lay.lo[i] = std::move(lo);
        lay.hi[i] = std::move(hi);
        lay.lb[i] = p.lb;
        lay.ub[i] = p.ub;
    }
    return cx.st.add_layer(std::move(lay));
}

int add_surface_layer(Ctx& cx, const std::string& id, SurfaceKind kind,
                      const std::vector<MulPair>& pairs) {
    LayerBounds lay;
    lay.id = id;
    lay.width = pairs.size();
    lay.lo.resize(lay.width);
    lay.hi.resize(lay.width);
    lay.lb.assign(lay.width, 0.0);
    lay.ub.assign(lay.width, 0.0);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const MulPair& mp = pairs[i];
        Box2 box;
        operand_box(cx, mp.a, box.lx, box.ux);
        operand_box(cx, mp.b, box.ly, box.uy);
        McLpConfig cfg = cx.opts.mclp;
        cfg.seed = pair_seed(cfg, id, i, box);
        PlanePair p = surface_relax(kind, box, cfg);
        LinExpr lo, hi;
        lo.bias = p.lo.c;
        hi.bias = p.hi.c;
        lo.add(mp.a.layer, mp.a.idx, p.lo.a);
        lo.add(mp.b.layer, mp.b.idx, p.lo.b);
        hi.add(mp.a.layer, mp.a.idx, p.hi.a);
        hi.add(mp.b.layer, mp.b.idx, p.hi.b);
        lay.lo[i] = std::move(lo);
        lay.hi[i] = std::move(hi);
        lay.lb[i] = p.lb;
        lay.ub[i] = p.ub;
    }
    return cx.st.add_layer(std::move(lay));
}

namespace {

// Each group's probabilities sum to one exactly, so its widest neuron k
// (ties to the lowest index) also satisfies x_k = 1 - sum of the others.
// The layer keeps the identity map — backsubstitution through it is
// unchanged, so bounds can only tighten — and carries the constraint two
// ways: the interval of k is intersected with the implied one, and the
// groups are recorded as simplex ranges so every interval evaluation at
// this layer solves the sum-to-one LP instead of reading raw endpoints.
int add_simplex_refinement(Ctx& cx, const std::string& id, int pre, std::size_t group) {
    const LayerBounds& P = cx.st.layers[static_cast<std::size_t>(pre)];
    LayerBounds lay;
    lay.id = id;
    lay.width = P.width;
    lay.lo.resize(lay.width);
    lay.hi.resize(lay.width);
    lay.lb = P.lb;
    lay.ub = P.ub;
    for (std::size_t i = 0; i < lay.width; ++i) {
        lay.lo[i] = LinExpr::single(pre, static_cast<std::int32_t>(i), 1.0);
        lay.hi[i] = lay.lo[i];
    }

    for (std::size_t base = 0; base < P.width; base += group) {
        lay.simplex.emplace_back(base, group);
        std::vector<double> gl(P.lb.begin() + static_cast<std::ptrdiff_t>(base),
                               P.lb.begin() + static_cast<std::ptrdiff_t>(base + group));
        std::vector<double> gu(P.ub.begin() + static_cast<std::ptrdiff_t>(base),
                               P.ub.begin() + static_cast<std::ptrdiff_t>(base + group));
        std::size_t k = base + choose_refine_index(gl, gu);
        double sum_lo = 0.0, sum_hi = 0.0;
        for (std::size_t j = base; j < base + group; ++j) {
            if (j == k) continue;
            sum_lo += P.lb[j];
            sum_hi += P.ub[j];
        }
        double lo = std::max(P.lb[k], 1.0 - sum_hi);
        double hi = std::min(P.ub[k], 1.0 - sum_lo);
        if (lo > hi + 1e-7)
            throw InfeasibleError("softmax refinement: empty interval at '" + id + "'");
        if (lo > hi) lo = hi = 0.5 * (lo + hi);
        lay.lb[k] = lo;
        lay.ub[k] = hi;
    }
    return cx.st.add_layer(std::move(lay));
}

int add_softmax_comp(Ctx& cx, const std::string& id, int src, std::size_t group) {
    const LayerBounds& S = cx.st.layers[static_cast<std::size_t>(src)];
    std::size_t W = S.width, G = W / group;

    // Overflow shift: constant per group, the max upper bound of its scores.
    AffineRows shift;
    shift.rows.resize(W);
    shift.bias.assign(W, 0.0);
    for (std::size_t base = 0; base < W; base += group) {
        double cg = S.ub[base];
        for (std::size_t i = 1; i < group; ++i) cg = std::max(cg, S.ub[base + i]);
        for (std::size_t i = base; i < base + group; ++i) {
            shift.rows[i].push_back({0, static_cast<std::int32_t>(i), 1.0});
            shift.bias[i] = -cg;
        }
    }
    int ls = add_affine_layer(cx, id + "#s", shift, {src});
    int le = add_scalar_layer(cx, id + "#e", ls, &exp_relax);

    AffineRows sum;
    sum.rows.resize(G);
    sum.bias.assign(G, 0.0);
    for (std::size_t g = 0; g < G; ++g)
        for (std::size_t i = 0; i < group; ++i)
            sum.rows[g].push_back({0, static_cast<std::int32_t>(g * group + i), 1.0});
    int lz = add_affine_layer(cx, id + "#z", sum, {le});
    {
        // The backsubstituted floor can sag below the plain interval sum
        // (exponential tangents go negative); intersect with it so the
        // reciprocal stays on a positive domain.
        const LayerBounds& E = cx.st.layers[static_cast<std::size_t>(le)];
        LayerBounds& Z = cx.st.layers[static_cast<std::size_t>(lz)];
        for (std::size_t g = 0; g < G; ++g) {
            double lo = 0.0, hi = 0.0;
            for (std::size_t i = 0; i < group; ++i) {
                lo += E.lb[g * group + i];
                hi += E.ub[g * group + i];
            }
            tighten(Z, g, lo, hi);
        }
    }
    int lq = add_scalar_layer(cx, id + "#q", lz, &reciprocal_relax);

    std::vector<MulPair> pairs(W);
    for (std::size_t i = 0; i < W; ++i) {
        pairs[i].a = {le, static_cast<std::int32_t>(i)};
        pairs[i].b = {lq, static_cast<std::int32_t>(i / group)};
    }
    if (!cx.opts.refine_softmax) return add_mul_layer(cx, id, pairs);
    int lp = add_mul_layer(cx, id + "#p", pairs);
    return add_simplex_refinement(cx, id, lp, group);
}

int add_softmax_lse(Ctx& cx, const std::string& id, int src, std::size_t group) {
    const LayerBounds& S = cx.st.layers[static_cast<std::size_t>(src)];
    std::size_t W = S.width;

    LayerBounds lay;
    lay.id = cx.opts.refine_softmax ? id + "#u" : id;
    lay.width = W;
    lay.lo.resize(W);
    lay.hi.resize(W);
    lay.lb.assign(W, 0.0);
    lay.ub.assign(W, 0.0);
    for (std::size_t base = 0; base < W; base += group) {
        std::vector<double> gl(S.lb.begin() + static_cast<std::ptrdiff_t>(base),
                               S.lb.begin() + static_cast<std::ptrdiff_t>(base + group));
        std::vector<double> gu(S.ub.begin() + static_cast<std::ptrdiff_t>(base),
                               S.ub.begin() + static_cast<std::ptrdiff_t>(base + group));
        for (std::size_t j = 0; j < group; ++j) {
            SoftmaxPlanes p = lse_softmax_planes(gl, gu, j);
            LinExpr lo, hi;
            lo.bias = p.lo_bias;
            hi.bias = p.hi_bias;
            for (std::size_t k = 0; k < group; ++k) {
                lo.add(static_cast<std::int32_t>(src), static_cast<std::int32_t>(base + k),
                       p.lo_coeffs[k]);
                hi.add(static_cast<std::int32_t>(src), static_cast<std::int32_t>(base + k),
                       p.hi_coeffs[k]);
            }
            lay.lo[base + j] = std::move(lo);
            lay.hi[base + j] = std::move(hi);
            lay.lb[base + j] = p.lb;
            lay.ub[base + j] = p.ub;
        }
    }
    int lu = cx.st.add_layer(std::move(lay));
    if (!cx.opts.refine_softmax) return lu;
    return add_simplex_refinement(cx, id, lu, group);
}

}  // namespace

int add_softmax_chain(Ctx& cx, const std::string& id, int src, std::size_t group) {
    const LayerBounds& S = cx.st.layers[static_cast<std::size_t>(src)];
    if (group < 2 || S.width % group != 0)
        throw SizeError("add_softmax_chain: group must divide the source width");
    cx.check_deadline();
    if (cx.opts.scheme == SoftmaxScheme::Compositional)
        return add_softmax_comp(cx, id, src, group);
    return add_softmax_lse(cx, id, src, group);
}

int add_layernorm_chain(Ctx& cx, const std::string& id, int src, std::size_t group, double eps,
                        const float* gamma, const float* beta) {
    const LayerBounds& S = cx.st.layers[static_cast<std::size_t>(src)];
    std::size_t W = S.width, G = W / group;

    AffineRows center;
    center.rows.resize(W);
    center.bias.assign(W, 0.0);
    double inv = 1.0 / static_cast<double>(group);
    for (std::size_t base = 0; base < W; base += group)
        for (std::size_t i = base; i < base + group; ++i)
            for (std::size_t j = base; j < base + group; ++j)
                center.rows[i].push_back(
                    {0, static_cast<std::int32_t>(j), (i == j ? 1.0 - inv : -inv)});
    int lc = add_affine_layer(cx, id + ".c", center, {src});

    std::vector<MulPair> sq(W);
    for (std::size_t i = 0; i < W; ++i) {
        sq[i].a = {lc, static_cast<std::int32_t>(i)};
        sq[i].b = sq[i].a;
        sq[i].same = true;
    }
    int lc2 = add_mul_layer(cx, id + ".c2", sq);

    AffineRows var;
    var.rows.resize(G);
    var.bias.assign(G, eps);
    for (std::size_t g = 0; g < G; ++g)
        for (std::size_t i = 0; i < group; ++i)
            var.rows[g].push_back({0, static_cast<std::int32_t>(g * group + i), inv});
    int lv = add_affine_layer(cx, id + ".v", var, {lc2});
    {
        // Squares are nonnegative, so the variance never drops below eps.
        const LayerBounds& C2 = cx.st.layers[static_cast<std::size_t>(lc2)];
        LayerBounds& V = cx.st.layers[static_cast<std::size_t>(lv)];
        for (std::size_t g = 0; g < G; ++g) {
            double lo = eps, hi = eps;
            for (std::size_t i = 0; i < group; ++i) {
                lo += inv * C2.lb[g * group + i];
                hi += inv * C2.ub[g * group + i];
            }
            tighten(V, g, lo, hi);
        }
    }
    int lr = add_scalar_layer(cx, id + ".r", lv, &rsqrt_relax);

    std::vector<MulPair> norm(W);
    for (std::size_t i = 0; i < W; ++i) {
        norm[i].a = {lc, static_cast<std::int32_t>(i)};
        norm[i].b = {lr, static_cast<std::int32_t>(i / group)};
    }
    int ln = add_mul_layer(cx, id + ".n", norm);

    AffineRows out;
    out.rows.resize(W);
    out.bias.assign(W, 0.0);
    for (std::size_t i = 0; i < W; ++i) {
        double gsc = static_cast<double>(gamma[i % group]);
        if (gsc != 0.0) out.rows[i].push_back({0, static_cast<std::int32_t>(i), gsc});
        out.bias[i] = static_cast<double>(beta[i % group]);
    }
    return add_affine_layer(cx, id, out, {ln});
}

namespace {

int add_maxpool_layer(Ctx& cx, const Node& n, int src) {
    const auto& d = cx.net.node(n.inputs[0]).out_dims;
    std::size_t C = d[0], H = d[1], W = d[2];
    std::size_t OH = n.out_dims[1], OW = n.out_dims[2];
    std::int64_t kh = n.geti("kh"), kw = n.geti("kw");
    std::int64_t sh = n.geti("sh", kh), sw = n.geti("sw", kw);
    const LayerBounds& S = cx.st.layers[static_cast<std::size_t>(src)];

    LayerBounds lay;
    lay.id = n.id;
    lay.width = n.width();
    lay.lo.resize(lay.width);
    lay.hi.resize(lay.width);
    lay.lb.assign(lay.width, 0.0);
    lay.ub.assign(lay.width, 0.0);

    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t oy = 0; oy < OH; ++oy)
            for (std::size_t ox = 0; ox < OW; ++ox) {
                std::size_t o = (c * OH + oy) * OW + ox;
                double lmax = -HUGE_VAL, umax = -HUGE_VAL, usecond = -HUGE_VAL;
                std::size_t jl = 0, ju = 0;
                for (std::int64_t ky = 0; ky < kh; ++ky)
                    for (std::int64_t kx = 0; kx < kw; ++kx) {
                        std::size_t iy =
                            oy * static_cast<std::size_t>(sh) + static_cast<std::size_t>(ky);
                        std::size_t ix =
                            ox * static_cast<std::size_t>(sw) + static_cast<std::size_t>(kx);
                        std::size_t j = (c * H + iy) * W + ix;
                        if (S.lb[j] > lmax) {
                            lmax = S.lb[j];
                            jl = j;
                        }
                        if (S.ub[j] > umax) {
                            usecond = umax;
                            umax = S.ub[j];
                            ju = j;
                        } else if (S.ub[j] > usecond) {
                            usecond = S.ub[j];
                        }
                    }
                // Dominant input: its lower bound clears every other upper.
                bool dominant = (jl == ju) ? (lmax >= usecond) : (lmax >= umax);
                if (dominant) {
                    lay.lo[o] = LinExpr::single(static_cast<std::int32_t>(src),
                                                static_cast<std::int32_t>(jl), 1.0);
                    lay.hi[o] = lay.lo[o];
                    lay.lb[o] = S.lb[jl];
                    lay.ub[o] = S.ub[jl];
                } else {
                    lay.lo[o] = LinExpr::single(static_cast<std::int32_t>(src),
                                                static_cast<std::int32_t>(jl), 1.0);
                    lay.hi[o] = LinExpr(umax);
                    lay.lb[o] = lmax;
                    lay.ub[o] = umax;
                }
            }
    return cx.st.add_layer(std::move(lay));
}

}  // namespace

}  // namespace prop

AbstractState propagate(const Network& net, const IntervalBox& region,
                        const PropagateOptions& opts) {
    const Node& in = net.input_node();
    if (region.size() != in.width())
        throw ShapeError("propagate: region width != input width");

    AbstractState st = init_abstract(region);
    st.index.erase(st.layers[0].id);
    st.layers[0].id = in.id;
    st.index.emplace(in.id, 0);

    prop::Ctx cx{net, st, opts};
    for (const Node& n : net.nodes) {
        if (n.kind == NodeKind::Input) continue;
        cx.check_deadline();
        std::vector<int> slots;
        slots.reserve(n.inputs.size());
        for (const std::string& dep : n.inputs) slots.push_back(cx.layer_of(dep));

        if (is_exact_affine(n.kind)) {
            prop::add_affine_layer(cx, n.id, exact_affine_rows(net, n), slots);
            continue;
        }
        switch (n.kind) {
            case NodeKind::ReLU:
                prop::add_scalar_layer(cx, n.id, slots[0], &relu_relax);
                break;
            case NodeKind::Tanh:
                prop::add_scalar_layer(cx, n.id, slots[0], &tanh_relax);
                break;
            case NodeKind::Sigmoid:
                prop::add_scalar_layer(cx, n.id, slots[0], &sigmoid_relax);
                break;
            case NodeKind::Exp:
                prop::add_scalar_layer(cx, n.id, slots[0], &exp_relax);
                break;
            case NodeKind::Reciprocal:
                prop::add_scalar_layer(cx, n.id, slots[0], &reciprocal_relax);
                break;
            case NodeKind::Rsqrt:
                prop::add_scalar_layer(cx, n.id, slots[0], &rsqrt_relax);
                break;
            case NodeKind::MaxPool:
                prop::add_maxpool_layer(cx, n, slots[0]);
                break;
            case NodeKind::Mul: {
                std::vector<prop::MulPair> pairs(n.width());
                bool same = n.inputs[0] == n.inputs[1];
                for (std::size_t i = 0; i < pairs.size(); ++i) {
                    pairs[i].a = {slots[0], static_cast<std::int32_t>(i)};
                    pairs[i].b = {slots[1], static_cast<std::int32_t>(i)};
                    pairs[i].same = same;
                }
                prop::add_mul_layer(cx, n.id, pairs);
                break;
            }
            case NodeKind::LayerNorm:
                prop::add_layernorm_chain(cx, n.id, slots[0],
                                          static_cast<std::size_t>(n.geti("dim")),
                                          n.getf("eps", 1e-5), n.gett("gamma").data.data(),
                                          n.gett("beta").data.data());
                break;
            case NodeKind::Softmax: {
                std::size_t g = static_cast<std::size_t>(n.geti(
                    "group",
                    static_cast<std::int64_t>(cx.st.layers[static_cast<std::size_t>(slots[0])]
                                                  .width)));
                prop::add_softmax_chain(cx, n.id, slots[0], g);
                break;
            }
            case NodeKind::LstmCell:
                prop::add_lstm_node(cx, n);
                break;
            case NodeKind::AttentionBlock:
                prop::add_attention_block(cx, n, slots[0]);
                break;
            case NodeKind::BilinearSample:
                prop::add_bilinear_sample(cx, n, slots[0], slots[1]);
                break;
            default:
                throw KindError("propagate: no transformer for node '" + n.id + "'");
        }
    }
    return st;
}

DominanceResult verify_dominance(const AbstractState& st, const std::string& logits_id,
                                 int classes, int t, int a, int b) {
    int L = st.layer_index(logits_id);
    LinExpr e;
    e.add(static_cast<std::int32_t>(L), static_cast<std::int32_t>(t * classes + a), 1.0);
    e.add(static_cast<std::int32_t>(L), static_cast<std::int32_t>(t * classes + b), -1.0);
    double lb = backsubstitute(st, e, Dir::Lower);
    return {lb > 0.0 ? QueryStatus::Safe : QueryStatus::Unknown, lb};
}

std::set<int> certify_frame(const AbstractState& st, const std::string& logits_id, int classes,
                            int t, int concrete_argmax) {
    int L = st.layer_index(logits_id);
    std::vector<LinExpr> exprs;
    std::vector<int> others;
    exprs.reserve(static_cast<std::size_t>(classes) - 1);
    for (int b = 0; b < classes; ++b) {
        if (b == concrete_argmax) continue;
        LinExpr e;
        e.add(static_cast<std::int32_t>(L),
              static_cast<std::int32_t>(t * classes + concrete_argmax), 1.0);
        e.add(static_cast<std::int32_t>(L), static_cast<std::int32_t>(t * classes + b), -1.0);
        exprs.push_back(std::move(e));
        others.push_back(b);
    }
    std::vector<double> lbs;
    backsubstitute_batch(st, exprs, Dir::Lower, lbs);
    std::set<int> cands{concrete_argmax};
    for (std::size_t i = 0; i < others.size(); ++i)
        if (lbs[i] <= 0.0) cands.insert(others[i]);
    return cands;
}

}  // namespace seqcert
