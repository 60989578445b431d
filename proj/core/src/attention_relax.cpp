#include <cmath>

#include "prop_internal.hpp"
#include "seqcert/errors.hpp"

namespace seqcert::prop {

namespace {

// Per-token dense projection rows: out[t,d] = sum_e w[d,e] in[t,e] + b[d].
AffineRows token_proj_rows(const Tensor& w, const float* b, std::size_t T) {
    std::size_t rows = w.dims[0], cols = w.dims[1];
    AffineRows out;
    out.rows.resize(T * rows);
    out.bias.assign(T * rows, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t d = 0; d < rows; ++d) {
            std::size_t o = t * rows + d;
            for (std::size_t e = 0; e < cols; ++e) {
                double c = static_cast<double>(w.data[d * cols + e]);
                if (c != 0.0)
                    out.rows[o].push_back({0, static_cast<std::int32_t>(t * cols + e), c});
            }
            if (b) out.bias[o] = static_cast<double>(b[d]);
        }
    return out;
}

AffineRows add_rows(std::size_t width) {
    AffineRows out;
    out.rows.resize(width);
    out.bias.assign(width, 0.0);
    for (std::size_t i = 0; i < width; ++i) {
        out.rows[i].push_back({0, static_cast<std::int32_t>(i), 1.0});
        out.rows[i].push_back({1, static_cast<std::int32_t>(i), 1.0});
    }
    return out;
}

}  // namespace

void add_attention_block(Ctx& cx, const Node& n, int src) {
    std::size_t T = n.out_dims[0], D = n.out_dims[1];
    std::size_t heads = static_cast<std::size_t>(n.geti("heads", 1));
    std::size_t dh = D / heads;
    double eps = n.getf("eps", 1e-5);
    double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    int ln1 = add_layernorm_chain(cx, n.id + "#ln1", src, D, eps, n.gett("ln1_g").data.data(),
                                  n.gett("ln1_b").data.data());

    int lq = add_affine_layer(cx, n.id + "#q",
                              token_proj_rows(n.gett("wq"), n.gett("bq").data.data(), T), {ln1});
    int lk = add_affine_layer(cx, n.id + "#k",
                              token_proj_rows(n.gett("wk"), n.gett("bk").data.data(), T), {ln1});
    int lv = add_affine_layer(cx, n.id + "#v",
                              token_proj_rows(n.gett("wv"), n.gett("bv").data.data(), T), {ln1});
    cx.check_deadline();

    std::vector<MulPair> qk(heads * T * T * dh);
    for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t i = 0; i < T; ++i)
            for (std::size_t j = 0; j < T; ++j)
                for (std::size_t d = 0; d < dh; ++d) {
                    MulPair& mp = qk[((h * T + i) * T + j) * dh + d];
                    mp.a = {lq, static_cast<std::int32_t>(i * D + h * dh + d)};
                    mp.b = {lk, static_cast<std::int32_t>(j * D + h * dh + d)};
                }
    int lqk = add_mul_layer(cx, n.id + "#qk", qk);

    AffineRows sc;
    sc.rows.resize(heads * T * T);
    sc.bias.assign(heads * T * T, 0.0);
    for (std::size_t r = 0; r < sc.rows.size(); ++r)
        for (std::size_t d = 0; d < dh; ++d)
            sc.rows[r].push_back({0, static_cast<std::int32_t>(r * dh + d), scale});
    int lsc = add_affine_layer(cx, n.id + "#sc", sc, {lqk});
    cx.check_deadline();

    int lsm = add_softmax_chain(cx, n.id + "#sm", lsc, T);

    std::vector<MulPair> av(heads * T * T * dh);
    for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t i = 0; i < T; ++i)
            for (std::size_t j = 0; j < T; ++j)
                for (std::size_t d = 0; d < dh; ++d) {
                    MulPair& mp = av[((h * T + i) * T + j) * dh + d];
                    mp.a = {lsm, static_cast<std::int32_t>((h * T + i) * T + j)};
                    mp.b = {lv, static_cast<std::int32_t>(j * D + h * dh + d)};
                }
    int lav = add_mul_layer(cx, n.id + "#av", av);

    AffineRows ctxr;
    ctxr.rows.resize(T * D);
    ctxr.bias.assign(T * D, 0.0);
    for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t i = 0; i < T; ++i)
            for (std::size_t d = 0; d < dh; ++d) {
                std::size_t o = i * D + h * dh + d;
                for (std::size_t j = 0; j < T; ++j)
                    ctxr.rows[o].push_back(
                        {0, static_cast<std::int32_t>(((h * T + i) * T + j) * dh + d), 1.0});
            }
    int lctx = add_affine_layer(cx, n.id + "#ctx", ctxr, {lav});
    cx.check_deadline();

    int lproj = add_affine_layer(cx, n.id + "#proj",
                                 token_proj_rows(n.gett("wo"), n.gett("bo").data.data(), T),
                                 {lctx});
    int lres1 = add_affine_layer(cx, n.id + "#res1", add_rows(T * D), {src, lproj});

    int ln2 = add_layernorm_chain(cx, n.id + "#ln2", lres1, D, eps, n.gett("ln2_g").data.data(),
                                  n.gett("ln2_b").data.data());

    int lm0 = add_affine_layer(cx, n.id + "#mlp0",
                               token_proj_rows(n.gett("mlp0_w"), n.gett("mlp0_b").data.data(), T),
                               {ln2});
    int lm0r = add_scalar_layer(cx, n.id + "#mlp0r", lm0, &relu_relax);
    int lm1 = add_affine_layer(cx, n.id + "#mlp1",
                               token_proj_rows(n.gett("mlp1_w"), n.gett("mlp1_b").data.data(), T),
                               {lm0r});

    add_affine_layer(cx, n.id, add_rows(T * D), {lres1, lm1});
}

}  // namespace seqcert::prop
