#include "prop_internal.hpp"
#include "seqcert/errors.hpp"

namespace seqcert::prop {

namespace {

// Hat responses of every sampling point against one pixel axis: width npts
// per coordinate run. Outer spans come back as pinned zeros, which the mul
// layers then collapse, so far-away pixels cost nothing downstream.
int add_hat_layer(Ctx& cx, const std::string& id, int grid, std::size_t coord_off,
                  std::size_t npts, std::size_t extent) {
    const LayerBounds& G = cx.st.layers[static_cast<std::size_t>(grid)];
    LayerBounds lay;
    lay.id = id;
    lay.width = npts * extent;
    lay.lo.resize(lay.width);
    lay.hi.resize(lay.width);
    lay.lb.assign(lay.width, 0.0);
    lay.ub.assign(lay.width, 0.0);
    for (std::size_t i = 0; i < npts; ++i) {
        double gl = G.lb[coord_off + i], gu = G.ub[coord_off + i];
        for (std::size_t m = 0; m < extent; ++m) {
            std::size_t o = i * extent + m;
            ScalarRelaxation r = hat_relax(gl, gu, static_cast<double>(m));
            lay.lo[o] = LinExpr::single(static_cast<std::int32_t>(grid),
                                        static_cast<std::int32_t>(coord_off + i), r.lo_slope,
                                        r.lo_bias);
            lay.hi[o] = LinExpr::single(static_cast<std::int32_t>(grid),
                                        static_cast<std::int32_t>(coord_off + i), r.hi_slope,
                                        r.hi_bias);
            lay.lb[o] = r.lb;
            lay.ub[o] = r.ub;
        }
    }
    return cx.st.add_layer(std::move(lay));
}

}  // namespace

void add_bilinear_sample(Ctx& cx, const Node& n, int grid, int image) {
    const auto& gd = cx.net.node(n.inputs[0]).out_dims;  // [2, oh, ow]
    const auto& id = cx.net.node(n.inputs[1]).out_dims;  // [C, H, W]
    std::size_t npts = Tensor::count(gd) / 2;
    std::size_t C = id[0], H = id[1], W = id[2];
    cx.check_deadline();

    int lrx = add_hat_layer(cx, n.id + "#rx", grid, 0, npts, W);
    int lry = add_hat_layer(cx, n.id + "#ry", grid, npts, npts, H);

    std::vector<MulPair> rr(npts * H * W);
    for (std::size_t i = 0; i < npts; ++i)
        for (std::size_t nn = 0; nn < H; ++nn)
            for (std::size_t m = 0; m < W; ++m) {
                MulPair& mp = rr[(i * H + nn) * W + m];
                mp.a = {lrx, static_cast<std::int32_t>(i * W + m)};
                mp.b = {lry, static_cast<std::int32_t>(i * H + nn)};
            }
    int lrr = add_mul_layer(cx, n.id + "#rr", rr);
    cx.check_deadline();

    std::vector<MulPair> ri(C * npts * H * W);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < npts; ++i)
            for (std::size_t nn = 0; nn < H; ++nn)
                for (std::size_t m = 0; m < W; ++m) {
                    MulPair& mp = ri[((c * npts + i) * H + nn) * W + m];
                    mp.a = {lrr, static_cast<std::int32_t>((i * H + nn) * W + m)};
                    mp.b = {image, static_cast<std::int32_t>((c * H + nn) * W + m)};
                }
    int lri = add_mul_layer(cx, n.id + "#ri", ri);

    AffineRows sum;
    sum.rows.resize(C * npts);
    sum.bias.assign(C * npts, 0.0);
    for (std::size_t o = 0; o < C * npts; ++o) {
        for (std::size_t k = 0; k < H * W; ++k) {
            // Skip terms whose hat product is pinned to zero.
            std::size_t src = o * H * W + k;
            const LayerBounds& R = cx.st.layers[static_cast<std::size_t>(lri)];
            if (R.lb[src] == 0.0 && R.ub[src] == 0.0 && R.lo[src].terms.empty()) continue;
            sum.rows[o].push_back({0, static_cast<std::int32_t>(src), 1.0});
        }
    }
    add_affine_layer(cx, n.id, sum, {lri});
}

}  // namespace seqcert::prop
