#include "prop_internal.hpp"
#include "seqcert/errors.hpp"

namespace seqcert::prop {

LstmLayers add_lstm_cell(Ctx& cx, const std::string& prefix, const LstmWires& w,
                         const float* weight, std::size_t cols, const std::vector<double>& bias,
                         std::size_t hidden) {
    if (bias.size() != 4 * hidden) throw SizeError("add_lstm_cell: bias must have 4*hidden rows");
    cx.check_deadline();

    // Gate pre-activations, rows ordered input, forget, candidate, output.
    AffineRows g;
    g.rows.resize(4 * hidden);
    g.bias = bias;
    std::vector<int> slots{w.x_layer};
    if (w.h_layer >= 0) slots.push_back(w.h_layer);
    for (std::size_t r = 0; r < 4 * hidden; ++r) {
        const float* row = weight + r * cols;
        for (std::size_t k = 0; k < w.x_cnt; ++k) {
            double c = static_cast<double>(row[k]);
            if (c != 0.0)
                g.rows[r].push_back({0, static_cast<std::int32_t>(w.x_off + k), c});
        }
        if (w.h_layer >= 0)
            for (std::size_t k = 0; k < hidden; ++k) {
                double c = static_cast<double>(row[cols - hidden + k]);
                if (c != 0.0)
                    g.rows[r].push_back({1, static_cast<std::int32_t>(w.h_off + k), c});
            }
    }
    int lg = add_affine_layer(cx, prefix + "#g", g, slots);

    int lfc;
    if (w.c_layer < 0) {
        lfc = add_const_layer(cx, prefix + "#fc", std::vector<double>(hidden, 0.0));
    } else {
        std::vector<MulPair> pairs(hidden);
        for (std::size_t i = 0; i < hidden; ++i) {
            pairs[i].a = {lg, static_cast<std::int32_t>(hidden + i)};
            pairs[i].b = {w.c_layer, static_cast<std::int32_t>(w.c_off + i)};
        }
        lfc = add_surface_layer(cx, prefix + "#fc", SurfaceKind::SigLinear, pairs);
    }

    std::vector<MulPair> icp(hidden);
    for (std::size_t i = 0; i < hidden; ++i) {
        icp[i].a = {lg, static_cast<std::int32_t>(i)};
        icp[i].b = {lg, static_cast<std::int32_t>(2 * hidden + i)};
    }
    int lic = add_surface_layer(cx, prefix + "#ic", SurfaceKind::SigTanh, icp);

    AffineRows addc;
    addc.rows.resize(hidden);
    addc.bias.assign(hidden, 0.0);
    for (std::size_t i = 0; i < hidden; ++i) {
        addc.rows[i].push_back({0, static_cast<std::int32_t>(i), 1.0});
        addc.rows[i].push_back({1, static_cast<std::int32_t>(i), 1.0});
    }
    int lc = add_affine_layer(cx, prefix + "#c", addc, {lfc, lic});

    std::vector<MulPair> hp(hidden);
    for (std::size_t i = 0; i < hidden; ++i) {
        hp[i].a = {lg, static_cast<std::int32_t>(3 * hidden + i)};
        hp[i].b = {lc, static_cast<std::int32_t>(i)};
    }
    int lh = add_surface_layer(cx, prefix + "#h", SurfaceKind::SigTanh, hp);
    return {lh, lc};
}

void add_lstm_node(Ctx& cx, const Node& n) {
    std::size_t hidden = static_cast<std::size_t>(n.geti("hidden"));
    const Tensor& weight = n.gett("weight");
    std::size_t cols = weight.dims[1];
    const Tensor& bias = n.gett("bias");

    LstmWires w;
    w.x_layer = cx.layer_of(n.inputs[0]);
    w.x_off = 0;
    w.x_cnt = cols - hidden;
    if (n.inputs.size() == 2) {
        int prev = cx.layer_of(n.inputs[1]);
        w.h_layer = prev;
        w.h_off = 0;
        w.c_layer = prev;
        w.c_off = hidden;
    }

    std::vector<double> b(bias.data.begin(), bias.data.end());
    LstmLayers hc = add_lstm_cell(cx, n.id, w, weight.data.data(), cols, b, hidden);

    // Node value is [h; c].
    AffineRows cat;
    cat.rows.resize(2 * hidden);
    cat.bias.assign(2 * hidden, 0.0);
    for (std::size_t i = 0; i < hidden; ++i) {
        cat.rows[i].push_back({0, static_cast<std::int32_t>(i), 1.0});
        cat.rows[hidden + i].push_back({1, static_cast<std::int32_t>(i), 1.0});
    }
    add_affine_layer(cx, n.id, cat, {hc.h, hc.c});
}

}  // namespace seqcert::prop
