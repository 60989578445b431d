#include "rows.hpp"

#include <cmath>

#include "seqcert/errors.hpp"

namespace seqcert {

bool is_exact_affine(NodeKind k) {
    switch (k) {
        case NodeKind::Affine:
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
        case NodeKind::Add:
            return true;
        default:
            return false;
    }
}

void solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n,
                 const std::string& ctx) {
    // Partial-pivot Gaussian elimination; fine for the tiny systems here.
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        if (std::fabs(a[piv * n + col]) < 1e-12)
            throw NumericalError("solve_dense: singular system (" + ctx + ")");
        if (piv != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[piv * n + k], a[col * n + k]);
            std::swap(b[piv], b[col]);
        }
        double d = a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r * n + col] / d;
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t k = ri + 1; k < n; ++k) s -= a[ri * n + k] * b[k];
        b[ri] = s / a[ri * n + ri];
    }
}

double tps_u(double r2) {
    return r2 > 0.0 ? r2 * std::log(r2) : 0.0;
}

namespace {

AffineRows tps_rows(const Network& net, const Node& n) {
    const Tensor& ctrl = n.gett("ctrl");
    std::size_t k = ctrl.dims[0];
    std::size_t oh = n.out_dims[1], ow = n.out_dims[2];
    std::size_t npts = oh * ow;
    std::size_t m = k + 3;

    auto cx = [&](std::size_t i) { return static_cast<double>(ctrl.data[2 * i]); };
    auto cy = [&](std::size_t i) { return static_cast<double>(ctrl.data[2 * i + 1]); };

    // Kernel system over the fiducials on the rectified grid.
    std::vector<double> delta(m * m, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double dx = cx(i) - cx(j), dy = cy(i) - cy(j);
            delta[i * m + j] = tps_u(dx * dx + dy * dy);
        }
        delta[i * m + k] = 1.0;
        delta[i * m + k + 1] = cx(i);
        delta[i * m + k + 2] = cy(i);
        delta[(k)*m + i] = 1.0;
        delta[(k + 1) * m + i] = cx(i);
        delta[(k + 2) * m + i] = cy(i);
    }

    AffineRows out;
    out.rows.resize(2 * npts);
    out.bias.assign(2 * npts, 0.0);

    // For each rectified grid point: solve delta * w = feature(p); only the
    // first K entries of w multiply fiducial coordinates, the affine tail
    // multiplies the zero padding rows.
    std::size_t kk = static_cast<std::size_t>(k);
    for (std::size_t gy = 0; gy < oh; ++gy) {
        for (std::size_t gx = 0; gx < ow; ++gx) {
            double px = ow > 1 ? static_cast<double>(gx) / static_cast<double>(ow - 1) : 0.5;
            double py = oh > 1 ? static_cast<double>(gy) / static_cast<double>(oh - 1) : 0.5;
            std::vector<double> f(m, 0.0);
            for (std::size_t i = 0; i < kk; ++i) {
                double dx = px - cx(i), dy = py - cy(i);
                f[i] = tps_u(dx * dx + dy * dy);
            }
            f[kk] = 1.0;
            f[kk + 1] = px;
            f[kk + 2] = py;
            std::vector<double> a = delta;
            solve_dense(a, f, m, "node '" + n.id + "'");

            std::size_t gi = gy * ow + gx;
            auto& rx = out.rows[gi];          // x-plane output
            auto& ry = out.rows[npts + gi];   // y-plane output
            for (std::size_t i = 0; i < kk; ++i) {
                double w = f[i];
                if (w == 0.0) continue;
                rx.push_back({0, static_cast<std::int32_t>(i), w});
                ry.push_back({0, static_cast<std::int32_t>(kk + i), w});
            }
        }
    }
    (void)net;
    return out;
}

}  // namespace

AffineRows exact_affine_rows(const Network& net, const Node& n) {
    AffineRows out;
    std::size_t width = n.width();
    auto in_node = [&](std::size_t slot) -> const Node& { return net.node(n.inputs.at(slot)); };

    switch (n.kind) {
        case NodeKind::Affine: {
            const Tensor& w = n.gett("weight");
            std::size_t rows = w.dims[0], cols = w.dims[1];
            const float* bias = n.hast("bias") ? n.gett("bias").data.data() : nullptr;
            out.rows.resize(rows);
            out.bias.assign(rows, 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                auto& row = out.rows[r];
                for (std::size_t c = 0; c < cols; ++c) {
                    double v = static_cast<double>(w.data[r * cols + c]);
                    if (v != 0.0) row.push_back({0, static_cast<std::int32_t>(c), v});
                }
                if (bias) out.bias[r] = static_cast<double>(bias[r]);
            }
            return out;
        }
        case NodeKind::Conv2d: {
            const auto& d = in_node(0).out_dims;  // [C,H,W]
            const Tensor& w = n.gett("weight");   // [OC,C,KH,KW]
            std::size_t C = d[0], H = d[1], W = d[2];
            std::size_t OC = w.dims[0], KH = w.dims[2], KW = w.dims[3];
            std::size_t OH = n.out_dims[1], OW = n.out_dims[2];
            std::int64_t sh = n.geti("sh", 1), sw = n.geti("sw", 1);
            std::int64_t ph = n.geti("ph", 0), pw = n.geti("pw", 0);
            const float* bias = n.hast("bias") ? n.gett("bias").data.data() : nullptr;
            out.rows.resize(OC * OH * OW);
            out.bias.assign(OC * OH * OW, 0.0);
            for (std::size_t oc = 0; oc < OC; ++oc)
                for (std::size_t oy = 0; oy < OH; ++oy)
                    for (std::size_t ox = 0; ox < OW; ++ox) {
                        std::size_t o = (oc * OH + oy) * OW + ox;
                        auto& row = out.rows[o];
                        for (std::size_t c = 0; c < C; ++c)
                            for (std::size_t ky = 0; ky < KH; ++ky)
                                for (std::size_t kx = 0; kx < KW; ++kx) {
                                    std::int64_t iy = static_cast<std::int64_t>(oy) * sh +
                                                      static_cast<std::int64_t>(ky) - ph;
                                    std::int64_t ix = static_cast<std::int64_t>(ox) * sw +
                                                      static_cast<std::int64_t>(kx) - pw;
                                    if (iy < 0 || ix < 0 || iy >= static_cast<std::int64_t>(H) ||
                                        ix >= static_cast<std::int64_t>(W))
                                        continue;
                                    double v = static_cast<double>(
                                        w.data[((oc * C + c) * KH + ky) * KW + kx]);
                                    if (v == 0.0) continue;
                                    row.push_back({0,
                                                   static_cast<std::int32_t>(
                                                       (c * H + static_cast<std::size_t>(iy)) * W +
                                                       static_cast<std::size_t>(ix)),
                                                   v});
                                }
                        if (bias) out.bias[o] = static_cast<double>(bias[oc]);
                    }
            return out;
        }
        case NodeKind::BatchNorm: {
            const auto& d = in_node(0).out_dims;
            std::size_t C = d[0], inner = width / C;
            const Tensor& g = n.gett("gamma");
            const Tensor& b = n.gett("beta");
            const Tensor& mu = n.gett("mean");
            const Tensor& var = n.gett("var");
            double eps = n.getf("eps", 1e-5);
            out.rows.resize(width);
            out.bias.assign(width, 0.0);
            for (std::size_t c = 0; c < C; ++c) {
                double scale = static_cast<double>(g.data[c]) /
                               std::sqrt(static_cast<double>(var.data[c]) + eps);
                double shift = static_cast<double>(b.data[c]) -
                               scale * static_cast<double>(mu.data[c]);
                for (std::size_t i = 0; i < inner; ++i) {
                    std::size_t o = c * inner + i;
                    out.rows[o].push_back({0, static_cast<std::int32_t>(o), scale});
                    out.bias[o] = shift;
                }
            }
            return out;
        }
        case NodeKind::AvgPool: {
            const auto& d = in_node(0).out_dims;
            std::size_t C = d[0], H = d[1], W = d[2];
            std::size_t OH = n.out_dims[1], OW = n.out_dims[2];
            std::int64_t kh = n.geti("kh"), kw = n.geti("kw");
            std::int64_t sh = n.geti("sh", kh), sw = n.geti("sw", kw);
            double inv = 1.0 / static_cast<double>(kh * kw);
            out.rows.resize(width);
            out.bias.assign(width, 0.0);
            for (std::size_t c = 0; c < C; ++c)
                for (std::size_t oy = 0; oy < OH; ++oy)
                    for (std::size_t ox = 0; ox < OW; ++ox) {
                        auto& row = out.rows[(c * OH + oy) * OW + ox];
                        for (std::int64_t ky = 0; ky < kh; ++ky)
                            for (std::int64_t kx = 0; kx < kw; ++kx) {
                                std::size_t iy = oy * static_cast<std::size_t>(sh) +
                                                 static_cast<std::size_t>(ky);
                                std::size_t ix = ox * static_cast<std::size_t>(sw) +
                                                 static_cast<std::size_t>(kx);
                                row.push_back(
                                    {0, static_cast<std::int32_t>((c * H + iy) * W + ix), inv});
                            }
                    }
            return out;
        }
        case NodeKind::Normalization: {
            std::size_t g = static_cast<std::size_t>(
                n.geti("group", static_cast<std::int64_t>(width)));
            out.rows.resize(width);
            out.bias.assign(width, 0.0);
            double inv = 1.0 / static_cast<double>(g);
            for (std::size_t base = 0; base < width; base += g)
                for (std::size_t i = 0; i < g; ++i) {
                    auto& row = out.rows[base + i];
                    for (std::size_t j = 0; j < g; ++j) {
                        double c = (i == j ? 1.0 : 0.0) - inv;
                        if (c != 0.0)
                            row.push_back({0, static_cast<std::int32_t>(base + j), c});
                    }
                }
            return out;
        }
        case NodeKind::PosEnc: {
            const Tensor& t = n.gett("table");
            out.rows.resize(width);
            out.bias.assign(width, 0.0);
            for (std::size_t i = 0; i < width; ++i) {
                out.rows[i].push_back({0, static_cast<std::int32_t>(i), 1.0});
                out.bias[i] = static_cast<double>(t.data[i]);
            }
            return out;
        }
        case NodeKind::PatchEmbed: {
            const auto& d = in_node(0).out_dims;  // [C,H,W]
            std::size_t C = d[0], H = d[1], W = d[2];
            std::size_t P = static_cast<std::size_t>(n.geti("patch"));
            const Tensor& w = n.gett("weight");  // [P*P*C, D]
            std::size_t D = w.dims[1];
            std::size_t TY = H / P, TX = W / P;
            const float* bias = n.hast("bias") ? n.gett("bias").data.data() : nullptr;
            out.rows.resize(width);
            out.bias.assign(width, 0.0);
            for (std::size_t ty = 0; ty < TY; ++ty)
                for (std::size_t tx = 0; tx < TX; ++tx)
                    for (std::size_t dd = 0; dd < D; ++dd) {
                        std::size_t o = (ty * TX + tx) * D + dd;
                        auto& row = out.rows[o];
                        for (std::size_t c = 0; c < C; ++c)
                            for (std::size_t py = 0; py < P; ++py)
                                for (std::size_t px = 0; px < P; ++px) {
                                    double v = static_cast<double>(
                                        w.data[((c * P + py) * P + px) * D + dd]);
                                    if (v == 0.0) continue;
                                    std::size_t iy = ty * P + py, ix = tx * P + px;
                                    row.push_back(
                                        {0, static_cast<std::int32_t>((c * H + iy) * W + ix), v});
                                }
                        if (bias) out.bias[o] = static_cast<double>(bias[dd]);
                    }
            return out;
        }
        case NodeKind::TpsGrid:
            return tps_rows(net, n);
        case NodeKind::Reshape: {
            out.rows.resize(width);
            out.bias.assign(width, 0.0);
            if (n.hasil("perm")) {
                const auto& p = n.getil("perm");
                for (std::size_t i = 0; i < width; ++i)
                    out.rows[i].push_back({0, static_cast<std::int32_t>(p[i]), 1.0});
            } else {
                for (std::size_t i = 0; i < width; ++i)
                    out.rows[i].push_back({0, static_cast<std::int32_t>(i), 1.0});
            }
            return out;
        }
        case NodeKind::Slice: {
            std::int64_t off = n.geti("offset");
            out.rows.resize(width);
            out.bias.assign(width, 0.0);
            for (std::size_t i = 0; i < width; ++i)
                out.rows[i].push_back({0, static_cast<std::int32_t>(off + static_cast<std::int64_t>(i)), 1.0});
            return out;
        }
        case NodeKind::Concat: {
            out.rows.resize(width);
            out.bias.assign(width, 0.0);
            std::size_t o = 0;
            for (std::size_t s = 0; s < n.inputs.size(); ++s) {
                std::size_t iw = in_node(s).width();
                for (std::size_t i = 0; i < iw; ++i, ++o)
                    out.rows[o].push_back(
                        {static_cast<std::int32_t>(s), static_cast<std::int32_t>(i), 1.0});
            }
            return out;
        }
        case NodeKind::Add: {
            out.rows.resize(width);
            out.bias.assign(width, 0.0);
            for (std::size_t i = 0; i < width; ++i)
                for (std::size_t s = 0; s < n.inputs.size(); ++s)
                    out.rows[i].push_back(
                        {static_cast<std::int32_t>(s), static_cast<std::int32_t>(i), 1.0});
            return out;
        }
        default:
            throw KindError(std::string("exact_affine_rows: node '") + n.id + "' has kind " +
                            kind_name(n.kind) + " which is not exact-affine");
    }
}

}  // namespace seqcert
