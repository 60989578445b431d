#include "seqcert/plane_fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "seqcert/errors.hpp"
#include "seqcert/propagate.hpp"
#include "seqcert/relax_scalar.hpp"

namespace seqcert {

double unit_uniform(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

std::uint64_t mix_seed(std::uint64_t seed, const void* bytes, std::size_t n) {
    std::uint64_t h = 1469598103934665603ull ^ seed;
    const unsigned char* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

double surface_eval(SurfaceKind kind, double x, double y) {
    switch (kind) {
        case SurfaceKind::SigTanh:
            return sigmoid(x) * std::tanh(y);
        case SurfaceKind::SigLinear:
            return sigmoid(x) * y;
        case SurfaceKind::Div:
            return x / y;
    }
    return 0.0;
}

// ---- dense tableau simplex -------------------------------------------------

std::vector<double> simplex_maximize(const std::vector<std::vector<double>>& A,
                                     const std::vector<double>& b,
                                     const std::vector<double>& c) {
    std::size_t m = A.size(), k = c.size();
    if (b.size() != m) throw LpError("simplex_maximize: rhs size mismatch");
    for (double bi : b)
        if (bi < 0.0) throw LpError("simplex_maximize: negative rhs not supported");

    // Free variables split into +/- parts, then slack columns.
    std::size_t cols = 2 * k + m;
    std::vector<std::vector<double>> T(m, std::vector<double>(cols, 0.0));
    std::vector<double> rhs = b, red(cols, 0.0);
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (A[i].size() != k) throw LpError("simplex_maximize: row size mismatch");
        for (std::size_t j = 0; j < k; ++j) {
            T[i][j] = A[i][j];
            T[i][k + j] = -A[i][j];
        }
        T[i][2 * k + i] = 1.0;
        basis[i] = 2 * k + i;
    }
    for (std::size_t j = 0; j < k; ++j) {
        red[j] = c[j];
        red[k + j] = -c[j];
    }

    const double tol = 1e-9;
    for (int iter = 0; iter < 20000; ++iter) {
        // Bland's rule: smallest improving column, smallest basis var on ties.
        std::size_t enter = cols;
        for (std::size_t j = 0; j < cols; ++j)
            if (red[j] > tol) {
                enter = j;
                break;
            }
        if (enter == cols) {
            std::vector<double> v(k, 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                if (basis[i] < k)
                    v[basis[i]] += rhs[i];
                else if (basis[i] < 2 * k)
                    v[basis[i] - k] -= rhs[i];
            }
            return v;
        }
        std::size_t leave = m;
        double best = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (T[i][enter] <= tol) continue;
            double ratio = rhs[i] / T[i][enter];
            if (leave == m || ratio < best - 1e-15 ||
                (std::fabs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave == m) throw LpError("simplex_maximize: objective unbounded");

        double piv = T[leave][enter];
        for (std::size_t j = 0; j < cols; ++j) T[leave][j] /= piv;
        rhs[leave] /= piv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == leave) continue;
            double f = T[i][enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) T[i][j] -= f * T[leave][j];
            rhs[i] -= f * rhs[leave];
            if (rhs[i] < 0.0 && rhs[i] > -1e-12) rhs[i] = 0.0;
        }
        double f = red[enter];
        for (std::size_t j = 0; j < cols; ++j) red[j] -= f * T[leave][j];
        basis[leave] = enter;
    }
    throw LpError("simplex_maximize: iteration limit reached");
}

// ---- lower-plane fit ---------------------------------------------------------

namespace {

double logit(double s) {
    return std::log(s / (1.0 - s));
}

struct Candidates {
    std::vector<double> xs, ys;
    void push(double x, double y, const Box2& b) {
        // Clamp instead of reject: a clamped candidate is still a box point.
        xs.push_back(std::clamp(x, b.lx, b.ux));
        ys.push_back(std::clamp(y, b.ly, b.uy));
    }
};

// Real roots of the interior stationarity quartic for sigma(x)*tanh(y),
//   s^4 - (2+b)s^3 + (1+2b)s^2 - b*s - a^2 = 0,  s in (0,1),
// found by sign bracketing on a fine grid plus bisection. Near-tangential
// roots are caught by polishing grid points where |f| dips close to zero.
void sigtanh_quartic_roots(double a, double b, int grid, std::vector<double>& out) {
    auto f = [&](double s) {
        return ((s - (2.0 + b)) * s + (1.0 + 2.0 * b)) * s * s - b * s - a * a;
    };
    auto df = [&](double s) {
        return ((4.0 * s - 3.0 * (2.0 + b)) * s + 2.0 * (1.0 + 2.0 * b)) * s - b;
    };
    double scale = 1.0 + std::fabs(a) + std::fabs(b);
    double prev_s = 1e-9, prev_f = f(prev_s);
    for (int i = 1; i <= grid; ++i) {
        double s = static_cast<double>(i) / static_cast<double>(grid);
        if (i == grid) s = 1.0 - 1e-9;
        double fs = f(s);
        if (prev_f == 0.0) out.push_back(prev_s);
        if (prev_f * fs < 0.0) {
            double lo = prev_s, hi = s;
            for (int it = 0; it < 60; ++it) {
                double mid = 0.5 * (lo + hi);
                (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
            }
            out.push_back(0.5 * (lo + hi));
        } else if (std::fabs(fs) < 1e-8 * scale) {
            double s2 = s;
            for (int it = 0; it < 6; ++it) {
                double d = df(s2);
                if (std::fabs(d) < 1e-14) break;
                s2 -= f(s2) / d;
            }
            if (s2 > 0.0 && s2 < 1.0 && std::fabs(f(s2)) < 1e-12 * scale) out.push_back(s2);
        }
        prev_s = s;
        prev_f = fs;
    }
}

// All points where surface - plane can attain its minimum: corners, edge
// stationary points, interior stationary points, midpoint for good measure.
Candidates gap_candidates(SurfaceKind kind, const Box2& bx, const Plane& p,
                          const McLpConfig& cfg) {
    Candidates c;
    c.push(bx.lx, bx.ly, bx);
    c.push(bx.lx, bx.uy, bx);
    c.push(bx.ux, bx.ly, bx);
    c.push(bx.ux, bx.uy, bx);
    c.push(0.5 * (bx.lx + bx.ux), 0.5 * (bx.ly + bx.uy), bx);

    double a = p.a, b = p.b;
    switch (kind) {
        case SurfaceKind::SigTanh: {
            for (double x0 : {bx.lx, bx.ux}) {  // d/dy: sigma(x0)(1 - tanh^2 y) = b
                double s = sigmoid(x0);
                double t2 = 1.0 - b / s;
                if (b > 0.0 && t2 >= 0.0 && t2 < 1.0) {
                    double y = std::atanh(std::sqrt(t2));
                    c.push(x0, y, bx);
                    c.push(x0, -y, bx);
                }
            }
            for (double y0 : {bx.ly, bx.uy}) {  // d/dx: s(1-s) tanh(y0) = a
                double t = std::tanh(y0);
                if (t == 0.0) continue;
                double q = a / t;
                if (q > 0.0 && q <= 0.25) {
                    double rad = std::sqrt(0.25 - q);
                    for (double s : {0.5 + rad, 0.5 - rad})
                        if (s > 0.0 && s < 1.0) c.push(logit(s), y0, bx);
                }
            }
            if (a == 0.0) {
                if (b > 0.0 && b < 1.0) c.push(logit(b), 0.0, bx);
            } else {
                std::vector<double> roots;
                sigtanh_quartic_roots(a, b, cfg.quartic_grid, roots);
                for (double s : roots) {
                    double t = a / (s * (1.0 - s));
                    if (std::fabs(t) < 1.0) c.push(logit(s), std::atanh(t), bx);
                }
            }
            break;
        }
        case SurfaceKind::SigLinear: {
            for (double y0 : {bx.ly, bx.uy}) {  // d/dx: s(1-s) y0 = a
                if (y0 == 0.0) continue;
                double q = a / y0;
                if (q > 0.0 && q <= 0.25) {
                    double rad = std::sqrt(0.25 - q);
                    for (double s : {0.5 + rad, 0.5 - rad})
                        if (s > 0.0 && s < 1.0) c.push(logit(s), y0, bx);
                }
            }
            if (b > 0.0 && b < 1.0)  // interior: sigma(x)=b, s(1-s)y=a
                c.push(logit(b), a / (b * (1.0 - b)), bx);
            break;
        }
        case SurfaceKind::Div: {
            for (double x0 : {bx.lx, bx.ux}) {  // d/dy: -x0/y^2 = b
                if (b == 0.0 || x0 / b > 0.0) continue;
                c.push(x0, std::sqrt(-x0 / b), bx);
            }
            if (a > 0.0) {  // interior: 1/y = a, -x/y^2 = b
                double y = 1.0 / a;
                c.push(-b * y * y, y, bx);
            }
            break;
        }
    }
    return c;
}

Plane scaled_1d(SurfaceKind kind, const Box2& bx, double slack) {
    double wx = bx.ux - bx.lx, wy = bx.uy - bx.ly;
    double x0 = 0.5 * (bx.lx + bx.ux), y0 = 0.5 * (bx.ly + bx.uy);
    Plane p;
    if (wx <= 1e-12 && wy <= 1e-12) {
        p = {0.0, 0.0, surface_eval(kind, x0, y0)};
    } else if (wx <= 1e-12) {
        // curve in y scaled by a constant factor k(x0)
        switch (kind) {
            case SurfaceKind::SigTanh: {
                double k = sigmoid(x0);
                ScalarRelaxation r = tanh_relax(bx.ly, bx.uy);
                p = {0.0, k * r.lo_slope, k * r.lo_bias};
                break;
            }
            case SurfaceKind::SigLinear:
                p = {0.0, sigmoid(x0), 0.0};
                break;
            case SurfaceKind::Div: {
                ScalarRelaxation r = reciprocal_relax(bx.ly, bx.uy);
                p = (x0 >= 0.0) ? Plane{0.0, x0 * r.lo_slope, x0 * r.lo_bias}
                                : Plane{0.0, x0 * r.hi_slope, x0 * r.hi_bias};
                break;
            }
        }
    } else {
        switch (kind) {
            case SurfaceKind::SigTanh: {
                double k = std::tanh(y0);
                ScalarRelaxation r = sigmoid_relax(bx.lx, bx.ux);
                p = (k >= 0.0) ? Plane{k * r.lo_slope, 0.0, k * r.lo_bias}
                               : Plane{k * r.hi_slope, 0.0, k * r.hi_bias};
                break;
            }
            case SurfaceKind::SigLinear: {
                ScalarRelaxation r = sigmoid_relax(bx.lx, bx.ux);
                p = (y0 >= 0.0) ? Plane{y0 * r.lo_slope, 0.0, y0 * r.lo_bias}
                                : Plane{y0 * r.hi_slope, 0.0, y0 * r.hi_bias};
                break;
            }
            case SurfaceKind::Div:
                p = {1.0 / y0, 0.0, 0.0};
                break;
        }
    }
    // The midpoint stands in for a sliver of width <= 1e-12; the slack
    // absorbs the drift (surface slopes here are O(1/ly^2) at worst).
    p.c -= slack;
    return p;
}

}  // namespace

Plane fit_lower_plane(SurfaceKind kind, const Box2& bx, const McLpConfig& cfg) {
    if (!(bx.lx <= bx.ux) || !(bx.ly <= bx.uy))
        throw DomainError("fit_lower_plane: box endpoints out of order");
    if (kind == SurfaceKind::Div && bx.ly <= 0.0)
        throw DomainError("fit_lower_plane: division needs a positive denominator interval");

    double wx = bx.ux - bx.lx, wy = bx.uy - bx.ly;
    if (wx <= 1e-12 || wy <= 1e-12) return scaled_1d(kind, bx, cfg.slack);

    // Sampled LP: plane below every sample, total gap minimized.
    std::uint64_t rng = cfg.seed;
    int n = std::max(cfg.samples, 8);
    std::vector<std::vector<double>> A(static_cast<std::size_t>(n));
    std::vector<double> rhs(static_cast<std::size_t>(n));
    double sx = 0.0, sy = 0.0, hmin = HUGE_VAL;
    std::vector<double> px(static_cast<std::size_t>(n)), py(static_cast<std::size_t>(n)),
        ph(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x, y;
        switch (i) {  // pin the corners so the fit sees the full spread
            case 0: x = bx.lx, y = bx.ly; break;
            case 1: x = bx.lx, y = bx.uy; break;
            case 2: x = bx.ux, y = bx.ly; break;
            case 3: x = bx.ux, y = bx.uy; break;
            default:
                x = bx.lx + wx * unit_uniform(rng);
                y = bx.ly + wy * unit_uniform(rng);
        }
        std::size_t k = static_cast<std::size_t>(i);
        px[k] = x;
        py[k] = y;
        ph[k] = surface_eval(kind, x, y);
        hmin = std::min(hmin, ph[k]);
        sx += x;
        sy += y;
    }

    Plane plane;
    try {
        for (int i = 0; i < n; ++i) {
            std::size_t k = static_cast<std::size_t>(i);
            A[k] = {px[k], py[k], 1.0};
            rhs[k] = ph[k] - hmin;  // shift so the slack basis starts feasible
        }
        std::vector<double> v =
            simplex_maximize(A, rhs, {sx, sy, static_cast<double>(n)});
        plane = {v[0], v[1], v[2] + hmin};
    } catch (const LpError&) {
        // All three surfaces are monotone in each argument separately, so
        // their box minimum sits at a corner; a constant plane there is sound.
        double m = HUGE_VAL;
        for (double x : {bx.lx, bx.ux})
            for (double y : {bx.ly, bx.uy}) m = std::min(m, surface_eval(kind, x, y));
        return {0.0, 0.0, m - cfg.slack};
    }

    // Exact soundness offset: minimum of surface - plane over the box is at
    // a corner, an edge stationary point, or an interior stationary point.
    Candidates cand = gap_candidates(kind, bx, plane, cfg);
    double delta = HUGE_VAL;
    for (std::size_t i = 0; i < cand.xs.size(); ++i)
        delta = std::min(delta,
                         surface_eval(kind, cand.xs[i], cand.ys[i]) -
                             plane.eval(cand.xs[i], cand.ys[i]));
    plane.c += delta;

    // Defensive grid recheck; only ever pushes the plane further down.
    int g = std::max(8, static_cast<int>(std::sqrt(static_cast<double>(std::max(cfg.grid, 64)))));
    double worst = 0.0;
    for (int i = 0; i <= g; ++i)
        for (int j = 0; j <= g; ++j) {
            double x = bx.lx + wx * static_cast<double>(i) / static_cast<double>(g);
            double y = bx.ly + wy * static_cast<double>(j) / static_cast<double>(g);
            worst = std::min(worst, surface_eval(kind, x, y) - plane.eval(x, y));
        }
    plane.c += worst;

    plane.c -= cfg.slack;
    return plane;
}

PlanePair surface_relax(SurfaceKind kind, const Box2& bx, const McLpConfig& cfg) {
    PlanePair out;
    out.lo = fit_lower_plane(kind, bx, cfg);

    if (kind == SurfaceKind::Div) {
        // x/y is odd in x: upper plane comes from the lower plane of the
        // x-reflected box.
        Box2 rb{-bx.ux, -bx.lx, bx.ly, bx.uy};
        Plane q = fit_lower_plane(kind, rb, cfg);
        out.hi = {q.a, -q.b, -q.c};
    } else {
        // sigma(x)*tanh(y) and sigma(x)*y are odd in y.
        Box2 rb{bx.lx, bx.ux, -bx.uy, -bx.ly};
        Plane q = fit_lower_plane(kind, rb, cfg);
        out.hi = {-q.a, q.b, -q.c};
    }

    // Componentwise monotone surfaces: the interval is exactly the corner
    // extremes.
    double mn = HUGE_VAL, mx = -HUGE_VAL;
    for (double x : {bx.lx, bx.ux})
        for (double y : {bx.ly, bx.uy}) {
            double h = surface_eval(kind, x, y);
            mn = std::min(mn, h);
            mx = std::max(mx, h);
        }
    out.lb = mn;
    out.ub = mx;
    return out;
}

}  // namespace seqcert
