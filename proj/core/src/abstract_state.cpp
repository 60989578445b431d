#include "seqcert/abstract_state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqcert/errors.hpp"

namespace seqcert {

int AbstractState::add_layer(LayerBounds l) {
    if (index.count(l.id)) throw DomainError("add_layer: duplicate layer id '" + l.id + "'");
    if (l.lo.size() != l.width || l.hi.size() != l.width)
        throw SizeError("add_layer: expression count != width for '" + l.id + "'");
    int pos = static_cast<int>(layers.size());
    index.emplace(l.id, pos);
    layers.push_back(std::move(l));
    return pos;
}

int AbstractState::layer_index(const std::string& id) const {
    auto it = index.find(id);
    if (it == index.end()) throw DomainError("layer_index: no layer '" + id + "'");
    return it->second;
}

const LayerBounds& AbstractState::layer(const std::string& id) const {
    return layers[static_cast<std::size_t>(layer_index(id))];
}

LayerBounds& AbstractState::layer(const std::string& id) {
    return layers[static_cast<std::size_t>(layer_index(id))];
}

AbstractState init_abstract(const IntervalBox& region) {
    AbstractState st;
    LayerBounds in;
    in.id = "@input";
    in.width = region.size();
    in.lo.resize(in.width);
    in.hi.resize(in.width);
    in.lb = region.lo;
    in.ub = region.hi;
    for (std::size_t i = 0; i < in.width; ++i) {
        in.lo[i] = LinExpr::single(0, static_cast<std::int32_t>(i), 1.0);
        in.hi[i] = in.lo[i];
    }
    st.add_layer(std::move(in));
    return st;
}

namespace {

// Per-expression accumulator: dense coefficient rows keyed by layer index.
struct Scratch {
    std::unordered_map<int, std::vector<double>> rows;
    double bias = 0.0;

    std::vector<double>& row(const AbstractState& st, int layer) {
        auto& r = rows[layer];
        if (r.empty()) r.assign(st.layers[static_cast<std::size_t>(layer)].width, 0.0);
        return r;
    }
};

void seed(Scratch& sc, const AbstractState& st, const LinExpr& e) {
    sc.bias = e.bias;
    for (const LinTerm& t : e.terms) {
        if (t.layer < 0 || static_cast<std::size_t>(t.layer) >= st.layers.size())
            throw DomainError("backsubstitute: expression references unknown layer");
        sc.row(st, t.layer)[static_cast<std::size_t>(t.idx)] += t.c;
    }
}

// Extremum of sum c_i x_i over the box when the x_i are additionally known
// to sum to one exactly: start every coordinate at its lower bound and
// distribute the remaining unit mass greedily by coefficient order — the
// continuous-knapsack solution of the one-constraint LP. Residual mass
// (interval dust can leave sum u_i below one) lands on the extremal
// coefficient, which over- rather than under-covers the true optimum.
double simplex_eval(const double* c, const double* lb, const double* ub, std::size_t n,
                    Dir dir) {
    double base = 0.0, mass = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        base += c[i] * lb[i];
        mass -= lb[i];
    }
    if (mass < 0.0) mass = 0.0;
    std::vector<std::size_t> ord(n);
    std::iota(ord.begin(), ord.end(), std::size_t{0});
    if (dir == Dir::Upper)
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return c[a] > c[b]; });
    else
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return c[a] < c[b]; });
    for (std::size_t i : ord) {
        if (mass <= 0.0) break;
        double take = std::min(mass, ub[i] - lb[i]);
        base += c[i] * take;
        mass -= take;
    }
    if (mass > 0.0 && n) base += mass * c[ord[0]];
    return base;
}

// Concrete value of the partially substituted expression: every remaining
// coefficient takes the interval endpoint the sign rule asks for, except
// over recorded simplex ranges, where the sum-to-one constraint is solved
// exactly. Sound at any depth of the sweep, so the sweep keeps the best
// value it ever sees.
double interval_eval(const AbstractState& st, const Scratch& sc, Dir dir) {
    double v = sc.bias;
    for (const auto& [L, coeffs] : sc.rows) {
        const LayerBounds& lay = st.layers[static_cast<std::size_t>(L)];
        std::size_t next_plain = 0;
        for (const auto& [off, len] : lay.simplex) {
            for (std::size_t i = next_plain; i < off; ++i) {
                double c = coeffs[i];
                if (c == 0.0) continue;
                bool take_lb = (dir == Dir::Lower) == (c > 0.0);
                v += c * (take_lb ? lay.lb[i] : lay.ub[i]);
            }
            v += simplex_eval(coeffs.data() + off, lay.lb.data() + off, lay.ub.data() + off,
                              len, dir);
            next_plain = off + len;
        }
        for (std::size_t i = next_plain; i < coeffs.size(); ++i) {
            double c = coeffs[i];
            if (c == 0.0) continue;
            bool take_lb = (dir == Dir::Lower) == (c > 0.0);
            v += c * (take_lb ? lay.lb[i] : lay.ub[i]);
        }
    }
    return v;
}

// Eliminates layers from the top down; positive coefficients pull in the
// bounding expression of the queried direction, negative ones the opposite.
// Before each elimination the expression is also evaluated against the
// layer intervals; the final answer is the tightest of the full
// substitution down to the input and every such intermediate stop.
void sweep(const AbstractState& st, std::vector<Scratch>& scs, Dir dir,
           std::vector<double>& out, std::size_t out_off) {
    std::vector<double> best(scs.size(), dir == Dir::Lower ? -HUGE_VAL : HUGE_VAL);
    for (int L = static_cast<int>(st.layers.size()) - 1; L >= 1; --L) {
        const LayerBounds& lay = st.layers[static_cast<std::size_t>(L)];
        for (std::size_t k = 0; k < scs.size(); ++k) {
            Scratch& sc = scs[k];
            auto it = sc.rows.find(L);
            if (it == sc.rows.end()) continue;
            double stop = interval_eval(st, sc, dir);
            best[k] = dir == Dir::Lower ? std::max(best[k], stop) : std::min(best[k], stop);
            std::vector<double> coeffs = std::move(it->second);
            sc.rows.erase(it);
            for (std::size_t i = 0; i < coeffs.size(); ++i) {
                double c = coeffs[i];
                if (c == 0.0) continue;
                bool use_lower = (dir == Dir::Lower) == (c > 0.0);
                const LinExpr& sub = use_lower ? lay.lo[i] : lay.hi[i];
                sc.bias += c * sub.bias;
                for (const LinTerm& t : sub.terms)
                    sc.row(st, t.layer)[static_cast<std::size_t>(t.idx)] += c * t.c;
            }
        }
    }
    for (std::size_t k = 0; k < scs.size(); ++k) {
        double v = interval_eval(st, scs[k], dir);
        out[out_off + k] = dir == Dir::Lower ? std::max(best[k], v) : std::min(best[k], v);
    }
}

constexpr std::size_t kChunk = 64;  // caps scratch memory on wide layers

}  // namespace

double backsubstitute(const AbstractState& st, const LinExpr& e, Dir dir) {
    std::vector<Scratch> scs(1);
    seed(scs[0], st, e);
    std::vector<double> out(1);
    sweep(st, scs, dir, out, 0);
    return out[0];
}

void backsubstitute_batch(const AbstractState& st, const std::vector<LinExpr>& exprs, Dir dir,
                          std::vector<double>& out) {
    out.resize(exprs.size());
    for (std::size_t base = 0; base < exprs.size(); base += kChunk) {
        std::size_t n = std::min(kChunk, exprs.size() - base);
        std::vector<Scratch> scs(n);
        for (std::size_t k = 0; k < n; ++k) seed(scs[k], st, exprs[base + k]);
        sweep(st, scs, dir, out, base);
    }
}

void finalize_intervals(AbstractState& st, int layer_idx) {
    LayerBounds& lay = st.layers[static_cast<std::size_t>(layer_idx)];
    backsubstitute_batch(st, lay.lo, Dir::Lower, lay.lb);
    backsubstitute_batch(st, lay.hi, Dir::Upper, lay.ub);
    for (std::size_t i = 0; i < lay.width; ++i)
        if (lay.lb[i] > lay.ub[i]) {
            // Distinct relaxations of the two directions can cross by a hair
            // on degenerate inputs; collapse to the midpoint, which stays
            // inside both one-sided guarantees' slack.
            if (lay.lb[i] - lay.ub[i] > 1e-6)
                throw NumericalError("finalize_intervals: crossed bounds at '" + lay.id + "'");
            double m = 0.5 * (lay.lb[i] + lay.ub[i]);
            lay.lb[i] = m;
            lay.ub[i] = m;
        }
}

}  // namespace seqcert
