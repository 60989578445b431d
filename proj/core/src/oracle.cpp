#include "seqcert/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rows.hpp"
#include "seqcert/decode.hpp"
#include "seqcert/errors.hpp"
#include "seqcert/plane_fit.hpp"

namespace seqcert {

SoundnessReport sample_soundness(const Network& net, const IntervalBox& region,
                                 const AbstractState& state, const PropagateOptions& opts,
                                 std::size_t n, std::uint64_t seed, double tol,
                                 const std::vector<int>& forced_labels) {
    SoundnessReport rep;
    rep.samples = n;
    rep.layers_checked = state.layers.size();

    TraceOptions topts = opts.trace_options();
    topts.forced_prev_labels = forced_labels;

    std::size_t w = region.lo.size();
    std::uint64_t rng = seed ? seed : 0x9e3779b97f4a7c15ULL;
    std::vector<double> x(w);

    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t i = 0; i < w; ++i)
            x[i] = region.lo[i] + unit_uniform(rng) * (region.hi[i] - region.lo[i]);

        auto trace = forward_trace(net, x, topts, &state);
        for (const LayerBounds& L : state.layers) {
            auto it = trace.find(L.id);
            if (it == trace.end())
                throw DomainError("sample_soundness: no traced values for layer '" + L.id + "'");
            const std::vector<double>& v = it->second;
            if (v.size() != L.width)
                throw SizeError("sample_soundness: width mismatch at layer '" + L.id + "'");
            for (std::size_t i = 0; i < L.width; ++i) {
                double below = L.lb[i] - v[i];
                double above = v[i] - L.ub[i];
                double excess = std::max(below, above);
                rep.worst_excess = std::max(rep.worst_excess, excess);
                if (excess > tol && rep.violations.size() < 32)
                    rep.violations.push_back({L.id, i, v[i], L.lb[i], L.ub[i], excess});
            }
        }
    }
    return rep;
}

PathEnumeration brute_force_ctc(const std::vector<std::set<int>>& cands,
                                const std::vector<int>& target, int blank,
                                std::uint64_t guard) {
    PathEnumeration out;
    std::size_t T = cands.size();
    std::vector<std::vector<int>> opts(T);
    std::uint64_t total = 1;
    for (std::size_t t = 0; t < T; ++t) {
        if (cands[t].empty()) throw SizeError("brute_force_ctc: empty candidate set");
        opts[t].assign(cands[t].begin(), cands[t].end());
        total *= static_cast<std::uint64_t>(opts[t].size());
        if (total > guard) throw SizeError("brute_force_ctc: path budget exceeded");
    }

    std::vector<int> path(T);
    for (std::uint64_t k = 0; k < total; ++k) {
        // Mixed-radix decode of k, most significant digit first, so the
        // visiting order matches the incremental enumerator's.
        std::uint64_t r = k;
        for (std::size_t t = T; t-- > 0;) {
            path[t] = opts[t][r % opts[t].size()];
            r /= opts[t].size();
        }
        ++out.paths_checked;
        if (out.all_match && ctc_collapse(path, blank) != target) {
            out.all_match = false;
            out.witness = path;
        }
    }
    return out;
}

void corner_bound_oracle(const Network& net, const IntervalBox& region, std::vector<double>& lb,
                         std::vector<double>& ub) {
    std::size_t w0 = region.lo.size();
    // Dense [width x input_width] map plus bias for every node.
    struct Map {
        std::vector<double> m;
        std::vector<double> b;
        std::size_t rows = 0;
    };
    std::map<std::string, Map> maps;

    for (const Node& n : net.nodes) {
        if (n.kind == NodeKind::Input) {
            if (n.width() != w0) throw SizeError("corner_bound_oracle: region width != input");
            Map id;
            id.rows = w0;
            id.m.assign(w0 * w0, 0.0);
            id.b.assign(w0, 0.0);
            for (std::size_t i = 0; i < w0; ++i) id.m[i * w0 + i] = 1.0;
            maps[n.id] = std::move(id);
            continue;
        }
        if (!is_exact_affine(n.kind))
            throw KindError("corner_bound_oracle: node '" + n.id + "' is not exactly affine");

        AffineRows rows = exact_affine_rows(net, n);
        Map out;
        out.rows = rows.rows.size();
        out.m.assign(out.rows * w0, 0.0);
        out.b = rows.bias;
        for (std::size_t r = 0; r < out.rows; ++r)
            for (const RowTerm& t : rows.rows[r]) {
                const Map& src = maps.at(n.inputs[static_cast<std::size_t>(t.slot)]);
                std::size_t j = static_cast<std::size_t>(t.idx);
                out.b[r] += t.c * src.b[j];
                const double* srow = src.m.data() + j * w0;
                double* drow = out.m.data() + r * w0;
                for (std::size_t i = 0; i < w0; ++i) drow[i] += t.c * srow[i];
            }
        maps[n.id] = std::move(out);
    }

    const Map& fin = maps.at(net.output);
    lb.assign(fin.rows, 0.0);
    ub.assign(fin.rows, 0.0);
    for (std::size_t r = 0; r < fin.rows; ++r) {
        double lo = fin.b[r], hi = fin.b[r];
        const double* row = fin.m.data() + r * w0;
        for (std::size_t i = 0; i < w0; ++i) {
            double c = row[i];
            if (c > 0) {
                lo += c * region.lo[i];
                hi += c * region.hi[i];
            } else if (c < 0) {
                lo += c * region.hi[i];
                hi += c * region.lo[i];
            }
        }
        lb[r] = lo;
        ub[r] = hi;
    }
}

}  // namespace seqcert
