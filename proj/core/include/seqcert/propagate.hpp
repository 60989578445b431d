#pragma once

#include <chrono>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "seqcert/abstract_state.hpp"
#include "seqcert/forward.hpp"
#include "seqcert/network.hpp"

namespace seqcert {

// Sampled plane fitting for sigmoid-product and division relaxations.
struct McLpConfig {
    int samples = 100;         // monte-carlo points for the LP fit (>= 3)
    std::uint64_t seed = 0x5eedcafeULL;
    int grid = 2048;           // points for the post-offset safety recheck (>= 1000)
    double slack = 1e-9;       // extra margin subtracted from fitted planes
    int quartic_grid = 10000;  // bracketing resolution for interior roots
};

struct PropagateOptions {
    SoftmaxScheme scheme = SoftmaxScheme::Lse;
    bool refine_softmax = true;
    McLpConfig mclp;
    // Cooperative deadline; zero means none. Checked between layers.
    std::chrono::steady_clock::time_point deadline{};
    bool has_deadline = false;

    TraceOptions trace_options() const {
        return TraceOptions{scheme, refine_softmax, {}};
    }
};

// Runs every node's abstract transformer in topological order, materializing
// auxiliary layers for composite nodes. Every layer's interval is finalized
// by backsubstitution before dependents consume it.
AbstractState propagate(const Network& net, const IntervalBox& region,
                        const PropagateOptions& opts);

enum class QueryStatus { Safe, Unknown };

struct DominanceResult {
    QueryStatus status = QueryStatus::Unknown;
    double lower_bound = 0.0;
};

// Lower-bounds logit[t,a] - logit[t,b] over the region as a single linear
// expression (never as an interval difference). Safe iff the bound is > 0.
DominanceResult verify_dominance(const AbstractState& st, const std::string& logits_id,
                                 int classes, int t, int a, int b);

// Candidate class set for frame t: the concrete argmax plus every class whose
// dominance by it could not be proven. batch-evaluated in one sweep.
std::set<int> certify_frame(const AbstractState& st, const std::string& logits_id,
                            int classes, int t, int concrete_argmax);

}  // namespace seqcert
