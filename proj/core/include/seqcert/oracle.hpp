#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "seqcert/certify.hpp"
#include "seqcert/propagate.hpp"

namespace seqcert {

// --- sampling soundness -----------------------------------------------------
// Draws n inputs uniformly from the region, runs the concrete trace, and
// checks every abstract layer's interval against the traced values. Any
// excess beyond tol is a violation: bounds must contain reality.
struct SoundnessViolation {
    std::string layer;
    std::size_t neuron = 0;
    double value = 0.0, lb = 0.0, ub = 0.0;
    double excess = 0.0;
};

struct SoundnessReport {
    std::size_t samples = 0;
    std::size_t layers_checked = 0;
    double worst_excess = 0.0;
    std::vector<SoundnessViolation> violations;  // capped at 32 entries
    bool ok() const { return violations.empty(); }
};

// forced_labels: previous-label sequence for attention-decoder step layers
// (must match the labels the state was built with); empty for static graphs.
SoundnessReport sample_soundness(const Network& net, const IntervalBox& region,
                                 const AbstractState& state, const PropagateOptions& opts,
                                 std::size_t n, std::uint64_t seed, double tol = 1e-6,
                                 const std::vector<int>& forced_labels = {});

// --- exhaustive CTC reference ------------------------------------------------
// Ground truth for the path enumeration: same contract, no early-exit tricks,
// explicit guard on the product size.
PathEnumeration brute_force_ctc(const std::vector<std::set<int>>& cands,
                                const std::vector<int>& target, int blank,
                                std::uint64_t guard = 10'000'000ULL);

// --- exact bounds for affine-only networks -----------------------------------
// Composes the end-to-end linear map and evaluates it on the region corners
// coordinate-wise (sign rule). Throws KindError if any node is not exact.
void corner_bound_oracle(const Network& net, const IntervalBox& region,
                         std::vector<double>& lb, std::vector<double>& ub);

}  // namespace seqcert
