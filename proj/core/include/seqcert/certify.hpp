#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "seqcert/propagate.hpp"

namespace seqcert {

enum class Status { Certified, Unknown, Falsified };
const char* status_name(Status s);

struct Verdict {
    Status status = Status::Unknown;
    std::vector<int> candks;     // |M_t| per examined frame / decoder step
    std::vector<int> greedy;     // unperturbed decoded label sequence
    bool timeout = false;
    std::string note;            // human-readable reason for Unknown
};

// Exhaustive check that every frame-label path drawn from the candidate sets
// collapses to the target sequence; stops at the first mismatch.
struct PathEnumeration {
    bool all_match = true;
    std::vector<int> witness;     // first mismatching path (if any)
    std::uint64_t paths_checked = 0;
};
PathEnumeration enumerate_ctc_paths(const std::vector<std::set<int>>& cands,
                                    const std::vector<int>& target, int blank,
                                    std::uint64_t guard = 10'000'000ULL);

struct CertifyRequest {
    std::vector<double> image;
    double eps = 0.0;
    double clip_lo = 0.0;
    double clip_hi = 1.0;
    PropagateOptions prop;
};

// Dispatches to the decoder-specific driver below. Timeouts surface as
// Unknown verdicts with the timeout flag set.
Verdict certify_sample(const Network& net, const CertifyRequest& req);

// Abstract state for an attention-decoder run: the static graph plus every
// decoder step with step_labels[k-1] fed as the constant previous label
// (step 0 uses [GO]). Step k's scores live in layer "dec<k>#y". Exposed so
// the sampling oracle can cover the decoder-step layers too.
AbstractState propagate_attention_steps(const Network& net, const IntervalBox& region,
                                        const PropagateOptions& opts,
                                        const std::vector<int>& step_labels);

// CTC: candidate sets per frame; > 3 candidates in any frame is reported as
// Unknown (with more than three candidates some path always escapes the
// target collapse), otherwise the product of candidate sets is enumerated.
Verdict certify_ctc(const Network& net, const CertifyRequest& req);

// Attention decoder: steps are certified sequentially with the previous
// greedy label fed as a constant; the first step with |M| > 1 stops the scan.
Verdict certify_attention(const Network& net, const CertifyRequest& req);

// ViT-style decoder: every frame after the constant [GO] up to and including
// the [s] frame must pin its argmax.
Verdict certify_vitstr(const Network& net, const CertifyRequest& req);

}  // namespace seqcert
