#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "seqcert/report.hpp"

namespace seqcert {

// certify: per sample, per ascending eps, propagate + decoder driver. The
// sweep short-circuits after the first non-certified eps so per-sample
// verdicts (and therefore the aggregate) are monotone by construction.
Report run_certify(const RunConfig& cfg);

// decode: greedy text + per-frame confidences for each input.
int run_decode(const RunConfig& cfg, std::ostream& out);

// falsify: PGD per sample and eps; Falsified rows carry the adversarial
// decode in the note field.
Report run_falsify(const RunConfig& cfg);

// selfcheck: deterministic built-in fixtures through the sampling oracle,
// the exhaustive CTC reference and the refinement-tightening property.
// inject_fault corrupts one relaxation on purpose; the run must then fail
// and name the corrupted layer.
struct SelfcheckResult {
    bool ok = true;
    std::vector<std::string> failures;
    std::string summary;
};
SelfcheckResult run_selfcheck(std::uint64_t seed, bool inject_fault, std::ostream& log);

std::string scheme_name(SoftmaxScheme s);

}  // namespace seqcert
