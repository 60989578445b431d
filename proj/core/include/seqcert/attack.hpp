#pragma once

#include <cstdint>
#include <vector>

#include "seqcert/network.hpp"

namespace seqcert {

// Projected gradient ascent on the negative per-frame margin of the greedy
// path, with numerically estimated gradients (central differences). A
// returned counterexample is always re-validated: its greedy decode really
// differs from the clean one.
struct AttackConfig {
    int steps = 12;
    double step_frac = 0.3;   // step size as a fraction of eps
    int restarts = 2;         // first start at the clean image, rest jittered
    std::uint64_t seed = 17;
    double clip_lo = 0.0;
    double clip_hi = 1.0;
};

struct AttackResult {
    bool found = false;
    std::vector<double> adversarial;
    std::vector<int> clean_labels;
    std::vector<int> adv_labels;
};

AttackResult pgd_falsify(const Network& net, const std::vector<double>& image,
                         double eps, const AttackConfig& cfg);

}  // namespace seqcert
