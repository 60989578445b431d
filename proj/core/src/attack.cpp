#include "seqcert/attack.hpp"

#include <algorithm>
#include <cmath>

#include "seqcert/decode.hpp"
#include "seqcert/errors.hpp"
#include "seqcert/forward.hpp"
#include "seqcert/plane_fit.hpp"

namespace seqcert {

namespace {

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Smallest margin argmax_t - runner_up_t over the frames of the clean greedy
// path; pushing this negative flips at least one frame label. An attention
// decode may emit fewer steps than the clean run, so only the frames both
// runs share are compared.
double path_margin(const std::vector<double>& scores, int classes,
                   const std::vector<int>& path) {
    std::size_t avail = scores.size() / static_cast<std::size_t>(classes);
    std::size_t T = std::min(avail, path.size());
    double worst = HUGE_VAL;
    for (std::size_t t = 0; t < T; ++t) {
        const double* row = scores.data() + t * static_cast<std::size_t>(classes);
        double own = row[path[t]];
        double best_other = -HUGE_VAL;
        for (int c = 0; c < classes; ++c)
            if (c != path[t]) best_other = std::max(best_other, row[c]);
        worst = std::min(worst, own - best_other);
    }
    return worst;
}

}  // namespace

AttackResult pgd_falsify(const Network& net, const std::vector<double>& image, double eps,
                         const AttackConfig& cfg) {
    if (eps < 0) throw DomainError("pgd_falsify: eps must be >= 0");
    AttackResult res;

    std::vector<double> clean_scores = forward(net, image);
    res.clean_labels = greedy_labels(net, clean_scores);
    int classes = net.meta.classes;
    int frames = static_cast<int>(clean_scores.size()) / classes;
    std::vector<int> clean_path = frame_argmax(clean_scores, frames, classes);

    std::size_t w = image.size();
    std::vector<double> lo(w), hi(w);
    for (std::size_t i = 0; i < w; ++i) {
        lo[i] = clampd(image[i] - eps, cfg.clip_lo, cfg.clip_hi);
        hi[i] = clampd(image[i] + eps, cfg.clip_lo, cfg.clip_hi);
    }

    auto margin_at = [&](const std::vector<double>& x) {
        return path_margin(forward(net, x), classes, clean_path);
    };
    auto flips = [&](const std::vector<double>& x) {
        std::vector<int> labels = greedy_labels(net, forward(net, x));
        if (labels == res.clean_labels) return false;
        res.found = true;
        res.adversarial = x;
        res.adv_labels = std::move(labels);
        return true;
    };

    double step = cfg.step_frac * eps;
    double fd = std::max(1e-6, 0.05 * eps);  // central-difference probe width
    std::uint64_t rng = cfg.seed ? cfg.seed : 0x5eedULL;

    for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
        std::vector<double> x(w);
        if (r == 0) {
            x = image;
        } else {
            for (std::size_t i = 0; i < w; ++i)
                x[i] = lo[i] + unit_uniform(rng) * (hi[i] - lo[i]);
        }
        if (flips(x)) return res;

        for (int it = 0; it < cfg.steps; ++it) {
            std::vector<double> xp = x, xm = x;
            std::vector<double> next(w);
            for (std::size_t i = 0; i < w; ++i) {
                xp[i] = clampd(x[i] + fd, lo[i], hi[i]);
                xm[i] = clampd(x[i] - fd, lo[i], hi[i]);
                double denom = xp[i] - xm[i];
                double g = 0.0;
                if (denom > 0) {
                    double mp = margin_at(xp);
                    double mm = margin_at(xm);
                    g = (mp - mm) / denom;
                }
                xp[i] = x[i];
                xm[i] = x[i];
                // descend the margin; sign step (the linf-PGD update)
                next[i] = clampd(x[i] - step * (g > 0 ? 1.0 : g < 0 ? -1.0 : 0.0), lo[i], hi[i]);
            }
            x = std::move(next);
            if (flips(x)) return res;
        }
    }
    return res;
}

}  // namespace seqcert
