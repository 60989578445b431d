#include "seqcert/softmax_bounds.hpp"

#include <algorithm>
#include <cmath>

#include "seqcert/errors.hpp"

namespace seqcert {

namespace {

double safe_exp(double x) {
    if (x > 700.0) return HUGE_VAL;
    return std::exp(x);
}

void check_group(const std::vector<double>& l, const std::vector<double>& u, std::size_t j,
                 const char* fn) {
    if (l.size() != u.size() || l.empty())
        throw SizeError(std::string(fn) + ": interval vectors must match and be nonempty");
    if (j >= l.size()) throw SizeError(std::string(fn) + ": output index out of range");
    for (std::size_t i = 0; i < l.size(); ++i)
        if (!(l[i] <= u[i])) throw DomainError(std::string(fn) + ": endpoints out of order");
}

}  // namespace

void softmax_output_range(const std::vector<double>& l, const std::vector<double>& u,
                          std::size_t j, double& plo, double& phi) {
    check_group(l, u, j, "softmax_output_range");
    // Output j is decreasing in every other score and increasing in its own,
    // so both extremes sit at box corners and the range is exact.
    double shi = 0.0, slo = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i) {
        if (i == j) continue;
        shi += safe_exp(u[i] - l[j]);
        slo += safe_exp(l[i] - u[j]);
    }
    plo = std::isfinite(shi) ? 1.0 / (1.0 + shi) : 0.0;
    phi = 1.0 / (1.0 + slo);
    if (plo < 1e-300) plo = 1e-300;
    if (phi < plo) phi = plo;
}

SoftmaxPlanes lse_softmax_planes(const std::vector<double>& l, const std::vector<double>& u,
                                 std::size_t j) {
    check_group(l, u, j, "lse_softmax_planes");
    std::size_t K = l.size();

    SoftmaxPlanes out;
    out.lo_coeffs.assign(K, 0.0);
    out.hi_coeffs.assign(K, 0.0);
    softmax_output_range(l, u, j, out.lb, out.ub);

    if (out.ub - out.lb < 1e-12) {  // value pinned; constant planes suffice
        out.lo_bias = out.lb;
        out.hi_bias = out.ub;
        return out;
    }

    // Work in scores shifted by the group maximum; softmax is shift-invariant
    // and the exponentials stay <= 1.
    double c = u[0];
    for (std::size_t i = 1; i < K; ++i) c = std::max(c, u[i]);
    std::vector<double> sl(K), su(K), mid(K), alpha(K), beta(K);
    for (std::size_t i = 0; i < K; ++i) {
        sl[i] = l[i] - c;
        su[i] = u[i] - c;
        mid[i] = 0.5 * (sl[i] + su[i]);
        double w = su[i] - sl[i];
        if (w <= 1e-12) {
            alpha[i] = 0.0;
            beta[i] = std::exp(su[i]);
        } else {
            alpha[i] = (std::exp(su[i]) - std::exp(sl[i])) / w;
            beta[i] = std::exp(sl[i]) - alpha[i] * sl[i];
        }
    }

    // Lower plane: tangent at the midpoint of the jointly convex surrogate
    // exp(x_j) / sum_i chord(exp(x_i)), which never exceeds the true output.
    double A = 0.0;
    for (std::size_t i = 0; i < K; ++i) A += alpha[i] * mid[i] + beta[i];
    double L = std::exp(mid[j]) / A;
    double lo_bias_s = L;
    for (std::size_t i = 0; i < K; ++i) {
        double ci = -L * alpha[i] / A;
        if (i == j) ci += L;
        out.lo_coeffs[i] = ci;
        lo_bias_s -= ci * mid[i];
    }

    // Upper plane: output = exp(-m) with m = lse(x) - x_j convex; the chord
    // of exp(-m) over [m_lo, m_hi] has negative slope, so substituting the
    // tangent underestimate of m keeps the bound valid.
    double mmax = mid[0];
    for (std::size_t i = 1; i < K; ++i) mmax = std::max(mmax, mid[i]);
    double Z = 0.0;
    for (std::size_t i = 0; i < K; ++i) Z += std::exp(mid[i] - mmax);
    double lse_mid = mmax + std::log(Z);
    double m_tilde = lse_mid - mid[j];
    double m_lo = -std::log(out.ub), m_hi = -std::log(out.lb);
    double kappa = (out.lb - out.ub) / (m_hi - m_lo);
    double hi_bias_s = out.ub + kappa * (m_tilde - m_lo);
    for (std::size_t i = 0; i < K; ++i) {
        double grad = std::exp(mid[i] - mmax) / Z - (i == j ? 1.0 : 0.0);
        out.hi_coeffs[i] = kappa * grad;
        hi_bias_s -= kappa * grad * mid[i];
    }

    // Map planes from shifted scores back to the originals.
    double slo = 0.0, shi = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        slo += out.lo_coeffs[i];
        shi += out.hi_coeffs[i];
    }
    out.lo_bias = lo_bias_s - c * slo;
    out.hi_bias = hi_bias_s - c * shi;
    return out;
}

std::size_t choose_refine_index(const std::vector<double>& l, const std::vector<double>& u) {
    if (l.size() != u.size() || l.empty())
        throw SizeError("choose_refine_index: interval vectors must match and be nonempty");
    std::size_t best = 0;
    double bw = u[0] - l[0];
    for (std::size_t i = 1; i < l.size(); ++i)
        if (u[i] - l[i] > bw) {
            bw = u[i] - l[i];
            best = i;
        }
    return best;
}

}  // namespace seqcert
