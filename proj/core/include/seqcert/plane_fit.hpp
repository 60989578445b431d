#pragma once

#include <cstdint>
#include <vector>

#include "seqcert/relax_mul.hpp"

namespace seqcert {

struct McLpConfig;  // propagate.hpp

struct Box2 {
    double lx = 0.0, ux = 0.0, ly = 0.0, uy = 0.0;
};

// Families of curved surfaces bounded by sampled-LP planes with a
// stationary-point soundness offset.
enum class SurfaceKind {
    SigTanh,    // sigmoid(x) * tanh(y)
    SigLinear,  // sigmoid(x) * y
    Div,        // x / y, requires ly > 0
};

double surface_eval(SurfaceKind kind, double x, double y);

// Lower plane for the surface on the box: fit by a small dense LP over
// sampled points (plane below all samples, total gap minimized), then shift
// down by the exact minimum of surface - plane over the box. Candidates for
// that minimum come from the corners, the per-edge stationary equations and
// the interior first-order system (quartic in sigmoid(x) for SigTanh).
// A final grid recheck can only push the plane further down. Degenerate
// boxes fall back to exact one-dimensional relaxations.
Plane fit_lower_plane(SurfaceKind kind, const Box2& box, const McLpConfig& cfg);

// Both planes plus the interval of the surface over the box. Upper plane is
// the reflected lower plane of the negated surface.
PlanePair surface_relax(SurfaceKind kind, const Box2& box, const McLpConfig& cfg);

// Small dense simplex used by the fit; exposed for direct testing.
// Maximizes c.v subject to A v <= b over free variables v. Throws LpError
// when unbounded or not solvable.
std::vector<double> simplex_maximize(const std::vector<std::vector<double>>& A,
                                     const std::vector<double>& b,
                                     const std::vector<double>& c);

// Deterministic uniform draw in [0,1) from a counter-based generator, so
// sampled fits are reproducible across platforms.
double unit_uniform(std::uint64_t& state);
std::uint64_t mix_seed(std::uint64_t seed, const void* bytes, std::size_t n);

}  // namespace seqcert
