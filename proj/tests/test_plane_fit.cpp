#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "seqcert/errors.hpp"
#include "seqcert/plane_fit.hpp"
#include "seqcert/propagate.hpp"
#include "seqcert/relax_scalar.hpp"

using namespace seqcert;

namespace {

// Planes sandwich the surface on a dense grid; lb/ub contain every value.
void check_surface_sound(SurfaceKind kind, const Box2& bx, const PlanePair& p,
                         double tol = 1e-9, int n = 60) {
    for (int i = 0; i <= n; ++i) {
        double x = bx.lx + (bx.ux - bx.lx) * i / n;
        for (int j = 0; j <= n; ++j) {
            double y = bx.ly + (bx.uy - bx.ly) * j / n;
            double h = surface_eval(kind, x, y);
            CHECK(p.lo.eval(x, y) <= h + tol);
            CHECK(p.hi.eval(x, y) >= h - tol);
            CHECK(p.lb <= h + tol);
            CHECK(p.ub >= h - tol);
        }
    }
}

double mean_gap(const PlanePair& p, const Box2& bx) {
    const int n = 40;
    double s = 0.0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            double x = bx.lx + (bx.ux - bx.lx) * i / n;
            double y = bx.ly + (bx.uy - bx.ly) * j / n;
            s += p.hi.eval(x, y) - p.lo.eval(x, y);
        }
    return s / ((n + 1.0) * (n + 1.0));
}

}  // namespace

TEST_CASE("simplex: bounded two-variable program hits the known vertex") {
    // max 3a + 2b  s.t.  a + b <= 4, a <= 2, b <= 3  ->  (2, 2), value 10
    std::vector<std::vector<double>> A = {{1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}};
    std::vector<double> b = {4.0, 2.0, 3.0};
    std::vector<double> v = simplex_maximize(A, b, {3.0, 2.0});
    REQUIRE(v.size() == 2);
    CHECK(v[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(v[1] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("simplex: free variables can settle at negative values") {
    // max -a  s.t.  -a <= 5  ->  a = -5
    std::vector<double> v = simplex_maximize({{-1.0}}, {5.0}, {-1.0});
    REQUIRE(v.size() == 1);
    CHECK(v[0] == doctest::Approx(-5.0).epsilon(1e-9));
}

TEST_CASE("simplex: one-dimensional cap") {
    std::vector<double> v = simplex_maximize({{1.0}}, {1.5}, {2.5});
    REQUIRE(v.size() == 1);
    CHECK(v[0] == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("simplex: malformed and unbounded programs throw") {
    CHECK_THROWS_AS(simplex_maximize({{0.0, 1.0}}, {1.0}, {1.0, 0.0}), LpError);  // unbounded
    CHECK_THROWS_AS(simplex_maximize({{1.0}}, {1.0, 2.0}, {1.0}), LpError);       // rhs size
    CHECK_THROWS_AS(simplex_maximize({{1.0, 0.0}}, {1.0}, {1.0}), LpError);       // row size
    CHECK_THROWS_AS(simplex_maximize({{1.0}}, {-1.0}, {1.0}), LpError);           // negative rhs
}

TEST_CASE("point box collapses to the surface value") {
    McLpConfig cfg;
    Box2 bx{0.3, 0.3, 0.7, 0.7};
    PlanePair p = surface_relax(SurfaceKind::SigTanh, bx, cfg);
    double h = sigmoid(0.3) * std::tanh(0.7);
    CHECK(p.lb == doctest::Approx(h).epsilon(1e-12));
    CHECK(p.ub == doctest::Approx(h).epsilon(1e-12));
    CHECK(p.lo.eval(0.3, 0.7) <= h);
    CHECK(p.hi.eval(0.3, 0.7) >= h);
    CHECK(p.hi.eval(0.3, 0.7) - p.lo.eval(0.3, 0.7) <= 1e-6);
}

TEST_CASE("slab boxes fall back to one-dimensional relaxations") {
    McLpConfig cfg;
    SUBCASE("x collapsed") {
        Box2 bx{0.3, 0.3, -0.5, 0.8};
        PlanePair p = surface_relax(SurfaceKind::SigTanh, bx, cfg);
        check_surface_sound(SurfaceKind::SigTanh, bx, p);
    }
    SUBCASE("y collapsed") {
        Box2 bx{-1.0, 2.0, 0.4, 0.4};
        PlanePair p = surface_relax(SurfaceKind::SigLinear, bx, cfg);
        check_surface_sound(SurfaceKind::SigLinear, bx, p);
    }
}

TEST_CASE("fitted planes are sound on representative boxes") {
    McLpConfig cfg;
    check_surface_sound(SurfaceKind::SigTanh, Box2{-1.0, 1.0, -1.0, 1.0},
                        surface_relax(SurfaceKind::SigTanh, Box2{-1.0, 1.0, -1.0, 1.0}, cfg));
    check_surface_sound(SurfaceKind::SigLinear, Box2{-2.0, 2.0, -1.0, 1.0},
                        surface_relax(SurfaceKind::SigLinear, Box2{-2.0, 2.0, -1.0, 1.0}, cfg));
    check_surface_sound(SurfaceKind::Div, Box2{-1.0, 2.0, 0.5, 2.0},
                        surface_relax(SurfaceKind::Div, Box2{-1.0, 2.0, 0.5, 2.0}, cfg));
}

TEST_CASE("fitted planes beat the corner interval on a curved box") {
    McLpConfig cfg;
    Box2 bx{-2.0, 2.0, -1.0, 1.0};
    PlanePair p = surface_relax(SurfaceKind::SigLinear, bx, cfg);
    CHECK(mean_gap(p, bx) < p.ub - p.lb);
}

TEST_CASE("surface interval equals the corner extremes") {
    McLpConfig cfg;
    Box2 bx{-1.5, 0.5, 0.25, 1.75};
    PlanePair p = surface_relax(SurfaceKind::Div, bx, cfg);
    CHECK(p.lb == doctest::Approx(-1.5 / 0.25).epsilon(1e-12));
    CHECK(p.ub == doctest::Approx(0.5 / 0.25).epsilon(1e-12));
}

TEST_CASE("division requires a positive denominator interval") {
    McLpConfig cfg;
    CHECK_THROWS_AS(surface_relax(SurfaceKind::Div, Box2{0.0, 1.0, -0.5, 1.0}, cfg), DomainError);
    CHECK_THROWS_AS(surface_relax(SurfaceKind::Div, Box2{0.0, 1.0, 0.0, 1.0}, cfg), DomainError);
    CHECK_THROWS_AS(fit_lower_plane(SurfaceKind::SigTanh, Box2{1.0, 0.0, 0.0, 1.0}, cfg),
                    DomainError);
}

TEST_CASE("fits are deterministic for a fixed config") {
    McLpConfig cfg;
    Box2 bx{-1.2, 1.7, -0.9, 2.1};
    PlanePair a = surface_relax(SurfaceKind::SigTanh, bx, cfg);
    PlanePair b = surface_relax(SurfaceKind::SigTanh, bx, cfg);
    CHECK(a.lo.a == b.lo.a);
    CHECK(a.lo.b == b.lo.b);
    CHECK(a.lo.c == b.lo.c);
    CHECK(a.hi.a == b.hi.a);
    CHECK(a.hi.b == b.hi.b);
    CHECK(a.hi.c == b.hi.c);
}

TEST_CASE("fitted planes are sound across random boxes") {
    std::uint64_t rng = 2026;
    McLpConfig cfg;
    cfg.samples = 40;  // keep the suite quick; soundness must hold regardless
    for (int k = 0; k < 25; ++k) {
        double ax = -2.5 + 5.0 * unit_uniform(rng);
        double bx2 = -2.5 + 5.0 * unit_uniform(rng);
        double ay = -2.5 + 5.0 * unit_uniform(rng);
        double by = -2.5 + 5.0 * unit_uniform(rng);
        Box2 box{std::min(ax, bx2), std::max(ax, bx2), std::min(ay, by), std::max(ay, by)};
        check_surface_sound(SurfaceKind::SigTanh, box,
                            surface_relax(SurfaceKind::SigTanh, box, cfg), 1e-9, 30);
        check_surface_sound(SurfaceKind::SigLinear, box,
                            surface_relax(SurfaceKind::SigLinear, box, cfg), 1e-9, 30);
        Box2 dbox{box.lx, box.ux, 0.3 + unit_uniform(rng), 0.0};
        dbox.uy = dbox.ly + 2.0 * unit_uniform(rng) + 1e-3;
        check_surface_sound(SurfaceKind::Div, dbox, surface_relax(SurfaceKind::Div, dbox, cfg),
                            1e-9, 30);
    }
}

TEST_CASE("seed mixing is deterministic and input-sensitive") {
    const char bytes[] = "layer:attn.q";
    std::uint64_t a = mix_seed(7, bytes, sizeof bytes);
    std::uint64_t b = mix_seed(7, bytes, sizeof bytes);
    std::uint64_t c = mix_seed(8, bytes, sizeof bytes);
    std::uint64_t d = mix_seed(7, bytes, sizeof bytes - 1);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a != d);
}
