#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "seqcert/network.hpp"
#include "seqcert/plane_fit.hpp"
#include "seqcert/propagate.hpp"
#include "seqcert/softmax_bounds.hpp"
#include "seqcert/tensor.hpp"
#include "seqcert/toy_models.hpp"

using namespace seqcert;

namespace {

// Reference softmax with the usual max shift.
std::vector<double> softmax_ref(const std::vector<double>& x) {
    double m = x[0];
    for (double v : x) m = std::max(m, v);
    std::vector<double> p(x.size());
    double z = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) z += (p[i] = std::exp(x[i] - m));
    for (double& v : p) v /= z;
    return p;
}

std::vector<double> sample_in(const std::vector<double>& l, const std::vector<double>& u,
                              std::uint64_t& rng) {
    std::vector<double> x(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) x[i] = l[i] + (u[i] - l[i]) * unit_uniform(rng);
    return x;
}

// input[k] -> Softmax(group=k); CTC head with frames=1 keeps validate happy.
Network softmax_net(int k) {
    Network net;
    Node in;
    in.id = "x";
    in.kind = NodeKind::Input;
    in.out_dims = {static_cast<std::uint32_t>(k)};
    net.nodes.push_back(in);

    Node sm;
    sm.id = "p";
    sm.kind = NodeKind::Softmax;
    sm.inputs = {"x"};
    sm.ints["group"] = k;
    net.nodes.push_back(sm);

    net.output = "p";
    net.decoder = DecoderKind::Ctc;
    net.frames = 1;
    net.meta.classes = k;
    net.meta.blank = 0;
    net.meta.alphabet.assign(static_cast<std::size_t>(k), "?");
    validate(net);
    return net;
}

IntervalBox box_around(const std::vector<double>& c, double eps) {
    IntervalBox b;
    b.lo.resize(c.size());
    b.hi.resize(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        b.lo[i] = c[i] - eps;
        b.hi[i] = c[i] + eps;
    }
    return b;
}

}  // namespace

TEST_CASE("output range: identical point scores give exactly 1/K") {
    std::vector<double> l = {0.0, 0.0, 0.0}, u = l;
    for (std::size_t j = 0; j < 3; ++j) {
        double plo = -1.0, phi = -1.0;
        softmax_output_range(l, u, j, plo, phi);
        CHECK(plo == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(phi == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("output range: unit box matches the closed form") {
    std::vector<double> l = {0.0, 0.0}, u = {1.0, 1.0};
    double plo = 0.0, phi = 0.0;
    softmax_output_range(l, u, 0, plo, phi);
    CHECK(plo == doctest::Approx(1.0 / (1.0 + std::exp(1.0))).epsilon(1e-12));
    CHECK(phi == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("output range endpoints are attained at box corners") {
    std::uint64_t rng = 11;
    for (int k = 0; k < 50; ++k) {
        std::size_t n = 2 + static_cast<std::size_t>(4.0 * unit_uniform(rng));
        std::vector<double> l(n), u(n);
        for (std::size_t i = 0; i < n; ++i) {
            l[i] = -2.0 + 4.0 * unit_uniform(rng);
            u[i] = l[i] + 2.0 * unit_uniform(rng);
        }
        std::size_t j = static_cast<std::size_t>(static_cast<double>(n) * unit_uniform(rng));
        double plo = 0.0, phi = 0.0;
        softmax_output_range(l, u, j, plo, phi);

        std::vector<double> worst = u, best = l;
        worst[j] = l[j];  // own score low, rivals high
        best[j] = u[j];   // own score high, rivals low
        CHECK(softmax_ref(worst)[j] == doctest::Approx(plo).epsilon(1e-9));
        CHECK(softmax_ref(best)[j] == doctest::Approx(phi).epsilon(1e-9));

        for (int s = 0; s < 40; ++s) {
            double p = softmax_ref(sample_in(l, u, rng))[j];
            CHECK(p >= plo - 1e-9);
            CHECK(p <= phi + 1e-9);
        }
    }
}

TEST_CASE("lse planes sandwich sampled softmax outputs") {
    std::uint64_t rng = 77;
    for (int k = 0; k < 40; ++k) {
        std::size_t n = 2 + static_cast<std::size_t>(5.0 * unit_uniform(rng));
        std::vector<double> l(n), u(n);
        for (std::size_t i = 0; i < n; ++i) {
            l[i] = -3.0 + 6.0 * unit_uniform(rng);
            u[i] = l[i] + 3.0 * unit_uniform(rng);
        }
        for (std::size_t j = 0; j < n; ++j) {
            SoftmaxPlanes sp = lse_softmax_planes(l, u, j);
            REQUIRE(sp.lo_coeffs.size() == n);
            REQUIRE(sp.hi_coeffs.size() == n);
            CHECK(sp.lb >= -1e-12);
            CHECK(sp.ub <= 1.0 + 1e-12);
            for (int s = 0; s < 30; ++s) {
                std::vector<double> x = sample_in(l, u, rng);
                double p = softmax_ref(x)[j];
                double lo = sp.lo_bias, hi = sp.hi_bias;
                for (std::size_t i = 0; i < n; ++i) {
                    lo += sp.lo_coeffs[i] * x[i];
                    hi += sp.hi_coeffs[i] * x[i];
                }
                CHECK(lo <= p + 1e-9);
                CHECK(hi >= p - 1e-9);
                CHECK(sp.lb <= p + 1e-9);
                CHECK(sp.ub >= p - 1e-9);
            }
        }
    }
}

TEST_CASE("refine index picks the widest interval, ties to the lowest") {
    CHECK(choose_refine_index({0.1, 0.0, 0.2}, {0.2, 0.5, 0.3}) == 1);
    CHECK(choose_refine_index({0.0, 0.0}, {0.5, 0.5}) == 0);
    CHECK(choose_refine_index({0.2, 0.0, 0.0}, {0.3, 0.1, 0.4}) == 2);
}

TEST_CASE("lse bounds are never wider than the compositional chain") {
    Network net = softmax_net(4);
    std::uint64_t rng = 555;
    for (int k = 0; k < 30; ++k) {
        std::vector<double> c(4);
        for (double& v : c) v = -2.0 + 4.0 * unit_uniform(rng);
        IntervalBox region = box_around(c, 0.1 + 0.6 * unit_uniform(rng));

        PropagateOptions lse, comp;
        lse.scheme = SoftmaxScheme::Lse;
        comp.scheme = SoftmaxScheme::Compositional;
        lse.refine_softmax = comp.refine_softmax = false;

        const LayerBounds& a = propagate(net, region, lse).layer("p");
        const LayerBounds& b = propagate(net, region, comp).layer("p");
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(a.ub[i] - a.lb[i] <= b.ub[i] - b.lb[i] + 1e-9);
            CHECK(a.lb[i] >= b.lb[i] - 1e-9);
            CHECK(a.ub[i] <= b.ub[i] + 1e-9);
        }
    }
}

TEST_CASE("both schemes contain sampled softmax outputs") {
    Network net = softmax_net(5);
    std::uint64_t rng = 888;
    std::vector<double> c(5);
    for (double& v : c) v = -1.5 + 3.0 * unit_uniform(rng);
    IntervalBox region = box_around(c, 0.4);

    for (SoftmaxScheme scheme : {SoftmaxScheme::Lse, SoftmaxScheme::Compositional}) {
        PropagateOptions opts;
        opts.scheme = scheme;
        const LayerBounds& p = propagate(net, region, opts).layer("p");
        for (int s = 0; s < 200; ++s) {
            std::vector<double> x = sample_in(region.lo, region.hi, rng);
            std::vector<double> y = forward(net, x);
            for (std::size_t i = 0; i < 5; ++i) {
                CHECK(p.lb[i] <= y[i] + 1e-9);
                CHECK(p.ub[i] >= y[i] - 1e-9);
            }
        }
    }
}

TEST_CASE("sum-to-one refinement never loosens a downstream head") {
    for (std::uint64_t seed : {3ULL, 9ULL, 21ULL}) {
        Network net = relu_softmax_probe(seed, 4, 6, 5);
        std::vector<double> image = toys::random_image(seed + 1, 4);
        IntervalBox region = input_region(image, 0.1, -8.0, 8.0);

        PropagateOptions on, off;
        on.scheme = off.scheme = SoftmaxScheme::Compositional;
        on.refine_softmax = true;
        off.refine_softmax = false;

        const LayerBounds& a = propagate(net, region, on).layer(net.output);
        const LayerBounds& b = propagate(net, region, off).layer(net.output);
        REQUIRE(a.width == b.width);
        for (std::size_t i = 0; i < a.width; ++i) {
            CHECK(a.lb[i] >= b.lb[i] - 1e-9);
            CHECK(a.ub[i] <= b.ub[i] + 1e-9);
        }
    }
}
