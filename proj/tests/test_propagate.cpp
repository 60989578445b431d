#include <doctest.h>

#include <chrono>
#include <cstdint>
#include <vector>

#include "seqcert/errors.hpp"
#include "seqcert/forward.hpp"
#include "seqcert/network.hpp"
#include "seqcert/plane_fit.hpp"
#include "seqcert/propagate.hpp"
#include "seqcert/tensor.hpp"
#include "seqcert/toy_models.hpp"

using namespace seqcert;

namespace {

std::vector<double> sample_in(const IntervalBox& r, std::uint64_t& rng) {
    std::vector<double> x(r.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = r.lo[i] + (r.hi[i] - r.lo[i]) * unit_uniform(rng);
    return x;
}

// Propagate, then check that graph outputs of sampled inputs stay inside the
// output layer's interval.
void check_contains_samples(const Network& net, const IntervalBox& region, int samples,
                            std::uint64_t rng_seed, double tol = 1e-7) {
    PropagateOptions opts;
    AbstractState st = propagate(net, region, opts);
    const LayerBounds& out = st.layer(net.output);
    std::uint64_t rng = rng_seed;
    for (int s = 0; s < samples; ++s) {
        std::vector<double> y = forward_graph(net, sample_in(region, rng));
        REQUIRE(y.size() == out.width);
        for (std::size_t i = 0; i < y.size(); ++i) {
            CHECK(out.lb[i] <= y[i] + tol);
            CHECK(out.ub[i] >= y[i] - tol);
        }
    }
}

// input[2] -> affine identity; frames=1, classes=2.
Network identity_net() {
    Network net;
    Node in;
    in.id = "x";
    in.kind = NodeKind::Input;
    in.out_dims = {2};
    net.nodes.push_back(in);

    Node fc;
    fc.id = "y";
    fc.kind = NodeKind::Affine;
    fc.inputs = {"x"};
    fc.tensors["weight"] = Tensor({2, 2}, {1.0f, 0.0f, 0.0f, 1.0f});
    net.nodes.push_back(fc);

    net.output = "y";
    net.decoder = DecoderKind::Ctc;
    net.frames = 1;
    net.meta.classes = 2;
    net.meta.blank = 0;
    net.meta.alphabet = {"-", "a"};
    validate(net);
    return net;
}

}  // namespace

TEST_CASE("every single-node probe contains its sampled outputs") {
    const NodeKind kinds[] = {
        NodeKind::ReLU,       NodeKind::Tanh,    NodeKind::Sigmoid, NodeKind::Exp,
        NodeKind::Reciprocal, NodeKind::Rsqrt,   NodeKind::Softmax, NodeKind::LayerNorm,
        NodeKind::Normalization, NodeKind::MaxPool, NodeKind::AvgPool, NodeKind::Mul,
        NodeKind::LstmCell,
    };
    for (NodeKind kind : kinds) {
        CAPTURE(kind_name(kind));
        for (std::uint64_t seed : {1ULL, 2ULL}) {
            Network net = toys::unary_probe(kind, seed, 6);
            std::vector<double> image = toys::random_image(seed, 6);
            IntervalBox region = input_region(image, 0.05, 0.0, 1.0);
            check_contains_samples(net, region, 40, seed * 13 + 5);
        }
    }
}

TEST_CASE("toy graphs contain their sampled outputs") {
    SUBCASE("ctc") {
        Network net = toys::ctc(1);
        std::vector<double> image = toys::random_image(3, net.input_node().width());
        check_contains_samples(net, input_region(image, 0.002, 0.0, 1.0), 15, 99);
    }
    SUBCASE("vitstr") {
        Network net = toys::vitstr(1);
        std::vector<double> image = toys::random_image(4, net.input_node().width());
        check_contains_samples(net, input_region(image, 0.002, 0.0, 1.0), 15, 107);
    }
    SUBCASE("attention encoder") {
        Network net = toys::attention(1);
        std::vector<double> image = toys::random_image(5, net.input_node().width());
        check_contains_samples(net, input_region(image, 0.002, 0.0, 1.0), 15, 113);
    }
}

TEST_CASE("a point region collapses the output interval") {
    Network net = toys::ctc(1);
    std::vector<double> image = toys::random_image(8, net.input_node().width());
    IntervalBox region = input_region(image, 0.0, 0.0, 1.0);

    PropagateOptions opts;
    AbstractState st = propagate(net, region, opts);
    const LayerBounds& out = st.layer(net.output);
    std::vector<double> y = forward_graph(net, image);
    REQUIRE(y.size() == out.width);
    for (std::size_t i = 0; i < out.width; ++i) {
        CHECK(out.ub[i] - out.lb[i] <= 1e-4);
        CHECK(out.lb[i] <= y[i] + 1e-7);
        CHECK(out.ub[i] >= y[i] - 1e-7);
    }
}

TEST_CASE("an expired deadline aborts propagation") {
    Network net = toys::ctc(1);
    std::vector<double> image = toys::random_image(2, net.input_node().width());
    IntervalBox region = input_region(image, 0.001, 0.0, 1.0);

    PropagateOptions opts;
    opts.has_deadline = true;
    opts.deadline = std::chrono::steady_clock::now() - std::chrono::milliseconds(5);
    CHECK_THROWS_AS(propagate(net, region, opts), TimeoutError);
}

TEST_CASE("dominance queries bound the score difference as one expression") {
    Network net = identity_net();
    IntervalBox region;
    region.lo = {2.0, 0.0};
    region.hi = {3.0, 1.0};
    PropagateOptions opts;
    AbstractState st = propagate(net, region, opts);

    DominanceResult win = verify_dominance(st, "y", 2, 0, 0, 1);
    CHECK(win.status == QueryStatus::Safe);
    CHECK(win.lower_bound == doctest::Approx(1.0).epsilon(1e-9));

    DominanceResult lose = verify_dominance(st, "y", 2, 0, 1, 0);
    CHECK(lose.status == QueryStatus::Unknown);
    CHECK(lose.lower_bound == doctest::Approx(-3.0).epsilon(1e-9));
}

TEST_CASE("frame certification keeps only classes that resist dominance") {
    Network net = identity_net();
    PropagateOptions opts;

    IntervalBox clear;
    clear.lo = {2.0, 0.0};
    clear.hi = {3.0, 1.0};
    AbstractState st1 = propagate(net, clear, opts);
    CHECK(certify_frame(st1, "y", 2, 0, 0) == std::set<int>{0});

    IntervalBox overlap;
    overlap.lo = {0.0, 0.0};
    overlap.hi = {1.0, 1.0};
    AbstractState st2 = propagate(net, overlap, opts);
    CHECK(certify_frame(st2, "y", 2, 0, 0) == std::set<int>{0, 1});
}
