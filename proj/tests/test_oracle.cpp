#include <doctest.h>

#include <cstdint>
#include <set>
#include <vector>

#include "seqcert/decode.hpp"
#include "seqcert/errors.hpp"
#include "seqcert/forward.hpp"
#include "seqcert/oracle.hpp"
#include "seqcert/plane_fit.hpp"
#include "seqcert/toy_models.hpp"

using namespace seqcert;

namespace {

Node node(const std::string& id, NodeKind kind, std::vector<std::string> inputs) {
    Node n;
    n.id = id;
    n.kind = kind;
    n.inputs = std::move(inputs);
    return n;
}

// input[2] -> affine[3] -> affine[2]; frames=1, classes=2.
Network two_affine_net() {
    Network net;
    Node in = node("x", NodeKind::Input, {});
    in.out_dims = {2};
    net.nodes.push_back(in);

    Node h = node("h", NodeKind::Affine, {"x"});
    h.tensors["weight"] = Tensor({3, 2}, {0.5f, -1.2f, 0.3f, 0.7f, -0.4f, 0.1f});
    h.tensors["bias"] = Tensor({3}, {0.1f, -0.2f, 0.3f});
    net.nodes.push_back(h);

    Node y = node("y", NodeKind::Affine, {"h"});
    y.tensors["weight"] = Tensor({2, 3}, {1.0f, -1.0f, 0.5f, 0.2f, 0.4f, -0.3f});
    net.nodes.push_back(y);

    net.output = "y";
    net.decoder = DecoderKind::Ctc;
    net.frames = 1;
    net.meta.classes = 2;
    net.meta.blank = 0;
    validate(net);
    return net;
}

std::vector<std::set<int>> random_cands(std::uint64_t& rng, int max_frames, int classes) {
    int T = 1 + static_cast<int>(unit_uniform(rng) * max_frames);
    std::vector<std::set<int>> cands(static_cast<std::size_t>(T));
    for (auto& s : cands) {
        s.insert(static_cast<int>(unit_uniform(rng) * classes));
        while (unit_uniform(rng) < 0.45 && s.size() < static_cast<std::size_t>(classes))
            s.insert(static_cast<int>(unit_uniform(rng) * classes));
    }
    return cands;
}

}  // namespace

TEST_CASE("brute force reference: matching and mismatching candidate products") {
    PathEnumeration ok = brute_force_ctc({{1}, {1}}, {1}, 0);
    CHECK(ok.all_match);
    CHECK(ok.witness.empty());

    PathEnumeration bad = brute_force_ctc({{1}, {2}}, {1}, 0);
    CHECK_FALSE(bad.all_match);
    CHECK(bad.witness == std::vector<int>{1, 2});
    CHECK(ctc_collapse(bad.witness, 0) != std::vector<int>{1});
}

TEST_CASE("brute force reference honors its guard") {
    std::vector<std::set<int>> wide(8, std::set<int>{0, 1, 2});
    CHECK_THROWS_AS(brute_force_ctc(wide, {1}, 0, 100), SizeError);
}

TEST_CASE("enumeration agrees with the brute force reference") {
    std::uint64_t rng = 2468;
    for (int k = 0; k < 120; ++k) {
        std::vector<std::set<int>> cands = random_cands(rng, 4, 3);
        // target: collapse of the first path (always a member), or a foreign one
        std::vector<int> first;
        for (const auto& s : cands) first.push_back(*s.begin());
        std::vector<int> target = ctc_collapse(first, 0);
        if (unit_uniform(rng) < 0.3) target.push_back(2);  // often unreachable

        PathEnumeration fast = enumerate_ctc_paths(cands, target, 0);
        PathEnumeration slow = brute_force_ctc(cands, target, 0);
        CHECK(fast.all_match == slow.all_match);
        if (!fast.all_match) {
            CHECK(ctc_collapse(fast.witness, 0) != target);
            CHECK(ctc_collapse(slow.witness, 0) != target);
        }
    }
}

TEST_CASE("corner oracle: closed forms for tiny affine maps") {
    SUBCASE("y = 2x - 1 on [0,1]") {
        Network net;
        Node in = node("x", NodeKind::Input, {});
        in.out_dims = {1};
        net.nodes.push_back(in);
        Node y = node("y", NodeKind::Affine, {"x"});
        y.tensors["weight"] = Tensor({1, 1}, {2.0f});
        y.tensors["bias"] = Tensor({1}, {-1.0f});
        net.nodes.push_back(y);
        net.output = "y";
        net.decoder = DecoderKind::Ctc;
        net.frames = 1;
        net.meta.classes = 1;
        // classes == 1 fails the ctc contract; bypass validation, the oracle
        // only walks the graph
        net.rebuild_index();
        net.node("y").out_dims = {1};

        IntervalBox region;
        region.lo = {0.0};
        region.hi = {1.0};
        std::vector<double> lb, ub;
        corner_bound_oracle(net, region, lb, ub);
        REQUIRE(lb.size() == 1);
        CHECK(lb[0] == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(ub[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("mixed signs use the coordinate-wise corner rule") {
        Network net = two_affine_net();
        IntervalBox region;
        region.lo = {0.0, 0.0};
        region.hi = {1.0, 1.0};
        std::vector<double> lb, ub;
        corner_bound_oracle(net, region, lb, ub);
        // end-to-end rows: y0 = 0.0x0 - 1.85x1 + 0.45, y1 = 0.34x0 + 0.01x1 - 0.15
        CHECK(lb[0] == doctest::Approx(0.45 - 1.85).epsilon(1e-6));
        CHECK(ub[0] == doctest::Approx(0.45).epsilon(1e-6));
        CHECK(lb[1] == doctest::Approx(-0.15).epsilon(1e-6));
        CHECK(ub[1] == doctest::Approx(0.34 + 0.01 - 0.15).epsilon(1e-6));
    }
}

TEST_CASE("corner oracle matches propagation exactly on affine graphs") {
    Network net = two_affine_net();
    IntervalBox region;
    region.lo = {-0.3, 0.2};
    region.hi = {0.9, 1.4};

    std::vector<double> lb, ub;
    corner_bound_oracle(net, region, lb, ub);
    PropagateOptions opts;
    const LayerBounds& out = propagate(net, region, opts).layer("y");
    REQUIRE(out.width == lb.size());
    for (std::size_t i = 0; i < lb.size(); ++i) {
        CHECK(out.lb[i] == doctest::Approx(lb[i]).epsilon(1e-9));
        CHECK(out.ub[i] == doctest::Approx(ub[i]).epsilon(1e-9));
    }
}

TEST_CASE("corner oracle rejects non-affine nodes") {
    Network net = toys::unary_probe(NodeKind::ReLU, 1, 4);
    IntervalBox region = input_region(toys::random_image(1, 4), 0.01, 0.0, 1.0);
    std::vector<double> lb, ub;
    CHECK_THROWS_AS(corner_bound_oracle(net, region, lb, ub), KindError);
}

TEST_CASE("sampling oracle passes on an honest state") {
    Network net = toys::ctc(1);
    std::vector<double> image = toys::random_image(6, net.input_node().width());
    IntervalBox region = input_region(image, 0.001, 0.0, 1.0);
    PropagateOptions opts;
    AbstractState st = propagate(net, region, opts);

    SoundnessReport rep = sample_soundness(net, region, st, opts, 50, 77);
    CHECK(rep.ok());
    CHECK(rep.samples == 50);
    CHECK(rep.layers_checked > 5);
    CHECK(rep.worst_excess <= 1e-6);
}

TEST_CASE("sampling oracle flags a corrupted bound and caps the listing") {
    Network net = toys::ctc(1);
    std::vector<double> image = toys::random_image(6, net.input_node().width());
    IntervalBox region = input_region(image, 0.001, 0.0, 1.0);
    PropagateOptions opts;
    AbstractState st = propagate(net, region, opts);

    LayerBounds& out = st.layer(net.output);
    for (std::size_t i = 0; i < out.width; ++i) out.ub[i] = out.lb[i] - 1.0;

    SoundnessReport rep = sample_soundness(net, region, st, opts, 20, 77);
    CHECK_FALSE(rep.ok());
    CHECK(rep.worst_excess > 0.5);
    CHECK(rep.violations.size() <= 32);
    CHECK(rep.violations.front().layer == net.output);
    CHECK(rep.violations.front().excess > 0.0);
}

TEST_CASE("sampling oracle covers attention decoder steps") {
    Network net = toys::attention(1);
    std::vector<double> image = toys::random_image(7, net.input_node().width());
    std::vector<int> labels = greedy_labels(net, forward(net, image));
    REQUIRE(!labels.empty());

    IntervalBox region = input_region(image, 1e-4, 0.0, 1.0);
    PropagateOptions opts;
    AbstractState st = propagate_attention_steps(net, region, opts, labels);
    SoundnessReport rep = sample_soundness(net, region, st, opts, 10, 31, 1e-6, labels);
    CHECK(rep.ok());
    CHECK(rep.samples == 10);
}
