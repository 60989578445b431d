#include <doctest.h>

#include <chrono>
#include <set>
#include <vector>

#include "seqcert/certify.hpp"
#include "seqcert/decode.hpp"
#include "seqcert/errors.hpp"
#include "seqcert/forward.hpp"
#include "seqcert/toy_models.hpp"

using namespace seqcert;

namespace {

// input[frames*classes] -> affine identity scores.
Network score_net(int frames, int classes, DecoderKind kind) {
    Network net;
    std::uint32_t w = static_cast<std::uint32_t>(frames * classes);
    Node in;
    in.id = "x";
    in.kind = NodeKind::Input;
    in.out_dims = {w};
    net.nodes.push_back(in);

    Node fc;
    fc.id = "y";
    fc.kind = NodeKind::Affine;
    fc.inputs = {"x"};
    Tensor ident({w, w}, std::vector<float>(static_cast<std::size_t>(w) * w, 0.0f));
    for (std::uint32_t i = 0; i < w; ++i) ident.data[i * w + i] = 1.0f;
    fc.tensors["weight"] = std::move(ident);
    net.nodes.push_back(fc);

    net.output = "y";
    net.decoder = kind;
    net.frames = frames;
    net.meta.classes = classes;
    if (kind == DecoderKind::Ctc) {
        net.meta.blank = 0;
        net.meta.alphabet = {"-", "a"};
        net.meta.alphabet.resize(static_cast<std::size_t>(classes), "?");
    } else {
        net.meta.go = 0;
        net.meta.eos = 1;
        net.meta.alphabet = {"[GO]", "[s]", "a"};
        net.meta.alphabet.resize(static_cast<std::size_t>(classes), "?");
    }
    validate(net);
    return net;
}

CertifyRequest request(std::vector<double> image, double eps) {
    CertifyRequest req;
    req.image = std::move(image);
    req.eps = eps;
    req.clip_lo = 0.0;
    req.clip_hi = 1.0;
    return req;
}

}  // namespace

TEST_CASE("path enumeration: all candidate paths collapse to the target") {
    // frames: {a}, {a,-}, {t} with a=1, t=2, blank=0; target "at"
    std::vector<std::set<int>> cands = {{1}, {0, 1}, {2}};
    PathEnumeration pe = enumerate_ctc_paths(cands, {1, 2}, 0);
    CHECK(pe.all_match);
    CHECK(pe.paths_checked == 2);
    CHECK(pe.witness.empty());
}

TEST_CASE("path enumeration: first mismatch is returned as a witness") {
    std::vector<std::set<int>> cands = {{1}, {2}};
    PathEnumeration pe = enumerate_ctc_paths(cands, {1}, 0);
    CHECK_FALSE(pe.all_match);
    CHECK(pe.witness == std::vector<int>{1, 2});
    CHECK(pe.paths_checked == 1);
}

TEST_CASE("path enumeration: all-blank paths match the empty target") {
    std::vector<std::set<int>> cands = {{0}, {0}};
    PathEnumeration pe = enumerate_ctc_paths(cands, {}, 0);
    CHECK(pe.all_match);
    CHECK(pe.paths_checked == 1);
}

TEST_CASE("path enumeration: empty sets and blown budgets throw") {
    CHECK_THROWS_AS(enumerate_ctc_paths({{1}, {}}, {1}, 0), SizeError);
    std::vector<std::set<int>> wide(6, std::set<int>{0, 1, 2, 3});
    CHECK_THROWS_AS(enumerate_ctc_paths(wide, {1}, 0, 10), SizeError);
}

TEST_CASE("ctc certification on an exact score net") {
    Network net = score_net(3, 2, DecoderKind::Ctc);
    // frames decode to a, -, a  ->  "aa"
    std::vector<double> image = {0.0, 1.0, 1.0, 0.0, 0.0, 1.0};

    SUBCASE("small eps: every frame pinned") {
        Verdict v = certify_ctc(net, request(image, 0.1));
        CHECK(v.status == Status::Certified);
        CHECK(v.greedy == std::vector<int>{1, 1});
        CHECK(v.candks == std::vector<int>{1, 1, 1});
    }
    SUBCASE("large eps: a stray path escapes the collapse") {
        Verdict v = certify_ctc(net, request(image, 0.6));
        CHECK(v.status == Status::Unknown);
        CHECK(v.candks == std::vector<int>{2, 2, 2});
        CHECK(v.note == "a candidate path collapses to a different sequence");
    }
    SUBCASE("zero eps is always certifiable") {
        Verdict v = certify_ctc(net, request(image, 0.0));
        CHECK(v.status == Status::Certified);
    }
}

TEST_CASE("a frame with four candidates is reported, not enumerated") {
    Network net = score_net(1, 4, DecoderKind::Ctc);
    Verdict v = certify_ctc(net, request({0.5, 0.5, 0.5, 0.5}, 0.5));
    CHECK(v.status == Status::Unknown);
    CHECK(v.candks == std::vector<int>{4});
    CHECK(v.note == "frame 0 has 4 candidates");
}

TEST_CASE("vit certification pins every frame after the leading one") {
    Network net = score_net(3, 3, DecoderKind::VitStr);
    // [GO], a, [s]
    std::vector<double> image = {1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0};

    SUBCASE("small eps") {
        Verdict v = certify_vitstr(net, request(image, 0.1));
        CHECK(v.status == Status::Certified);
        CHECK(v.greedy == std::vector<int>{2});
        CHECK(v.candks == std::vector<int>{1, 1});
    }
    SUBCASE("large eps") {
        Verdict v = certify_vitstr(net, request(image, 0.6));
        CHECK(v.status == Status::Unknown);
        CHECK_FALSE(v.note.empty());
    }
}

TEST_CASE("certify_sample dispatches by decoder and stays consistent") {
    struct Case {
        Network net;
        std::uint64_t seed;
    };
    Case cases[] = {{toys::ctc(1), 21}, {toys::vitstr(1), 22}, {toys::attention(1), 23}};
    for (Case& c : cases) {
        std::vector<double> image = toys::random_image(c.seed, c.net.input_node().width());
        Verdict v = certify_sample(c.net, request(image, 1e-5));
        // sound certifier: never Falsified from bound reasoning alone
        CHECK(v.status != Status::Falsified);
        CHECK(v.greedy == greedy_labels(c.net, forward(c.net, image)));
        for (int k : v.candks) CHECK(k >= 1);
        if (v.status == Status::Certified) CHECK_FALSE(v.timeout);
    }
}

TEST_CASE("an expired deadline surfaces as an Unknown timeout verdict") {
    Network net = toys::ctc(1);
    std::vector<double> image = toys::random_image(9, net.input_node().width());
    CertifyRequest req = request(image, 0.001);
    req.prop.has_deadline = true;
    req.prop.deadline = std::chrono::steady_clock::now() - std::chrono::milliseconds(5);
    Verdict v = certify_sample(net, req);
    CHECK(v.status == Status::Unknown);
    CHECK(v.timeout);
    CHECK_FALSE(v.note.empty());
}

TEST_CASE("status names round-trip to stable strings") {
    CHECK(std::string(status_name(Status::Certified)) == "Certified");
    CHECK(std::string(status_name(Status::Unknown)) == "Unknown");
    CHECK(std::string(status_name(Status::Falsified)) == "Falsified");
}
