#include <doctest.h>

#include "seqcert/errors.hpp"
#include "seqcert/network.hpp"
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

Tensor full(std::vector<std::uint32_t> dims, float v) {
    return Tensor(dims, std::vector<float>(Tensor::count(dims), v));
}

// input[2] -> affine identity -> frames=1, classes=2 CTC head.
Network identity_net() {
    Network net;
    Node in = node("x", NodeKind::Input, {});
    in.out_dims = {2};
    net.nodes.push_back(in);

    Node fc = node("y", NodeKind::Affine, {"x"});
    fc.tensors["weight"] = Tensor({2, 2}, {1.0f, 0.0f, 0.0f, 1.0f});
    net.nodes.push_back(fc);

    net.output = "y";
    net.decoder = DecoderKind::Ctc;
    net.frames = 1;
    net.meta.classes = 2;
    net.meta.blank = 0;
    net.meta.alphabet = {"-", "a"};
    return net;
}

}  // namespace

TEST_CASE("minimal identity network validates and infers shapes") {
    Network net = identity_net();
    validate(net);
    CHECK(net.node("y").out_dims == std::vector<std::uint32_t>{2});
    CHECK(net.input_node().id == "x");
    CHECK(net.node("y").width() == 2);
}

TEST_CASE("affine weight shape mismatch is rejected") {
    Network net = identity_net();
    net.node("y").tensors["weight"] = full({2, 3}, 1.0f);  // 3 cols vs width-2 input
    CHECK_THROWS_AS(validate(net), ShapeError);
}

TEST_CASE("affine bias length must match the row count") {
    Network net = identity_net();
    net.node("y").tensors["bias"] = full({3}, 0.0f);
    CHECK_THROWS_AS(validate(net), ShapeError);
}

TEST_CASE("graph structure errors are parse errors") {
    SUBCASE("unknown input id") {
        Network net = identity_net();
        net.node("y").inputs = {"ghost"};
        CHECK_THROWS_AS(validate(net), ParseError);
    }
    SUBCASE("duplicate node id") {
        Network net = identity_net();
        Node other = node("y", NodeKind::ReLU, {"x"});
        net.nodes.push_back(other);
        CHECK_THROWS_AS(validate(net), ParseError);
    }
    SUBCASE("forward reference: nodes must be topologically ordered") {
        Network net = identity_net();
        Node pre = node("z", NodeKind::ReLU, {"y"});
        net.nodes.insert(net.nodes.begin() + 1, pre);  // consumes y before y exists
        CHECK_THROWS_AS(validate(net), ParseError);
    }
    SUBCASE("missing output id") {
        Network net = identity_net();
        net.output = "ghost";
        CHECK_THROWS_AS(validate(net), ParseError);
    }
}

TEST_CASE("decoder contract: ctc output width must be frames*classes") {
    Network net = identity_net();
    net.frames = 3;  // width 2 != 3*2
    CHECK_THROWS_AS(validate(net), ShapeError);
}

TEST_CASE("decoder contract: blank and go/eos must be in range") {
    Network net = identity_net();
    net.meta.blank = 7;
    CHECK_THROWS_AS(validate(net), ParseError);
}

TEST_CASE("conv2d shape inference") {
    Network net;
    Node in = node("img", NodeKind::Input, {});
    in.out_dims = {1, 4, 6};
    net.nodes.push_back(in);

    Node c = node("c", NodeKind::Conv2d, {"img"});
    c.tensors["weight"] = full({2, 1, 3, 3}, 0.1f);
    c.tensors["bias"] = full({2}, 0.0f);
    c.ints["ph"] = 1;
    c.ints["pw"] = 1;
    net.nodes.push_back(c);

    Node flat = node("y", NodeKind::Reshape, {"c"});
    flat.intlists["dims"] = {48};
    net.nodes.push_back(flat);

    net.output = "y";
    net.decoder = DecoderKind::Ctc;
    net.frames = 24;
    net.meta.classes = 2;
    net.meta.blank = 0;
    net.meta.alphabet = {"-", "a"};
    validate(net);
    CHECK(net.node("c").out_dims == std::vector<std::uint32_t>{2, 4, 6});
}

TEST_CASE("pool kinds demand a rank-3 input") {
    Network net = identity_net();
    Node p = node("p", NodeKind::MaxPool, {"x"});
    p.ints["kh"] = 2;
    p.ints["kw"] = 1;
    net.nodes.insert(net.nodes.begin() + 1, p);
    net.node("y").inputs = {"p"};
    CHECK_THROWS_AS(validate(net), ShapeError);
}

TEST_CASE("softmax group must divide the width") {
    Network net = identity_net();
    Node sm = node("sm", NodeKind::Softmax, {"x"});
    sm.ints["group"] = 3;
    net.nodes.insert(net.nodes.begin() + 1, sm);
    net.node("y").inputs = {"sm"};
    CHECK_THROWS_AS(validate(net), ShapeError);
}

TEST_CASE("missing required parameter is a parse error") {
    Network net = identity_net();
    Node lstm = node("cell", NodeKind::LstmCell, {"x"});
    // no "hidden", no weight
    net.nodes.insert(net.nodes.begin() + 1, lstm);
    net.node("y").inputs = {"x"};
    CHECK_THROWS_AS(validate(net), ParseError);
}

TEST_CASE("toy fixtures validate and stay under the parameter budget") {
    for (auto build : {toys::ctc, toys::attention, toys::vitstr}) {
        Network net = build(2);
        validate(net);  // idempotent
        std::size_t params = 0;
        for (const Node& n : net.nodes)
            for (const auto& [k, t] : n.tensors) params += t.size();
        if (net.attn) {
            params += net.attn->W.size() + net.attn->V.size() + net.attn->b.size() +
                      net.attn->a.size() + net.attn->Wlstm.size() + net.attn->blstm.size() +
                      net.attn->W0.size() + net.attn->b0.size();
        }
        CHECK(params < 50000);
        CHECK(net.meta.classes >= 2);
        CHECK(static_cast<std::size_t>(net.meta.classes) == net.meta.alphabet.size());
    }
}

TEST_CASE("kind names round-trip") {
    for (NodeKind k : {NodeKind::Input, NodeKind::Conv2d, NodeKind::Softmax, NodeKind::LstmCell,
                       NodeKind::AttentionBlock, NodeKind::BilinearSample, NodeKind::TpsGrid}) {
        CHECK(kind_from_name(kind_name(k)) == k);
    }
    CHECK_THROWS_AS(kind_from_name("NotAKind"), ParseError);
    for (DecoderKind d : {DecoderKind::Ctc, DecoderKind::Attention, DecoderKind::VitStr})
        CHECK(decoder_from_name(decoder_name(d)) == d);
}
