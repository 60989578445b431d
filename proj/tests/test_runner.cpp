#include <doctest/doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "seqcert/decode.hpp"
#include "seqcert/errors.hpp"
#include "seqcert/forward.hpp"
#include "seqcert/report.hpp"
#include "seqcert/runner.hpp"
#include "seqcert/serialize.hpp"
#include "seqcert/tensor.hpp"
#include "seqcert/toy_models.hpp"

using namespace seqcert;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() /
              ("seqcert_runner_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter()++));
        fs::create_directories(dir / "imgs");
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string path(const std::string& rel) const { return (dir / rel).string(); }
};

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(bool(out));
    out << body;
}

// Saves the fixture model and three images; ids "a","b","c". The labels file
// marks "b" with a wrong transcript so select_samples must skip it.
struct Fixture {
    TempDir tmp;
    Network net;
    std::vector<std::string> texts;  // true greedy decodes for a,b,c

    explicit Fixture(std::uint64_t seed = 5) : net(toys::ctc(seed)) {
        save_model(net, tmp.path("model.json"), tmp.path("model.bin"));
        const char* ids[3] = {"a", "b", "c"};
        std::string list = "# fixture inputs\n\n";
        std::string labels;
        for (int k = 0; k < 3; ++k) {
            std::vector<double> image =
                toys::random_image(seed + 7 * k, net.input_node().width());
            save_tensor(tmp.path(std::string("imgs/") + ids[k] + ".pten"),
                        to_tensor({static_cast<std::uint32_t>(image.size())}, image));
            // decode what the saved float32 image actually contains
            std::vector<double> stored =
                to_doubles(load_tensor(tmp.path(std::string("imgs/") + ids[k] + ".pten")));
            texts.push_back(labels_to_text(net.meta, greedy_labels(net, forward(net, stored))));
            list += std::string("imgs/") + ids[k] + ".pten\n";
            labels += std::string(ids[k]) + "\t" + (k == 1 ? "@@wrong@@" : texts.back()) + "\n";
        }
        write_text(tmp.path("inputs.txt"), list);
        write_text(tmp.path("labels.tsv"), labels);
    }

    RunConfig config() const {
        RunConfig cfg;
        cfg.model_path = tmp.path("model.json");
        cfg.inputs_path = tmp.path("inputs.txt");
        cfg.labels_path = tmp.path("labels.tsv");
        cfg.eps = {0.0005, 0.001};
        cfg.no_timing = true;
        cfg.timeout_s = 120.0;
        return cfg;
    }
};

}  // namespace

TEST_CASE("certify run covers every listed input and skips wrong labels") {
    Fixture fx;
    Report rep = run_certify(fx.config());

    CHECK(rep.dataset == "inputs");
    REQUIRE(rep.samples.size() == 3);
    CHECK(rep.samples[0].id == "a");
    CHECK(rep.samples[1].id == "b");
    CHECK(rep.samples[2].id == "c");

    CHECK_FALSE(rep.samples[0].skipped);
    CHECK(rep.samples[1].skipped);
    CHECK(rep.samples[1].label == "@@wrong@@");
    CHECK(rep.samples[1].decoded == fx.texts[1]);
    CHECK(rep.samples[1].results.empty());
    CHECK_FALSE(rep.samples[2].skipped);

    for (std::size_t s : {std::size_t(0), std::size_t(2)}) {
        const SampleRow& row = rep.samples[s];
        CHECK(row.decoded == fx.texts[s]);
        REQUIRE(row.results.size() == 2);
        CHECK(row.results[0].eps == 0.0005);
        CHECK(row.results[1].eps == 0.001);
        // a non-certified small eps must short-circuit the larger one
        if (row.results[0].status != Status::Certified) {
            CHECK(row.results[1].skipped_monotone);
            CHECK(row.results[1].note == "not run: a smaller eps was not certified");
        }
        for (const EpsResult& er : row.results)
            CHECK(er.status != Status::Falsified);  // certify never attacks
    }

    // aggregate percentages only count the two non-skipped samples
    for (double eps : {0.0005, 0.001}) {
        double pct = pct_certified(rep, eps);
        CHECK(pct >= 0.0);
        CHECK(pct <= 100.0);
        CHECK(std::fmod(pct, 50.0) == 0.0);  // multiples of 1/2 over 2 samples
    }
}

TEST_CASE("sample limit counts certified-eligible rows only") {
    Fixture fx;
    RunConfig cfg = fx.config();
    cfg.limit = 1;
    // list order is a, b, c; b is mislabeled so it must not consume the limit
    Report rep = run_certify(cfg);
    REQUIRE(rep.samples.size() >= 1);
    CHECK_FALSE(rep.samples[0].skipped);
    CHECK_FALSE(rep.samples[0].results.empty());
    std::size_t used = 0;
    for (const SampleRow& row : rep.samples)
        if (!row.skipped) ++used;
    CHECK(used == 1);
}

TEST_CASE("certify output is byte-stable when timing is erased") {
    Fixture fx;
    RunConfig cfg = fx.config();
    std::string a = report_to_json(run_certify(cfg));
    std::string b = report_to_json(run_certify(cfg));
    CHECK(a == b);
    CHECK(report_to_csv(run_certify(cfg)) == report_to_csv(run_certify(cfg)));
}

TEST_CASE("eps list validation") {
    Fixture fx;
    RunConfig cfg = fx.config();
    cfg.eps = {-0.01};
    CHECK_THROWS_AS(run_certify(cfg), DomainError);
    cfg.eps = {0.01, 0.001};
    CHECK_THROWS_AS(run_certify(cfg), DomainError);
}

TEST_CASE("input and label file errors") {
    Fixture fx;

    RunConfig missing_list = fx.config();
    missing_list.inputs_path = fx.tmp.path("no_such_list.txt");
    CHECK_THROWS_AS(run_certify(missing_list), IoError);

    RunConfig no_labels = fx.config();
    no_labels.labels_path = "";
    CHECK_THROWS_AS(run_certify(no_labels), IoError);

    RunConfig bad_labels = fx.config();
    write_text(fx.tmp.path("bad.tsv"), "a no-tab-here\n");
    bad_labels.labels_path = fx.tmp.path("bad.tsv");
    CHECK_THROWS_AS(run_certify(bad_labels), ParseError);
}

TEST_CASE("unreadable input becomes a skipped row, not a failure") {
    Fixture fx;
    write_text(fx.tmp.path("imgs/broken.pten"), "not a tensor");
    write_text(fx.tmp.path("inputs.txt"), "imgs/broken.pten\nimgs/a.pten\n");
    write_text(fx.tmp.path("labels.tsv"), "broken\tx\na\t" + fx.texts[0] + "\n");
    Report rep = run_certify(fx.config());
    REQUIRE(rep.samples.size() == 2);
    CHECK(rep.samples[0].id == "broken");
    CHECK(rep.samples[0].skipped);
    CHECK(rep.samples[0].decoded.empty());
    CHECK_FALSE(rep.samples[1].skipped);
}

TEST_CASE("decode run prints id, text and confidences per input") {
    Fixture fx;
    std::ostringstream out;
    int rc = run_decode(fx.config(), out);
    CHECK(rc == 0);

    std::istringstream lines(out.str());
    std::string line;
    int n = 0;
    const char* ids[3] = {"a", "b", "c"};
    while (std::getline(lines, line)) {
        REQUIRE(n < 3);
        std::istringstream fields(line);
        std::string id, text, product, confs;
        std::getline(fields, id, '\t');
        std::getline(fields, text, '\t');
        std::getline(fields, product, '\t');
        std::getline(fields, confs, '\t');
        CHECK(id == ids[n]);
        CHECK(text == fx.texts[n]);
        double p = std::stod(product);
        CHECK(p > 0.0);
        CHECK(p <= 1.0);
        CHECK_FALSE(confs.empty());
        ++n;
    }
    CHECK(n == 3);
}

TEST_CASE("falsify run marks found counterexamples and stays found at larger eps") {
    Fixture fx;
    RunConfig cfg = fx.config();
    cfg.eps = {0.001, 0.25, 0.5};
    cfg.attack_steps = 8;
    cfg.attack_restarts = 1;
    Report rep = run_falsify(cfg);
    CHECK(rep.cfg.command == "falsify");
    for (const SampleRow& row : rep.samples) {
        if (row.skipped) continue;
        REQUIRE(row.results.size() == 3);
        bool found = false;
        for (const EpsResult& er : row.results) {
            CHECK(er.status != Status::Certified);  // falsify never certifies
            if (found) {
                // an adversarial point in a smaller ball is in every larger one
                CHECK(er.status == Status::Falsified);
            }
            if (er.status == Status::Falsified) {
                found = true;
                CHECK(er.note.find("adversarial decode:") == 0);
            } else {
                CHECK(er.note == "attack did not flip the decode");
            }
        }
    }
}

TEST_CASE("selfcheck passes clean and catches an injected fault by layer name") {
    std::ostringstream log;
    SelfcheckResult clean = run_selfcheck(7, false, log);
    CHECK(clean.ok);
    CHECK(clean.failures.empty());
    CHECK(log.str().find("ok   sampling soundness") != std::string::npos);

    std::ostringstream flog;
    SelfcheckResult faulty = run_selfcheck(7, true, flog);
    CHECK_FALSE(faulty.ok);
    REQUIRE_FALSE(faulty.failures.empty());
    // the oracle must name the corrupted layer, not merely fail
    CHECK(faulty.failures[0].find("corrupted layer '") != std::string::npos);
    CHECK(faulty.failures[0].find("detected") != std::string::npos);
}

TEST_CASE("scheme names match the command-line vocabulary") {
    CHECK(scheme_name(SoftmaxScheme::Lse) == "lse");
    CHECK(scheme_name(SoftmaxScheme::Compositional) == "comp");
}
