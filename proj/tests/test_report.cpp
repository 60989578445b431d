#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "seqcert/errors.hpp"
#include "seqcert/report.hpp"

using namespace seqcert;
namespace fs = std::filesystem;

namespace {

EpsResult eres(double eps, Status st, double ms) {
    EpsResult r;
    r.eps = eps;
    r.status = st;
    r.candks = {1, 1};
    r.time_ms = ms;
    return r;
}

SampleRow row(const std::string& id, Status at_small, Status at_large, double ms) {
    SampleRow s;
    s.id = id;
    s.path = "img" + id + ".pten";
    s.label = "at";
    s.decoded = "at";
    s.results = {eres(0.001, at_small, ms), eres(0.01, at_large, ms * 2)};
    return s;
}

Report make_report(bool no_timing, double ms) {
    Report rep;
    rep.cfg.command = "certify";
    rep.cfg.model_path = "toy.json";
    rep.cfg.eps = {0.001, 0.01};
    rep.cfg.no_timing = no_timing;
    rep.dataset = "toyset";
    rep.samples = {row("0", Status::Certified, Status::Certified, ms),
                   row("1", Status::Certified, Status::Unknown, ms)};
    return rep;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("identical reports serialize to identical bytes") {
    std::string a = report_to_json(make_report(false, 12.5));
    std::string b = report_to_json(make_report(false, 12.5));
    CHECK(a == b);
    CHECK(!a.empty());
    CHECK(a.back() == '\n');
}

TEST_CASE("no_timing erases every duration from the bytes") {
    std::string fast = report_to_json(make_report(true, 12.5));
    std::string slow = report_to_json(make_report(true, 987.25));
    CHECK(fast == slow);

    std::string timed_fast = report_to_json(make_report(false, 12.5));
    std::string timed_slow = report_to_json(make_report(false, 987.25));
    CHECK(timed_fast != timed_slow);
}

TEST_CASE("certified percentages count only non-skipped samples") {
    Report rep = make_report(false, 1.0);
    std::vector<double> pct = pct_certified(rep);
    REQUIRE(pct.size() == 2);
    CHECK(pct[0] == doctest::Approx(100.0));
    CHECK(pct[1] == doctest::Approx(50.0));

    rep.samples[0].skipped = true;  // drops one certified row from both columns
    pct = pct_certified(rep);
    CHECK(pct[0] == doctest::Approx(100.0));
    CHECK(pct[1] == doctest::Approx(0.0));
}

TEST_CASE("a percentage that grows with eps is refused") {
    Report rep = make_report(false, 1.0);
    rep.samples[0].results[0].status = Status::Unknown;
    rep.samples[1].results[0].status = Status::Unknown;  // 0% then 50%
    CHECK_THROWS_AS(pct_certified(rep), NumericalError);
    CHECK_THROWS_AS(report_to_json(rep), NumericalError);
}

TEST_CASE("csv lays out one row with one column per eps") {
    std::string csv = report_to_csv(make_report(true, 0.0));
    CHECK(csv == "dataset,eps=0.001,eps=0.01\ntoyset,100.0,50.0\n");
}

TEST_CASE("non-finite values never reach the output") {
    Report rep = make_report(false, 1.0);
    rep.samples[0].results[0].time_ms = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(report_to_json(rep), NumericalError);
}

TEST_CASE("write_report puts the csv next to the json") {
    fs::path dir = fs::temp_directory_path() / "seqcert_report_tests";
    fs::create_directories(dir);
    fs::path out = dir / "run.json";

    Report rep = make_report(true, 0.0);
    write_report(rep, out.string());
    CHECK(slurp(out) == report_to_json(rep));
    CHECK(slurp(dir / "run.csv") == report_to_csv(rep));
    fs::remove_all(dir);

    CHECK_THROWS_AS(write_report(rep, "/nonexistent_dir_zz9/run.json"), IoError);
}
