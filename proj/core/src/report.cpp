#include "seqcert/report.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "seqcert/errors.hpp"
#include "seqcert/runner.hpp"

namespace seqcert {

namespace {

using json = nlohmann::ordered_json;

// Fixed-format float: enough digits to round-trip, no locale, no exponent
// surprises for the magnitudes a report holds.
json jnum(double v) {
    if (!std::isfinite(v)) throw NumericalError("report_to_json: non-finite value");
    return v;
}

json eps_result_json(const EpsResult& r, bool no_timing) {
    json j;
    j["eps"] = jnum(r.eps);
    j["status"] = status_name(r.status);
    j["candidates"] = r.candks;
    j["time_ms"] = no_timing ? json(0.0) : jnum(r.time_ms);
    j["timeout"] = r.timeout;
    j["skipped_monotone"] = r.skipped_monotone;
    j["note"] = r.note;
    return j;
}

}  // namespace

std::vector<double> pct_certified(const Report& rep) {
    std::size_t neps = rep.cfg.eps.size();
    std::vector<double> pct(neps, 0.0);
    std::size_t total = 0;
    std::vector<std::size_t> cert(neps, 0);
    for (const SampleRow& s : rep.samples) {
        if (s.skipped) continue;
        ++total;
        for (std::size_t e = 0; e < neps && e < s.results.size(); ++e)
            if (s.results[e].status == Status::Certified) ++cert[e];
    }
    for (std::size_t e = 0; e < neps; ++e)
        pct[e] = total == 0 ? 0.0 : 100.0 * static_cast<double>(cert[e]) / total;
    for (std::size_t e = 1; e < neps; ++e)
        if (pct[e] > pct[e - 1] + 1e-12)
            throw NumericalError("pct_certified: certified percentage increased with eps");
    return pct;
}

std::string report_to_json(const Report& rep) {
    json j;
    j["command"] = rep.cfg.command;
    j["model"] = rep.cfg.model_path;
    j["dataset"] = rep.dataset;
    j["scheme"] = scheme_name(rep.cfg.scheme);
    j["refine"] = rep.cfg.refine;
    j["eps"] = json::array();
    for (double e : rep.cfg.eps) j["eps"].push_back(jnum(e));
    j["clip"] = json::array({jnum(rep.cfg.clip_lo), jnum(rep.cfg.clip_hi)});
    j["seed"] = rep.cfg.seed;
    j["timeout_s"] = rep.cfg.no_timing ? json(0.0) : jnum(rep.cfg.timeout_s);

    json rows = json::array();
    for (const SampleRow& s : rep.samples) {
        json r;
        r["id"] = s.id;
        r["path"] = s.path;
        r["label"] = s.label;
        r["decoded"] = s.decoded;
        r["skipped"] = s.skipped;
        json results = json::array();
        for (const EpsResult& er : s.results) results.push_back(eps_result_json(er, rep.cfg.no_timing));
        r["results"] = results;
        rows.push_back(r);
    }
    j["samples"] = rows;

    std::vector<double> pct = pct_certified(rep);
    json agg = json::array();
    for (double p : pct) agg.push_back(jnum(p));
    j["pct_certified"] = agg;
    return j.dump(2) + "\n";
}

std::string report_to_csv(const Report& rep) {
    std::ostringstream out;
    out << "dataset";
    for (double e : rep.cfg.eps) {
        std::ostringstream c;
        c.precision(10);
        c << e;
        out << ",eps=" << c.str();
    }
    out << "\n" << rep.dataset;
    std::vector<double> pct = pct_certified(rep);
    out.setf(std::ios::fixed);
    out.precision(1);
    for (double p : pct) out << "," << p;
    out << "\n";
    return out.str();
}

void write_report(const Report& rep, const std::string& path) {
    std::string js = report_to_json(rep);  // runs the monotonicity assertion
    std::string cs = report_to_csv(rep);

    std::ofstream jf(path, std::ios::binary);
    if (!jf) throw IoError("write_report: cannot open " + path);
    jf << js;

    std::string csv_path = path;
    std::size_t dot = csv_path.find_last_of('.');
    std::size_t slash = csv_path.find_last_of("/\\");
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
        csv_path.resize(dot);
    csv_path += ".csv";
    std::ofstream cf(csv_path, std::ios::binary);
    if (!cf) throw IoError("write_report: cannot open " + csv_path);
    cf << cs;
}

}  // namespace seqcert
