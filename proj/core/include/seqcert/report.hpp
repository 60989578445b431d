#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqcert/certify.hpp"
#include "seqcert/forward.hpp"

namespace seqcert {

struct RunConfig {
    std::string command = "certify";
    std::string model_path;
    std::string inputs_path;
    std::string labels_path;
    std::vector<double> eps;
    SoftmaxScheme scheme = SoftmaxScheme::Lse;
    bool refine = true;
    double clip_lo = 0.0, clip_hi = 1.0;
    std::uint64_t seed = 1;
    double timeout_s = 600.0;
    int workers = 1;
    std::string out_path;
    long limit = -1;          // max samples, -1 = all
    bool no_timing = false;   // zero all timing fields for byte-stable output
    int attack_steps = 12;
    int attack_restarts = 2;
};

struct EpsResult {
    double eps = 0.0;
    Status status = Status::Unknown;
    std::vector<int> candks;
    double time_ms = 0.0;
    bool timeout = false;
    bool skipped_monotone = false;  // not run: a smaller eps already failed
    std::string note;
};

struct SampleRow {
    std::string id;
    std::string path;
    std::string label;
    std::string decoded;
    bool skipped = false;  // decoded != label: excluded from certification
    std::vector<EpsResult> results;
};

struct Report {
    RunConfig cfg;
    std::string dataset;  // stem of the inputs list, used as the CSV row name
    std::vector<SampleRow> samples;
};

// Canonical JSON: fixed key order, fixed float formatting, no timestamps.
// Identical configs and seeds produce identical bytes (with no_timing set,
// identical across runs of any duration).
std::string report_to_json(const Report& rep);

// One row per dataset, one percentage-certified column per eps; mirrors the
// usual robustness-table layout.
std::string report_to_csv(const Report& rep);

// Writes JSON to path and the CSV next to it (extension swapped to .csv).
void write_report(const Report& rep, const std::string& path);

// Percentage certified per eps over non-skipped samples; asserted to be
// non-increasing before any report is written.
std::vector<double> pct_certified(const Report& rep);

}  // namespace seqcert
