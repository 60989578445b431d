// Command-line front end: certify | decode | falsify | selfcheck.
// Exit codes: 0 success, 1 property violation, 2 usage or load failure.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "seqcert/errors.hpp"
#include "seqcert/report.hpp"
#include "seqcert/runner.hpp"

using namespace seqcert;

namespace {

void add_common(CLI::App* cmd, RunConfig& cfg, bool needs_labels) {
    cmd->add_option("--model", cfg.model_path, "model manifest (JSON)")->required();
    cmd->add_option("--inputs", cfg.inputs_path, "input list, one tensor path per line")
        ->required();
    if (needs_labels)
        cmd->add_option("--labels", cfg.labels_path, "ground truth, lines of id<TAB>text")
            ->required();

    cmd->add_option("--eps", cfg.eps, "perturbation budgets, ascending")->delimiter(',');
    cmd->add_option_function<std::vector<double>>(
           "--clip",
           [&cfg](const std::vector<double>& v) {
               if (v.size() != 2) throw CLI::ValidationError("--clip needs lo,hi");
               cfg.clip_lo = v[0];
               cfg.clip_hi = v[1];
           },
           "pixel clip range lo,hi (default 0,1)")
        ->delimiter(',');
    cmd->add_option_function<std::string>(
           "--softmax",
           [&cfg](const std::string& s) {
               if (s == "lse")
                   cfg.scheme = SoftmaxScheme::Lse;
               else if (s == "comp")
                   cfg.scheme = SoftmaxScheme::Compositional;
               else
                   throw CLI::ValidationError("--softmax must be lse or comp");
           },
           "softmax bounding scheme: lse | comp (default lse)");
    cmd->add_option_function<std::string>(
           "--refine",
           [&cfg](const std::string& s) {
               if (s == "on")
                   cfg.refine = true;
               else if (s == "off")
                   cfg.refine = false;
               else
                   throw CLI::ValidationError("--refine must be on or off");
           },
           "softmax refinement: on | off (default on)");
    cmd->add_option("--seed", cfg.seed, "RNG seed for sampled plane fits");
    cmd->add_option("--timeout", cfg.timeout_s, "per-run timeout in seconds (default 600)");
    cmd->add_option("--workers", cfg.workers, "sample-level worker threads (default 1)");
    cmd->add_option("--limit", cfg.limit, "max certified samples, -1 = all");
    cmd->add_option("--out", cfg.out_path, "report path (JSON; CSV written next to it)");
    cmd->add_flag("--no-timing", cfg.no_timing, "zero timing fields for byte-stable reports");
}

int finish_report(const Report& rep, const RunConfig& cfg) {
    if (!cfg.out_path.empty()) {
        write_report(rep, cfg.out_path);
        std::cout << "report written to " << cfg.out_path << "\n";
    } else {
        std::cout << report_to_json(rep);
    }
    std::vector<double> pct = pct_certified(rep);
    for (std::size_t e = 0; e < pct.size(); ++e)
        std::cout << "eps=" << cfg.eps[e] << ": " << pct[e] << "% certified\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sound robustness certification for image-to-sequence models"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::uint64_t sc_seed = 1;
    bool sc_inject = false;

    CLI::App* certify = app.add_subcommand("certify", "certify samples over an eps sweep");
    add_common(certify, cfg, true);

    CLI::App* decode = app.add_subcommand("decode", "greedy decode with confidences");
    decode->add_option("--model", cfg.model_path, "model manifest (JSON)")->required();
    decode->add_option("--inputs", cfg.inputs_path, "input list")->required();

    CLI::App* falsify = app.add_subcommand("falsify", "search for adversarial inputs");
    add_common(falsify, cfg, true);
    falsify->add_option("--attack-steps", cfg.attack_steps, "PGD iterations per restart");
    falsify->add_option("--attack-restarts", cfg.attack_restarts, "PGD restarts");

    CLI::App* selfcheck = app.add_subcommand("selfcheck", "built-in property fixtures");
    selfcheck->add_option("--seed", sc_seed, "fixture seed");
    selfcheck->add_flag("--inject-fault", sc_inject,
                        "corrupt one relaxation; the run must fail and name it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (cfg.eps.empty()) cfg.eps = {0.001};

    try {
        if (certify->parsed()) {
            cfg.command = "certify";
            return finish_report(run_certify(cfg), cfg);
        }
        if (decode->parsed()) {
            cfg.command = "decode";
            return run_decode(cfg, std::cout);
        }
        if (falsify->parsed()) {
            cfg.command = "falsify";
            return finish_report(run_falsify(cfg), cfg);
        }
        if (selfcheck->parsed()) {
            SelfcheckResult r = run_selfcheck(sc_seed, sc_inject, std::cout);
            return r.ok ? 0 : 1;
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
