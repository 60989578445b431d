#include "seqcert/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "seqcert/attack.hpp"
#include "seqcert/certify.hpp"
#include "seqcert/decode.hpp"
#include "seqcert/errors.hpp"
#include "seqcert/oracle.hpp"
#include "seqcert/plane_fit.hpp"
#include "seqcert/serialize.hpp"
#include "seqcert/toy_models.hpp"

namespace seqcert {

std::string scheme_name(SoftmaxScheme s) {
    return s == SoftmaxScheme::Lse ? "lse" : "comp";
}

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct InputEntry {
    std::string id;
    std::string path;
};

std::vector<InputEntry> read_input_list(const std::string& list_path) {
    std::ifstream in(list_path);
    if (!in) throw IoError("read_input_list: cannot open " + list_path);
    fs::path base = fs::path(list_path).parent_path();
    std::vector<InputEntry> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        fs::path p(line);
        if (p.is_relative()) p = base / p;
        out.push_back({fs::path(line).stem().string(), p.string()});
    }
    return out;
}

std::map<std::string, std::string> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_labels: cannot open " + path);
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw ParseError("read_labels: missing tab separator in '" + line + "'");
        out[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return out;
}

void check_eps(const std::vector<double>& eps) {
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (eps[i] < 0) throw DomainError("run_certify: eps must be >= 0");
        if (i && eps[i] < eps[i - 1])
            throw DomainError("run_certify: eps values must be sorted ascending");
    }
}

PropagateOptions prop_opts(const RunConfig& cfg) {
    PropagateOptions p;
    p.scheme = cfg.scheme;
    p.refine_softmax = cfg.refine;
    p.mclp.seed = cfg.seed;
    return p;
}

void arm_deadline(PropagateOptions& p, double timeout_s) {
    if (timeout_s > 0) {
        p.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                        std::chrono::duration<double>(timeout_s));
        p.has_deadline = true;
    }
}

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Ascending-eps certification sweep; stops querying after the first
// non-certified eps so the per-sample verdict sequence is monotone.
std::vector<EpsResult> certify_sweep(const Network& net, const std::vector<double>& image,
                                     const RunConfig& cfg) {
    std::vector<EpsResult> out;
    bool blocked = false;
    for (double eps : cfg.eps) {
        EpsResult er;
        er.eps = eps;
        if (blocked) {
            er.skipped_monotone = true;
            er.note = "not run: a smaller eps was not certified";
            out.push_back(std::move(er));
            continue;
        }
        CertifyRequest req;
        req.image = image;
        req.eps = eps;
        req.clip_lo = cfg.clip_lo;
        req.clip_hi = cfg.clip_hi;
        req.prop = prop_opts(cfg);
        arm_deadline(req.prop, cfg.timeout_s);
        Clock::time_point t0 = Clock::now();
        try {
            Verdict v = certify_sample(net, req);
            er.status = v.status;
            er.candks = v.candks;
            er.timeout = v.timeout;
            er.note = v.note;
        } catch (const Error& e) {
            er.status = Status::Unknown;
            er.note = e.what();
        }
        er.time_ms = ms_since(t0);
        if (er.status != Status::Certified) blocked = true;
        out.push_back(std::move(er));
    }
    return out;
}

std::vector<EpsResult> falsify_sweep(const Network& net, const std::vector<double>& image,
                                     const RunConfig& cfg, std::uint64_t sample_seed) {
    std::vector<EpsResult> out;
    const ClassMeta& meta = net.meta;
    bool found = false;
    std::string found_note;
    for (double eps : cfg.eps) {
        EpsResult er;
        er.eps = eps;
        Clock::time_point t0 = Clock::now();
        if (found) {
            // an adversarial input inside a smaller ball stays inside this one
            er.status = Status::Falsified;
            er.note = found_note;
        } else {
            AttackConfig ac;
            ac.steps = cfg.attack_steps;
            ac.restarts = cfg.attack_restarts;
            ac.seed = sample_seed;
            ac.clip_lo = cfg.clip_lo;
            ac.clip_hi = cfg.clip_hi;
            try {
                AttackResult ar = pgd_falsify(net, image, eps, ac);
                if (ar.found) {
                    found = true;
                    found_note = "adversarial decode: '" + labels_to_text(meta, ar.adv_labels) + "'";
                    er.status = Status::Falsified;
                    er.note = found_note;
                } else {
                    er.status = Status::Unknown;
                    er.note = "attack did not flip the decode";
                }
            } catch (const Error& e) {
                er.status = Status::Unknown;
                er.note = e.what();
            }
        }
        er.time_ms = ms_since(t0);
        out.push_back(std::move(er));
    }
    return out;
}

struct LoadedSample {
    SampleRow row;
    std::vector<double> image;
    std::size_t index = 0;  // position in rep.samples
};

// Loads, decodes and label-filters the input list; fills rep.samples with one
// row per listed input and returns the non-skipped ones (limit applied).
std::vector<LoadedSample> select_samples(const Network& net, const RunConfig& cfg, Report& rep) {
    std::vector<InputEntry> entries = read_input_list(cfg.inputs_path);
    if (cfg.labels_path.empty())
        throw IoError("select_samples: a labels file is required to filter correct decodes");
    std::map<std::string, std::string> labels = read_labels(cfg.labels_path);

    std::vector<LoadedSample> picked;
    long used = 0;
    for (const InputEntry& e : entries) {
        if (cfg.limit >= 0 && used >= cfg.limit) break;
        SampleRow row;
        row.id = e.id;
        row.path = e.path;
        std::vector<double> image;
        try {
            image = to_doubles(load_tensor(e.path));
            row.decoded = labels_to_text(net.meta, greedy_labels(net, forward(net, image)));
        } catch (const Error& err) {
            row.skipped = true;
            row.decoded = "";
            row.label = "";
            rep.samples.push_back(std::move(row));
            continue;
        }
        auto it = labels.find(e.id);
        row.label = it == labels.end() ? "" : it->second;
        row.skipped = it == labels.end() || row.label != row.decoded;
        std::size_t index = rep.samples.size();
        rep.samples.push_back(row);
        if (!row.skipped) {
            ++used;
            picked.push_back({std::move(row), std::move(image), index});
        }
    }
    return picked;
}

template <typename SweepFn>
void run_sweeps(std::vector<LoadedSample>& picked, Report& rep, int workers, SweepFn sweep) {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            std::size_t k = next.fetch_add(1);
            if (k >= picked.size()) return;
            picked[k].row.results = sweep(picked[k]);
        }
    };
    std::size_t n = static_cast<std::size_t>(std::max(1, workers));
    if (n == 1 || picked.size() <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < std::min(n, picked.size()); ++i) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }
    for (LoadedSample& s : picked) rep.samples[s.index].results = std::move(s.row.results);
}

}  // namespace

Report run_certify(const RunConfig& cfg) {
    check_eps(cfg.eps);
    Network net = load_model(cfg.model_path);
    Report rep;
    rep.cfg = cfg;
    rep.dataset = fs::path(cfg.inputs_path).stem().string();
    std::vector<LoadedSample> picked = select_samples(net, cfg, rep);
    run_sweeps(picked, rep, cfg.workers,
               [&](const LoadedSample& s) { return certify_sweep(net, s.image, cfg); });
    return rep;
}

Report run_falsify(const RunConfig& cfg) {
    check_eps(cfg.eps);
    Network net = load_model(cfg.model_path);
    Report rep;
    rep.cfg = cfg;
    rep.cfg.command = "falsify";
    rep.dataset = fs::path(cfg.inputs_path).stem().string();
    std::vector<LoadedSample> picked = select_samples(net, cfg, rep);
    run_sweeps(picked, rep, cfg.workers, [&](const LoadedSample& s) {
        return falsify_sweep(net, s.image, cfg, cfg.seed ^ (s.index * 0x9e3779b9ULL + 1));
    });
    return rep;
}

int run_decode(const RunConfig& cfg, std::ostream& out) {
    Network net = load_model(cfg.model_path);
    std::vector<InputEntry> entries = read_input_list(cfg.inputs_path);
    out << std::setprecision(6);
    for (const InputEntry& e : entries) {
        std::vector<double> image = to_doubles(load_tensor(e.path));
        std::vector<double> scores = forward(net, image);
        std::string text = labels_to_text(net.meta, greedy_labels(net, scores));
        std::vector<double> conf = frame_confidences(
            scores, static_cast<int>(scores.size()) / net.meta.classes, net.meta.classes);
        double product = 1.0;
        for (double c : conf) product *= c;
        out << e.id << "\t" << text << "\t" << product << "\t";
        for (std::size_t i = 0; i < conf.size(); ++i) out << (i ? "," : "") << conf[i];
        out << "\n";
    }
    return 0;
}

SelfcheckResult run_selfcheck(std::uint64_t seed, bool inject_fault, std::ostream& log) {
    SelfcheckResult res;
    auto fail = [&](const std::string& m) {
        res.ok = false;
        res.failures.push_back(m);
        log << "FAIL " << m << "\n";
    };
    auto pass = [&](const std::string& m) { log << "ok   " << m << "\n"; };

    PropagateOptions opts;
    opts.mclp.seed = seed ? seed : 1;

    // 1. sampling soundness on the ctc fixture; the fault switch corrupts one
    //    layer's upper bounds, which the oracle must then catch by name.
    try {
        Network net = toys::ctc(seed + 11);
        std::vector<double> image = toys::random_image(seed + 12, net.input_node().width());
        IntervalBox region = input_region(image, 0.005, 0.0, 1.0);
        AbstractState st = propagate(net, region, opts);
        std::string corrupted;
        if (inject_fault) {
            LayerBounds& L = st.layers[st.layers.size() / 2];
            for (std::size_t i = 0; i < L.width; ++i) L.ub[i] = L.lb[i] - 1.0;
            corrupted = L.id;
            log << "injected fault into layer '" << corrupted << "'\n";
        }
        SoundnessReport rep = sample_soundness(net, region, st, opts, 300, seed + 13);
        if (inject_fault) {
            if (rep.ok())
                fail("fault injection escaped the sampling oracle");
            else
                fail("sampling soundness: corrupted layer '" + rep.violations[0].layer +
                     "' detected, excess " + std::to_string(rep.violations[0].excess));
        } else if (!rep.ok()) {
            fail("sampling soundness (ctc): layer '" + rep.violations[0].layer + "' excess " +
                 std::to_string(rep.violations[0].excess));
        } else {
            pass("sampling soundness, ctc fixture (300 samples)");
        }
    } catch (const Error& e) {
        fail(std::string("ctc soundness fixture: ") + e.what());
    }

    // 2. sampling soundness on the transformer fixture.
    try {
        Network net = toys::vitstr(seed + 21);
        std::vector<double> image = toys::random_image(seed + 22, net.input_node().width());
        IntervalBox region = input_region(image, 0.002, 0.0, 1.0);
        AbstractState st = propagate(net, region, opts);
        SoundnessReport rep = sample_soundness(net, region, st, opts, 120, seed + 23);
        if (!rep.ok())
            fail("sampling soundness (vit): layer '" + rep.violations[0].layer + "' excess " +
                 std::to_string(rep.violations[0].excess));
        else
            pass("sampling soundness, transformer fixture (120 samples)");
    } catch (const Error& e) {
        fail(std::string("transformer soundness fixture: ") + e.what());
    }

    // 3. decoder-step layers of the attention fixture.
    try {
        Network net = toys::attention(seed + 31);
        std::vector<double> image = toys::random_image(seed + 32, net.input_node().width());
        std::vector<double> scores = forward(net, image);
        int steps = static_cast<int>(scores.size()) / net.meta.classes;
        std::vector<int> labels = frame_argmax(scores, steps, net.meta.classes);
        IntervalBox region = input_region(image, 0.001, 0.0, 1.0);
        AbstractState st = propagate_attention_steps(net, region, opts, labels);
        SoundnessReport rep = sample_soundness(net, region, st, opts, 80, seed + 33, 1e-6, labels);
        if (!rep.ok())
            fail("sampling soundness (attention): layer '" + rep.violations[0].layer +
                 "' excess " + std::to_string(rep.violations[0].excess));
        else
            pass("sampling soundness, attention decoder steps (80 samples)");
    } catch (const Error& e) {
        fail(std::string("attention soundness fixture: ") + e.what());
    }

    // 4. path enumeration agrees with the exhaustive reference.
    try {
        std::uint64_t rng = seed + 41;
        auto rnd = [&](std::size_t m) {
            return std::min<std::size_t>(m - 1, static_cast<std::size_t>(unit_uniform(rng) * m));
        };
        int checked = 0;
        for (int k = 0; k < 300; ++k) {
            std::size_t T = 1 + rnd(6);
            int C = 2 + static_cast<int>(rnd(4));
            std::vector<std::set<int>> cands(T);
            std::vector<int> path(T);
            for (std::size_t t = 0; t < T; ++t) {
                std::size_t sz = 1 + rnd(std::min<std::size_t>(4, static_cast<std::size_t>(C)));
                while (cands[t].size() < sz) cands[t].insert(static_cast<int>(rnd(C)));
                auto it = cands[t].begin();
                std::advance(it, rnd(cands[t].size()));
                path[t] = *it;
            }
            std::vector<int> target = ctc_collapse(path, 0);
            PathEnumeration a = enumerate_ctc_paths(cands, target, 0);
            PathEnumeration b = brute_force_ctc(cands, target, 0);
            if (a.all_match != b.all_match) {
                fail("ctc enumeration disagrees with the reference on case " + std::to_string(k));
                break;
            }
            if (!a.all_match && a.witness != b.witness) {
                fail("ctc enumeration returned a different first witness on case " +
                     std::to_string(k));
                break;
            }
            ++checked;
        }
        if (checked == 300) pass("ctc path enumeration vs exhaustive reference (300 cases)");
    } catch (const Error& e) {
        fail(std::string("ctc enumeration fixture: ") + e.what());
    }

    // 5. softmax refinement must never loosen the final output interval.
    try {
        int worse = 0, cnt = 0;
        double relsum = 0.0;
        for (int k = 0; k < 40; ++k) {
            int sd = 2 + (k % 9);
            Network net = toys::relu_softmax_probe(seed + 100 + k, 6, 8, sd);
            std::vector<double> image = toys::random_image(seed + 200 + k, 6);
            IntervalBox region = input_region(image, 0.1, 0.0, 1.0);
            PropagateOptions on = opts, off = opts;
            // The simplex constraint only has room to act on the composed
            // bounds; the log-sum-exp intervals are already coordinatewise
            // exact, so refinement is a no-op there.
            on.scheme = SoftmaxScheme::Compositional;
            off.scheme = SoftmaxScheme::Compositional;
            on.refine_softmax = true;
            off.refine_softmax = false;
            AbstractState st_on = propagate(net, region, on);
            AbstractState st_off = propagate(net, region, off);
            const LayerBounds& a = st_on.layer(net.output);
            const LayerBounds& b = st_off.layer(net.output);
            double ga = 0, gb = 0;
            for (std::size_t i = 0; i < a.width; ++i) ga += a.ub[i] - a.lb[i];
            for (std::size_t i = 0; i < b.width; ++i) gb += b.ub[i] - b.lb[i];
            if (ga > gb + 1e-9) ++worse;
            if (gb > 1e-12) relsum += (gb - ga) / gb;
            ++cnt;
        }
        if (worse > 0)
            fail("softmax refinement loosened the output interval in " + std::to_string(worse) +
                 "/40 probes");
        else
            pass("softmax refinement tightening (40 probes, mean reduction " +
                 std::to_string(100.0 * relsum / cnt) + "%)");
    } catch (const Error& e) {
        fail(std::string("refinement fixture: ") + e.what());
    }

    res.summary = res.ok ? "selfcheck passed" : "selfcheck failed: " +
                                                    std::to_string(res.failures.size()) +
                                                    " finding(s)";
    log << res.summary << "\n";
    return res;
}

}  // namespace seqcert
