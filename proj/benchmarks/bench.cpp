// Micro benchmarks for the hot paths: backsubstitution sweeps, whole-graph
// propagation and sampled plane fitting.

#include <benchmark/benchmark.h>

#include "seqcert/certify.hpp"
#include "seqcert/plane_fit.hpp"
#include "seqcert/propagate.hpp"
#include "seqcert/toy_models.hpp"

using namespace seqcert;

namespace {

struct CtcFixture {
    Network net = toys::ctc(7);
    std::vector<double> image = toys::random_image(8, net.input_node().width());
    IntervalBox region = input_region(image, 0.003, 0.0, 1.0);
    PropagateOptions opts;
};

CtcFixture& ctc_fixture() {
    static CtcFixture f;
    return f;
}

void bench_propagate_ctc(benchmark::State& state) {
    CtcFixture& f = ctc_fixture();
    for (auto _ : state) {
        AbstractState st = propagate(f.net, f.region, f.opts);
        benchmark::DoNotOptimize(st.layers.back().lb.data());
    }
}
BENCHMARK(bench_propagate_ctc)->Unit(benchmark::kMillisecond);

void bench_backsubstitute_logits(benchmark::State& state) {
    CtcFixture& f = ctc_fixture();
    AbstractState st = propagate(f.net, f.region, f.opts);
    const LayerBounds& top = st.layer(f.net.output);
    std::vector<double> out;
    for (auto _ : state) {
        backsubstitute_batch(st, top.lo, Dir::Lower, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(bench_backsubstitute_logits)->Unit(benchmark::kMicrosecond);

void bench_plane_fit(benchmark::State& state) {
    McLpConfig cfg;
    Box2 box{-1.2, 1.7, -0.9, 2.1};
    for (auto _ : state) {
        PlanePair r = surface_relax(SurfaceKind::SigTanh, box, cfg);
        benchmark::DoNotOptimize(&r);
    }
}
BENCHMARK(bench_plane_fit)->Unit(benchmark::kMicrosecond);

void bench_certify_ctc_sample(benchmark::State& state) {
    CtcFixture& f = ctc_fixture();
    CertifyRequest req;
    req.image = f.image;
    req.eps = 0.003;
    for (auto _ : state) {
        Verdict v = certify_ctc(f.net, req);
        benchmark::DoNotOptimize(&v);
    }
}
BENCHMARK(bench_certify_ctc_sample)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
