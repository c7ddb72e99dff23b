#include <benchmark/benchmark.h>

#include "crnr/classify.hpp"
#include "crnr/numrange.hpp"
#include "crnr/pencil.hpp"
#include "crnr/reference.hpp"

namespace {

using namespace crnr;

Signal noisy_z1(double snr_db)
{
    const Signal clean = synth_unit_mixture(reference::z1().freqs, 60);
    return add_awgn(clean, snr_db, 42);
}

PencilPair z1_pencil(double D)
{
    return normalize_scale(split_pencil(build_block_hankel(noisy_z1(10.0), 40, 20)), D);
}

void BM_Cadzow(benchmark::State& state)
{
    const BlockHankel H = build_block_hankel(noisy_z1(10.0), 40, 20);
    CadzowOptions opts;
    opts.max_iter = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(cadzow_denoise(H, 10, opts));
}
BENCHMARK(BM_Cadzow)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

// Frequency inside (Z1 member) versus one rejected by the search.
void BM_Membership(benchmark::State& state)
{
    const PencilNorm norm(z1_pencil(1.6));
    const cplx theta = state.range(0) ? reference::z1().freqs[0] : reference::z2().freqs[0];
    const MembershipConfig cfg = CrnrConfig::default_membership();
    for (auto _ : state) benchmark::DoNotOptimize(membership(norm, theta, cfg));
}
BENCHMARK(BM_Membership)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CriticalScale(benchmark::State& state)
{
    const PencilNorm norm(z1_pencil(1.0));
    for (auto _ : state) benchmark::DoNotOptimize(critical_scale(norm, reference::z2().freqs[0]));
}
BENCHMARK(BM_CriticalScale)->Unit(benchmark::kMillisecond);

void BM_GMap(benchmark::State& state)
{
    const PencilPair P = split_pencil(build_block_hankel(noisy_z1(30.0), 40, 20));
    const std::vector<double> axis = linspace(-1.0, 1.0, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(g_map(P, axis, axis));
}
BENCHMARK(BM_GMap)->Arg(21)->Arg(41)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
