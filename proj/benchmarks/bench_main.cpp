#include <benchmark/benchmark.h>

#include "semap/covisibility.hpp"
#include "semap/photometric.hpp"
#include "semap/synth.hpp"
#include "semap/tcl.hpp"

namespace {

using namespace semap;

const SequenceDataset& streetDataset() {
  static const SequenceDataset ds = [] {
    const synth::SceneSetup setup = synth::makePreset(synth::ScenePreset::kStreet, 20);
    synth::GeneratorOptions opt;
    opt.points_per_kf = 5000;
    opt.render_images = true;
    opt.render_right_images = true;
    synth::NoiseModel noise;
    noise.flip_rate = 0.2;
    return synth::corrupt(synth::generate(setup.scene, setup.trajectory, setup.rig, setup.palette, opt).dataset,
                          noise);
  }();
  return ds;
}

void BM_CovisibleSet(benchmark::State& state) {
  const SequenceDataset& ds = streetDataset();
  const CovisibilityConfig cfg{static_cast<int>(state.range(0)), StereoMode::kStereo, {}};
  std::size_t i = 0;
  for (auto _ : state) {
    const PointRef ref{10, i++ % ds.keyframes[10].points.size()};
    benchmark::DoNotOptimize(covisibleSet(ref, ds, cfg));
  }
}
BENCHMARK(BM_CovisibleSet)->Arg(3)->Arg(7)->Arg(15);

void BM_LabelAllPoints(benchmark::State& state) {
  const SequenceDataset& ds = streetDataset();
  TclConfig cfg;
  cfg.mode = state.range(0) ? StereoMode::kStereo : StereoMode::kMono;
  const auto threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(labelAllPoints(ds, cfg, threads));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * ds.pointCount()));
}
BENCHMARK(BM_LabelAllPoints)->Args({0, 1})->Args({1, 1})->Args({1, 4})->Unit(benchmark::kMillisecond);

void BM_WindowEnergy(benchmark::State& state) {
  const SequenceDataset& ds = streetDataset();
  const std::vector<std::size_t> window = {0, 1, 2, 3, 4, 5, 6};
  for (auto _ : state) benchmark::DoNotOptimize(windowEnergy(ds, window, {}));
}
BENCHMARK(BM_WindowEnergy)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
