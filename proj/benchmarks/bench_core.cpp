#include <benchmark/benchmark.h>

#include "latent/classifier.hpp"
#include "latent/rng.hpp"
#include "latent/transformer.hpp"
#include "latent/video.hpp"
#include "latent/world.hpp"

namespace {

using namespace latent;

void BM_ClassifierPredict(benchmark::State& state) {
    const auto model = build_classifier(3, 64, 128, 8, 1);
    Rng rng(2);
    const Vec x = rng.gaussian_vec(128);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.predict_flat(x));
    }
}
BENCHMARK(BM_ClassifierPredict);

void BM_TransformerApply(benchmark::State& state) {
    auto model = make_transformer(TransformerVariant::linear, 128, 0);
    Rng rng(3);
    for (auto& w : model.layers()[0].weights.data) w = 0.01 * rng.gaussian();
    const LatentCode code(4, 32, rng.gaussian_vec(128));
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.apply(code, 1.0));
    }
}
BENCHMARK(BM_TransformerApply);

void BM_TransformLossStep(benchmark::State& state) {
    const auto world = make_world(5, 2, 16, 4, {});
    const auto dataset = sample_dataset(world, 64, 6);
    auto classifier = build_classifier(3, 32, 32, 4, 7);
    classifier.freeze();
    auto model = make_transformer(TransformerVariant::linear, 32, 0);
    std::vector<const LatentCode*> batch;
    for (std::size_t i = 0; i < 32; ++i) batch.push_back(&dataset.samples[i].code);
    const Vec gamma_row(4, 0.0);
    for (auto _ : state) {
        auto grads = model.zero_like();
        benchmark::DoNotOptimize(
            transform_loss(model, classifier, batch, gamma_row, {}, &grads));
    }
}
BENCHMARK(BM_TransformLossStep);

void BM_PoissonBlend(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    ImageGrid source(side, side, 3);
    ImageGrid target(side, side, 3);
    Rng rng(11);
    for (auto& v : source.values) v = rng.uniform01();
    for (auto& v : target.values) v = rng.uniform01();
    MaskGrid mask(side, side);
    for (std::size_t y = 2; y + 2 < side; ++y) {
        for (std::size_t x = 2; x + 2 < side; ++x) mask.set(y, x, true);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(poisson_blend(source, target, mask));
    }
}
BENCHMARK(BM_PoissonBlend)->Arg(16)->Arg(32);

void BM_GaussianSmooth(benchmark::State& state) {
    LandmarkTrack track(240, 68);
    Rng rng(13);
    for (auto& v : track.values) v = 512.0 + 5.0 * rng.gaussian();
    for (auto _ : state) {
        benchmark::DoNotOptimize(gaussian_smooth_track(track, 2.0));
    }
}
BENCHMARK(BM_GaussianSmooth);

}  // namespace

BENCHMARK_MAIN();
