#include <benchmark/benchmark.h>

#include "eyas/classifier.hpp"
#include "eyas/codec.hpp"
#include "eyas/localizer.hpp"
#include "eyas/metrics.hpp"
#include "eyas/pipeline.hpp"
#include "eyas/segmenter.hpp"
#include "eyas/synthgen.hpp"

using namespace eyas;

namespace {

const RenderedScene& scene() {
    static const RenderedScene r = render(gen_scene(GenParams{}, 42));
    return r;
}

void BM_Render(benchmark::State& state) {
    const SynthScene s = gen_scene(GenParams{}, 42);
    for (auto _ : state) benchmark::DoNotOptimize(render(s));
}
BENCHMARK(BM_Render)->Unit(benchmark::kMillisecond);

void BM_EnhanceContrast(benchmark::State& state) {
    const GrayImage g = to_gray(scene().image, ChannelMix::green);
    for (auto _ : state) benchmark::DoNotOptimize(enhance_contrast(g, 8, 2.0));
}
BENCHMARK(BM_EnhanceContrast)->Unit(benchmark::kMillisecond);

void BM_TemplateMatch(benchmark::State& state) {
    const GrayImage g = to_gray(scene().image, ChannelMix::red);
    const GrayImage t = disk_template(static_cast<double>(state.range(0)), state.range(0) * 3 / 2);
    for (auto _ : state) benchmark::DoNotOptimize(match_template_ncc(g, t));
}
BENCHMARK(BM_TemplateMatch)->Arg(51)->Arg(77)->Arg(102)->Unit(benchmark::kMillisecond);

void BM_LocateOnh(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(locate_onh(scene().image));
}
BENCHMARK(BM_LocateOnh)->Unit(benchmark::kMillisecond);

void BM_SegmentVessels(benchmark::State& state) {
    const ClassicalBackend backend(Structure::vessels);
    for (auto _ : state) benchmark::DoNotOptimize(segment_vessels(scene().image, backend));
}
BENCHMARK(BM_SegmentVessels)->Unit(benchmark::kMillisecond);

void BM_ArteryCaliber(benchmark::State& state) {
    const ClassifierInput in = make_input(scene().image, std::nullopt, scene().onh_mask, InputFormat::mask);
    const OnhFindings disc = classify_onh_shape(in);
    for (auto _ : state) benchmark::DoNotOptimize(classify_artery_caliber(scene().vessel_truth, disc));
}
BENCHMARK(BM_ArteryCaliber)->Unit(benchmark::kMillisecond);

void BM_Iou(benchmark::State& state) {
    const BinaryMask& a = scene().vessel_truth.vessel;
    const BinaryMask& b = scene().onh_mask;
    for (auto _ : state) benchmark::DoNotOptimize(iou(a, b));
}
BENCHMARK(BM_Iou);

void BM_PngRoundTrip(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(decode_image(encode_png(scene().image)));
}
BENCHMARK(BM_PngRoundTrip)->Unit(benchmark::kMillisecond);

void BM_Pipeline(benchmark::State& state) {
    const BackendRegistry registry;
    const Config config;
    const BackendSet backends(registry, config);
    for (auto _ : state)
        benchmark::DoNotOptimize(run_pipeline(scene().image, backends.view(), config, "1970-01-01T00:00:00Z"));
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
