#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <thread>

#include "eyas/codec.hpp"
#include "eyas/error.hpp"
#include "eyas/json_io.hpp"
#include "eyas/synthgen.hpp"

namespace eyas {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string entry_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scene_%04zu", index);
    return buf;
}

}  // namespace

std::uint64_t scene_seed(std::uint64_t corpus_seed, std::size_t index) {
    return splitmix64(splitmix64(corpus_seed) ^ (0xd1b54a32d192ed03ULL * (index + 1)));
}

std::vector<bool> holdout_split(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::uint64_t> key(n);
    for (std::size_t i = 0; i < n; ++i) key[i] = splitmix64(seed ^ splitmix64(i + 0x5851f42d4c957f2dULL));
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return key[a] != key[b] ? key[a] < key[b] : a < b; });
    const auto holdout = static_cast<std::size_t>(std::lround(0.2 * double(n)));
    std::vector<bool> out(n, false);
    for (std::size_t i = 0; i < holdout; ++i) out[order[i]] = true;
    return out;
}

CorpusManifest gen_corpus(int n, const GenParams& params, std::uint64_t seed, const std::filesystem::path& out_dir,
                          int jobs) {
    if (n < 1) fail(ErrorCode::invalid_argument, "corpus size must be >= 1");
    // Validates the parameters before touching the filesystem.
    (void)gen_scene(params, scene_seed(seed, 0));
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        fail(ErrorCode::io, "cannot create corpus directory " + out_dir.string());
    }

    const auto split = holdout_split(static_cast<std::size_t>(n), seed);
    CorpusManifest manifest;
    manifest.entries.resize(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                const SynthScene scene = gen_scene(params, scene_seed(seed, static_cast<std::size_t>(i)));
                const RenderedScene out = render(scene);
                ManifestEntry e;
                e.id = entry_id(static_cast<std::size_t>(i));
                e.image = e.id + ".png";
                e.onh_mask = e.id + "_onh.png";
                e.macula_mask = e.id + "_macula.png";
                e.vessel_mask = e.id + "_vessels.png";
                e.av_map = e.id + "_av.png";
                e.shape = scene.shape_label;
                e.caliber = scene.caliber_label;
                e.reflex = scene.reflex_present ? ReflexLabel::present : ReflexLabel::absent;
                e.laterality = scene.laterality;
                e.holdout = split[static_cast<std::size_t>(i)];
                write_file(out_dir / e.image, encode_png(out.image));
                write_file(out_dir / e.onh_mask, encode_mask_png(out.onh_mask));
                write_file(out_dir / e.macula_mask, encode_mask_png(out.macula_mask));
                write_file(out_dir / e.vessel_mask, encode_mask_png(out.vessel_truth.vessel));
                write_file(out_dir / e.av_map, encode_av_png(out.vessel_truth));
                Json truth{{"seed", scene.seed},
                           {"disc", scene.disc},
                           {"fovea", {scene.fovea.x, scene.fovea.y}},
                           {"artery_caliber", scene.artery_caliber}};
                write_file(out_dir / (e.id + "_truth.json"), truth.dump(2) + "\n");
                manifest.entries[static_cast<std::size_t>(i)] = std::move(e);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const int threads = std::clamp(jobs, 1, n);
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    write_file(out_dir / "manifest.json", Json(manifest).dump(2) + "\n");
    return manifest;
}

CorpusManifest load_manifest(const std::filesystem::path& corpus_dir) {
    const Bytes raw = read_file(corpus_dir / "manifest.json");
    return parse_json(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size())).get<CorpusManifest>();
}

}  // namespace eyas
