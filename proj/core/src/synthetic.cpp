#include "demorph/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "demorph/baselines.hpp"
#include "demorph/error.hpp"

namespace demorph::synth {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Unbiased index in [0, n); spelled out so the sequence does not depend on the standard library.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return static_cast<std::size_t>(v % n);
}

std::string numbered(const char* prefix, int i, int width) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%0*d", prefix, width, i);
    return buf;
}

}  // namespace

ImageBuffer texture_face(std::uint64_t identity_seed, const FaceParams& p) {
    if (p.size < kGridCells || p.size % kGridCells != 0) {
        throw Error(ErrorCode::InvalidArgument, "face size must be a positive multiple of 8");
    }
    std::mt19937_64 rng(splitmix(identity_seed));
    std::vector<double> layout(kGridCells * kGridCells);
    for (auto& level : layout) level = (rng() >> 63) ? p.bright_level : p.dark_level;
    double tint[3];
    for (auto& t : tint) t = (unit(rng) * 2.0 - 1.0) * 6.0;

    const int n = p.size;
    const int cell = n / kGridCells;
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    std::vector<std::uint8_t> samples(static_cast<std::size_t>(n) * n * 3);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            // Period 8 divides every cell, so the shared pattern has zero mean per cell.
            const double pattern = p.texture_amplitude * std::sin(kTwoPi * x / 8.0) * std::sin(kTwoPi * y / 8.0);
            const double grain = (unit(rng) * 2.0 - 1.0) * p.grain;
            const double base = layout[(y / cell) * kGridCells + x / cell] + pattern + grain;
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(std::round(base + tint[c]), 0.0, 255.0);
                samples[(static_cast<std::size_t>(y) * n + x) * 3 + c] = static_cast<std::uint8_t>(v);
            }
        }
    }
    return {n, n, 3, std::move(samples)};
}

std::vector<double> grid_embedding(const ImageBuffer& img) {
    if (img.width() < kGridCells || img.height() < kGridCells) {
        throw Error(ErrorCode::ImageTooSmall, "grid embedding needs at least 8x8 pixels");
    }
    const ImageBuffer luma = to_luma(img);
    std::vector<double> v(kGridCells * kGridCells);
    double norm2 = 0.0;
    for (int cy = 0; cy < kGridCells; ++cy) {
        const int y0 = cy * img.height() / kGridCells;
        const int y1 = (cy + 1) * img.height() / kGridCells;
        for (int cx = 0; cx < kGridCells; ++cx) {
            const int x0 = cx * img.width() / kGridCells;
            const int x1 = (cx + 1) * img.width() / kGridCells;
            double sum = 0.0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) sum += luma.at(x, y);
            }
            const double mean = sum / (static_cast<double>(y1 - y0) * (x1 - x0));
            v[cy * kGridCells + cx] = mean;
            norm2 += mean * mean;
        }
    }
    if (norm2 == 0.0) throw Error(ErrorCode::ZeroVector, "grid embedding of an all-black image");
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;
    return v;
}

bio::Embedding grid_embed(std::string id, const ImageBuffer& img) { return {std::move(id), grid_embedding(img)}; }

Benchmark build_benchmark(const BenchmarkSpec& spec) {
    if (spec.identities < 2 || spec.morphs < 1) {
        throw Error(ErrorCode::InvalidArgument, "benchmark needs >= 2 identities and >= 1 morph");
    }
    const auto max_pairs = static_cast<long long>(spec.identities) * (spec.identities - 1) / 2;
    if (spec.morphs > max_pairs) {
        throw Error(ErrorCode::InvalidArgument, std::to_string(spec.morphs) + " morphs requested but only " +
                                                    std::to_string(max_pairs) + " distinct pairs exist");
    }
    Benchmark b;
    for (int i = 0; i < spec.identities; ++i) {
        b.face_ids.push_back(numbered("face", i, 3));
        b.faces.push_back(texture_face(spec.seed ^ splitmix(static_cast<std::uint64_t>(i) + 1), spec.face));
    }

    std::vector<std::pair<int, int>> all;
    for (int i = 0; i < spec.identities; ++i) {
        for (int j = i + 1; j < spec.identities; ++j) all.emplace_back(i, j);
    }
    std::mt19937_64 rng(splitmix(spec.seed));
    for (std::size_t k = all.size(); k > 1; --k) std::swap(all[k - 1], all[uniform_index(rng, k)]);
    all.resize(static_cast<std::size_t>(spec.morphs));

    for (int m = 0; m < spec.morphs; ++m) {
        const auto [i, j] = all[m];
        b.morph_ids.push_back(numbered("morph", m, 4));
        b.pairs.emplace_back(i, j);
        b.morphs.push_back(alpha_blend_morph(b.faces[i], b.faces[j], spec.alpha));
    }
    return b;
}

EmbeddingStore embed_benchmark(const Benchmark& bench) {
    EmbeddingStore store(kGridMatcherName, kGridCells * kGridCells);
    for (std::size_t i = 0; i < bench.faces.size(); ++i) store.add(grid_embed(bench.face_ids[i], bench.faces[i]));
    for (std::size_t i = 0; i < bench.morphs.size(); ++i) store.add(grid_embed(bench.morph_ids[i], bench.morphs[i]));
    return store;
}

std::vector<MorphRecord> materialize_benchmark(const Benchmark& bench, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const fs::path root = fs::absolute(dir);
    fs::create_directories(root / "faces");
    fs::create_directories(root / "morphs");
    for (std::size_t i = 0; i < bench.faces.size(); ++i) {
        save_png(bench.faces[i], root / "faces" / (bench.face_ids[i] + ".png"));
    }
    std::vector<MorphRecord> records;
    for (std::size_t m = 0; m < bench.morphs.size(); ++m) {
        const auto [i, j] = bench.pairs[m];
        MorphRecord r;
        r.morph_id = bench.morph_ids[m];
        r.morph_path = root / "morphs" / (r.morph_id + ".png");
        r.gt1_id = bench.face_ids[i];
        r.gt2_id = bench.face_ids[j];
        r.gt1_path = root / "faces" / (r.gt1_id + ".png");
        r.gt2_path = root / "faces" / (r.gt2_id + ".png");
        save_png(bench.morphs[m], r.morph_path);
        records.push_back(std::move(r));
    }
    records = baseline::materialize(records, baseline::Kind::Trivial, root / "trivial");
    write_manifest(records, root / "manifest.jsonl");
    save_embedding_store(embed_manifest(records), root / "embeddings.bemb");
    return records;
}

EmbeddingStore embed_manifest(std::span<const MorphRecord> records) {
    EmbeddingStore store(kGridMatcherName, kGridCells * kGridCells);
    auto add = [&](const std::string& id, const std::filesystem::path& path) {
        if (!store.contains(id)) store.add(grid_embed(id, load_image(path)));
    };
    for (const auto& r : records) {
        add(r.gt1_id, r.gt1_path);
        add(r.gt2_id, r.gt2_path);
        add(r.morph_id, r.morph_path);
        add(output_embedding_id(r.out1_path), r.out1_path);
        add(output_embedding_id(r.out2_path), r.out2_path);
    }
    return store;
}

}  // namespace demorph::synth
