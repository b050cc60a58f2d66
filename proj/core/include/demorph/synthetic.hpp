#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "demorph/biometric.hpp"
#include "demorph/dataset.hpp"
#include "demorph/image.hpp"

namespace demorph::synth {

// Synthetic "texture faces": an identity-specific 8x8 layout of bright and dark cells,
// a texture pattern shared by every subject (zero mean over each cell), and a faint
// identity-specific grain. Pixel blending of two faces stays close to both in the
// grid-embedding space, which is what the benchmark relies on.
struct FaceParams {
    int size = 64;  // multiple of 8
    double dark_level = 45.0;
    double bright_level = 205.0;
    double texture_amplitude = 40.0;
    double grain = 8.0;
};

ImageBuffer texture_face(std::uint64_t identity_seed, const FaceParams& params = {});

inline constexpr int kGridCells = 8;
inline constexpr const char* kGridMatcherName = "grid8x8+l2";

/// Unit-normalized per-cell mean luma over an 8x8 grid (64 components).
/// Throws ImageTooSmall below 8x8 and ZeroVector for an all-black image.
std::vector<double> grid_embedding(const ImageBuffer& img);

bio::Embedding grid_embed(std::string id, const ImageBuffer& img);

struct BenchmarkSpec {
    int identities = 40;
    int morphs = 100;
    double alpha = 0.5;
    std::uint64_t seed = 20240601;
    FaceParams face;
};

struct Benchmark {
    std::vector<std::string> face_ids;
    std::vector<ImageBuffer> faces;
    std::vector<std::string> morph_ids;
    std::vector<std::pair<int, int>> pairs;  // indices into faces, distinct unordered pairs
    std::vector<ImageBuffer> morphs;
};

/// Deterministic in spec.seed. Throws InvalidArgument if more morphs than distinct pairs are requested.
Benchmark build_benchmark(const BenchmarkSpec& spec);

/// Embeds every face (by face id) and morph (by morph id) with the grid embedder.
EmbeddingStore embed_benchmark(const Benchmark& bench);

/// Writes faces/, morphs/ and the trivial baseline outputs under `dir`, plus
/// manifest.jsonl and embeddings.bemb (grid embedder, covering faces, morphs and outputs).
/// Returns the manifest records.
std::vector<MorphRecord> materialize_benchmark(const Benchmark& bench, const std::filesystem::path& dir);

/// Grid-embeds every image a manifest references: ground truths by gt id, morphs by
/// morph id and outputs by file stem. Repeated ids are embedded once.
EmbeddingStore embed_manifest(std::span<const MorphRecord> records);

}  // namespace demorph::synth
