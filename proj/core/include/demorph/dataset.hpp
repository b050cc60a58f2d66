#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "demorph/biometric.hpp"

namespace demorph {

/// One evaluation unit: a morph, its two constituents and the two (unordered) demorpher outputs.
struct MorphRecord {
    std::string morph_id;
    std::filesystem::path morph_path;
    std::string gt1_id;
    std::string gt2_id;
    std::filesystem::path gt1_path;
    std::filesystem::path gt2_path;
    std::filesystem::path out1_path;
    std::filesystem::path out2_path;

    friend bool operator==(const MorphRecord&, const MorphRecord&) = default;
};

/// Throws InvalidRecord if the ids coincide or two paths collide (the outputs may share a path).
void validate_record(const MorphRecord& record);

/// Embedding id used for a demorpher output: its file stem.
std::string output_embedding_id(const std::filesystem::path& output_path);

/// JSON-lines manifest, one object per line carrying exactly the MorphRecord fields.
/// Relative paths are resolved against `base_dir`. Blank lines are skipped.
std::vector<MorphRecord> parse_manifest_text(std::string_view text, const std::filesystem::path& base_dir);
std::vector<MorphRecord> parse_manifest(const std::filesystem::path& path);

/// Paths under the manifest's directory are written relative to it.
void write_manifest(std::span<const MorphRecord> records, const std::filesystem::path& path);

/// Union of the constituent ids. Throws EmptyRecordSet.
std::set<std::string> gallery_ids(std::span<const MorphRecord> records);

/// Precomputed matcher outputs keyed by image id. Insertion order is preserved.
class EmbeddingStore {
public:
    EmbeddingStore(std::string matcher_name, std::uint32_t dimension);

    /// Throws DimensionMismatch, ZeroVector or DuplicateId.
    void add(bio::Embedding embedding);

    [[nodiscard]] const bio::Embedding* find(std::string_view id) const;
    /// Throws MissingEmbedding.
    [[nodiscard]] const bio::Embedding& require(std::string_view id) const;
    [[nodiscard]] bool contains(std::string_view id) const { return find(id) != nullptr; }

    [[nodiscard]] const std::string& matcher_name() const noexcept { return matcher_name_; }
    [[nodiscard]] std::uint32_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] std::span<const bio::Embedding> entries() const noexcept { return entries_; }

private:
    std::string matcher_name_;
    std::uint32_t dimension_;
    std::vector<bio::Embedding> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// BEMB layout (little-endian, unpadded):
///   "BEMB" | u16 version=1 | u16 name_len | name | u32 dimension | u32 count |
///   count x { u16 id_len | id | dimension x f32 }
inline constexpr std::uint16_t kBembVersion = 1;

/// Vectors are narrowed to float32 on write.
std::vector<std::uint8_t> encode_bemb(const EmbeddingStore& store);
/// Throws BadMagic, UnsupportedVersion, DimensionMismatch, TruncatedFile, TrailingBytes,
/// DuplicateId or ZeroVector.
EmbeddingStore decode_bemb(std::span<const std::uint8_t> bytes);

EmbeddingStore load_embedding_store(const std::filesystem::path& path);
void save_embedding_store(const EmbeddingStore& store, const std::filesystem::path& path);

// --- train/test identity regimes -------------------------------------------

struct ScenarioSplit {
    std::set<std::string> train_identities;
    std::set<std::string> test_identities;
};

enum class Scenario { One, Two, Three, Invalid };

std::string_view to_string(Scenario s) noexcept;

/// One: test is a subset of train. Three: disjoint. Two: partial overlap. Throws EmptySet.
Scenario classify_scenario(const ScenarioSplit& split);

/// One id per line; surrounding whitespace trimmed; blank lines and '#' comments skipped.
std::set<std::string> read_id_list(const std::filesystem::path& path);

}  // namespace demorph
