#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "demorph/dataset.hpp"
#include "demorph/image.hpp"

namespace demorph::baseline {

/// Morph replication: both outputs are the morph itself.
std::pair<ImageBuffer, ImageBuffer> trivial_demorph(const ImageBuffer& morph);

/// Upper bound: the outputs are the ground-truth constituents.
std::pair<ImageBuffer, ImageBuffer> oracle_demorph(const MorphRecord& record);

enum class Kind { Trivial, Oracle };

Kind parse_kind(std::string_view name);

/// Runs the baseline over every record, writes PNG outputs into `out_dir` and returns the
/// records with their output paths rewritten. Trivial writes one `<morph_id>_trivial.png`
/// used for both outputs; oracle writes `<morph_id>_o1.png` and `<morph_id>_o2.png`.
std::vector<MorphRecord> materialize(std::span<const MorphRecord> records, Kind kind,
                                     const std::filesystem::path& out_dir);

}  // namespace demorph::baseline
