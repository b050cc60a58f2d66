#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "demorph/evaluation.hpp"

namespace demorph::report {

enum class Format { Json, Csv, Markdown };

Format parse_format(std::string_view name);

/// Rounds to 9 significant decimal digits (the precision every report format carries).
double round_sig9(double v);

/// The report with every real rounded by round_sig9.
eval::MetricsReport canonicalize(const eval::MetricsReport& r);

/// Object with sorted keys and 9-significant-digit reals.
nlohmann::json to_json(const eval::MetricsReport& r);
eval::MetricsReport from_json(const nlohmann::json& j);

/// Canonical text: sorted keys, two-space indent, trailing newline.
std::string to_json_text(const eval::MetricsReport& r);

/// Header plus one row per (dataset, matcher).
std::string to_csv(std::span<const eval::MetricsReport> reports);
std::vector<eval::MetricsReport> from_csv(std::string_view text);

/// One row per dataset; PSNR/SSIM once per dataset, then Rest. Acc, BW(SSIM), BW(PSNR)
/// and TMR columns for each matcher.
std::string to_markdown(std::span<const eval::MetricsReport> reports);

/// JSON takes exactly one report. Throws IoError.
void emit_report(std::span<const eval::MetricsReport> reports, Format format, const std::filesystem::path& path);

}  // namespace demorph::report
