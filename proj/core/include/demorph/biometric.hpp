#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace demorph::bio {

/// Matcher output for one image.
struct Embedding {
    std::string id;
    std::vector<double> vector;
};

/// Genuine and impostor similarity populations.
struct ScoreSet {
    std::vector<double> genuine;
    std::vector<double> impostor;
};

/// Decision threshold for the rule "score >= value".
struct MatchThreshold {
    double value = 1.0;
    double achieved_fmr = 0.0;
    double target_fmr = 0.1;
};

/// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws DimensionMismatch or ZeroVector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const Embedding& a, const Embedding& b);

/// Smallest threshold from {impostor scores} U {+1} whose false match rate is <= target_fmr.
/// Throws EmptyImpostorSet; InvalidArgument when target_fmr is outside (0, 1); UnattainableFmr
/// when even +1 admits more than target_fmr of the impostors (impostor scores equal to 1).
MatchThreshold compute_threshold_at_fmr(const ScoreSet& scores, double target_fmr);

/// Fraction of genuine scores >= threshold.value. Throws EmptyGenuineSet.
double tmr(const ScoreSet& scores, const MatchThreshold& threshold);

/// Highest similarity between `output` and any gallery entry whose id is not excluded.
/// Throws EmptyGalleryAfterExclusion.
double impostor_score_for_output(const Embedding& output, std::span<const Embedding> gallery,
                                 const std::set<std::string>& excluded_ids);

/// Matched-pair scores (B(o1, i1), B(o2, i2)) of one morph after pairing is resolved.
using MatchedScores = std::pair<double, double>;

/// Fraction of records whose two scores are both strictly above tau. Throws EmptyRecordSet.
double restoration_accuracy(std::span<const MatchedScores> records, double tau);

inline constexpr double kDefaultTau = 0.4;
inline constexpr double kDefaultTargetFmr = 0.10;

/// CSV with header `label,score`; scores written with 17 significant digits.
void write_scores_csv(const ScoreSet& scores, const std::filesystem::path& path);
ScoreSet read_scores_csv(const std::filesystem::path& path);

}  // namespace demorph::bio
