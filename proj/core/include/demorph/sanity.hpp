#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "demorph/synthetic.hpp"

namespace demorph::sanity {

inline constexpr double kEpsilon = 0.3;
inline constexpr double kRowANoiseSigma = 30.0;
inline constexpr double kRowABlurSigma = 1.5;

// Larger, lower-contrast portraits than the benchmark faces: most SSIM windows sit inside
// a cell, so two subjects share local structure while their grid embeddings still differ.
inline constexpr synth::FaceParams kPortrait{128, 70.0, 165.0, 40.0, 4.0};

/// Single-pair weighted score: the biometric weight (clamped to [0, 1]) times SSIM,
/// with the weight zeroed when it does not exceed epsilon.
double bw_pair(double b, double ssim, double epsilon = kEpsilon);

struct PairScores {
    double ssim = 0.0;
    double psnr = 0.0;  // capped
    double b = 0.0;
    double bw = 0.0;
};

/// Row A: subject vs. its noisy copy and vs. its blurred copy.
struct RowA {
    PairScores noisy;
    PairScores blurred;
};

/// Row B at one noise level: subject vs. its noisy copy and vs. a different subject.
struct SweepEntry {
    double sigma = 0.0;
    PairScores same_noisy;
    PairScores different;
    /// SSIM ranks the different subject above the noisy copy while BW ranks them the other way.
    bool crossover = false;
};

struct Report {
    std::uint64_t seed = 0;
    double epsilon = kEpsilon;
    RowA row_a;
    std::vector<SweepEntry> sweep;  // sigma = 0, 10, ..., 80
    std::vector<double> crossover_sigmas;
};

/// Deterministic in `seed`. Pure computation, no assertion.
Report run(std::uint64_t seed);

nlohmann::json to_json(const Report& r);
std::string to_markdown(const Report& r);

/// Runs the suite, writes sanity.json, sanity.md and the compared images into out_dir,
/// then throws AssertionFailed if no swept level in 10..80 shows a crossover.
Report sanity_suite(std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace demorph::sanity
