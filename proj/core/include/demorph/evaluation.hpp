#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "demorph/biometric.hpp"
#include "demorph/dataset.hpp"
#include "demorph/pairing.hpp"

namespace demorph::eval {

struct RunParams {
    std::string dataset_name = "dataset";
    double target_fmr = bio::kDefaultTargetFmr;
    pairing::EvaluationParams record;  // tau, theta, epsilon, BW clamping, SSIM params
    bool bw_normalize = false;
    bool skip_bad_records = false;
    unsigned threads = 1;
};

/// A record's evaluation plus its two impostor scores (best non-mate for o1 and for o2).
struct RecordResult {
    pairing::DemorphEvaluation evaluation;
    double impostor_first = 0.0;
    double impostor_second = 0.0;
};

struct Reject {
    std::string morph_id;
    std::string error;

    friend bool operator==(const Reject&, const Reject&) = default;
};

struct ReportParams {
    double tau = bio::kDefaultTau;
    std::optional<double> theta;
    std::optional<double> epsilon;
    double target_fmr = bio::kDefaultTargetFmr;
    bool clamp_negative_b = true;
    bool bw_normalize = false;
    iqa::SsimParams ssim;

    friend bool operator==(const ReportParams&, const ReportParams&) = default;
};

/// Dataset-level aggregates; means and fractions over exactly n_morphs records.
struct MetricsReport {
    std::string dataset_name;
    std::string matcher_name;
    std::size_t n_morphs = 0;
    double mean_psnr = 0.0;  // capped PSNR, paired
    double mean_ssim = 0.0;  // paired
    double ra = 0.0;
    double tmr_at_fmr = 0.0;
    double target_fmr = 0.0;
    double achieved_fmr = 0.0;
    double threshold = 0.0;
    double bw_ssim = 0.0;
    double bw_psnr = 0.0;
    std::optional<double> dissimilar_rate;  // only with theta and epsilon
    std::optional<double> aligned_rate;
    ReportParams params;
    std::vector<Reject> rejects;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

struct EvaluationRun {
    MetricsReport report;
    std::vector<RecordResult> records;  // sorted by morph_id
};

/// Gallery for impostor mining: every entry of `gallery_store` when given, otherwise the
/// manifest's constituent ids looked up in `store`.
std::vector<bio::Embedding> build_gallery(std::span<const MorphRecord> records, const EmbeddingStore& store,
                                          const EmbeddingStore* gallery_store);

/// Per-record evaluation across `params.threads` workers, impostor mining, threshold
/// calibration and aggregation. Results do not depend on the thread count.
/// Throws EmptyRecordSet; a failing record aborts the run with its morph_id unless
/// params.skip_bad_records is set.
EvaluationRun run_evaluation(std::span<const MorphRecord> records, const EmbeddingStore& store,
                             const EmbeddingStore* gallery_store, const RunParams& params);

/// Folds per-record results (in morph_id order) into a report.
MetricsReport aggregate(std::span<const RecordResult> results, const std::string& dataset_name,
                        const std::string& matcher_name, const ReportParams& params);

ReportParams report_params(const RunParams& params);

/// One JSON object per line, full double precision.
void write_record_results(std::span<const RecordResult> results, const std::filesystem::path& path);
std::vector<RecordResult> read_record_results(const std::filesystem::path& path);

}  // namespace demorph::eval
