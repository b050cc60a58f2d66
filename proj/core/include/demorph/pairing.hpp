#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "demorph/iqa.hpp"

namespace demorph {
struct MorphRecord;
class EmbeddingStore;
}  // namespace demorph

namespace demorph::pairing {

enum class Pairing {
    Straight,  // o1<->i1, o2<->i2
    Crossed,   // o1<->i2, o2<->i1
};

std::string_view to_string(Pairing p) noexcept;

/// One value per (output, ground truth) combination.
struct Grid {
    double o1_i1 = 0.0;
    double o2_i2 = 0.0;
    double o1_i2 = 0.0;
    double o2_i1 = 0.0;

    /// The grid seen after exchanging the two outputs.
    [[nodiscard]] Grid swapped_outputs() const noexcept { return {o2_i1, o1_i2, o2_i2, o1_i1}; }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Straight iff o1_i1 + o2_i2 >= o1_i2 + o2_i1 (ties go straight).
Pairing resolve_pairing(const Grid& b);

/// 0.5 * max(straight sum, crossed sum). PSNR entries must already be capped.
double paired_iqa(const Grid& iqa);

struct BwOptions {
    /// Clamp biometric weights to [0, 1] before weighting.
    bool clamp_negative = true;
};

/// Per-morph biometrically weighted IQA:
/// max(b11*q11 + b22*q22, b12*q12 + b21*q21). Dataset-level BW is the mean over morphs.
double bw_iqa(const Grid& b, const Grid& iqa, const BwOptions& options = {});

struct DemorphConditions {
    bool dissimilar = false;  // B(o1, o2) < theta
    bool aligned = false;     // min_j max_k B(o_j, i_k) > epsilon
};

DemorphConditions check_demorph_conditions(double b_o1_o2, const Grid& b, double theta, double epsilon);

struct IqaResult {
    Grid grid;           // PSNR stored capped
    double paired = 0.0;
    double bw = 0.0;
};

struct DemorphEvaluation {
    std::string morph_id;
    Pairing pairing = Pairing::Straight;
    Grid b;
    double b_o1_o2 = 0.0;
    std::map<iqa::IqaKind, IqaResult> iqa;
    /// Scores of the two resolved pairs: (first output's, second output's).
    double matched_first = 0.0;
    double matched_second = 0.0;
    bool ra_pass = false;
    std::optional<DemorphConditions> conditions;
};

struct EvaluationParams {
    std::set<iqa::IqaKind> kinds = {iqa::IqaKind::Ssim, iqa::IqaKind::Psnr};
    double tau = 0.4;
    std::optional<double> theta;
    std::optional<double> epsilon;
    BwOptions bw;
    iqa::SsimParams ssim;
};

/// Score grids, pairing and metrics for one evaluation unit from its biometric and
/// (capped) IQA grids. Used by evaluate_record and directly by tests.
DemorphEvaluation evaluate_grids(std::string morph_id, const Grid& b, double b_o1_o2,
                                 const std::map<iqa::IqaKind, Grid>& iqa_grids, const EvaluationParams& params);

/// Loads the ground truths and outputs of `record`, looks up their embeddings
/// (ground truths by gt id, outputs by file stem) and evaluates them.
/// Throws MissingEmbedding, DimensionMismatch and image loading errors.
DemorphEvaluation evaluate_record(const MorphRecord& record, const EmbeddingStore& embeddings,
                                  const EvaluationParams& params);

}  // namespace demorph::pairing
