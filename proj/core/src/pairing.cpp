#include "demorph/pairing.hpp"

#include <algorithm>

#include "demorph/biometric.hpp"
#include "demorph/dataset.hpp"
#include "demorph/error.hpp"
#include "demorph/image.hpp"

namespace demorph::pairing {

std::string_view to_string(Pairing p) noexcept {
    return p == Pairing::Straight ? "straight" : "crossed";
}

Pairing resolve_pairing(const Grid& b) {
    return (b.o1_i1 + b.o2_i2 >= b.o1_i2 + b.o2_i1) ? Pairing::Straight : Pairing::Crossed;
}

double paired_iqa(const Grid& iqa) {
    return 0.5 * std::max(iqa.o1_i1 + iqa.o2_i2, iqa.o1_i2 + iqa.o2_i1);
}

double bw_iqa(const Grid& b, const Grid& iqa, const BwOptions& options) {
    auto weight = [&](double s) { return options.clamp_negative ? std::clamp(s, 0.0, 1.0) : s; };
    const double straight = weight(b.o1_i1) * iqa.o1_i1 + weight(b.o2_i2) * iqa.o2_i2;
    const double crossed = weight(b.o1_i2) * iqa.o1_i2 + weight(b.o2_i1) * iqa.o2_i1;
    return std::max(straight, crossed);
}

DemorphConditions check_demorph_conditions(double b_o1_o2, const Grid& b, double theta, double epsilon) {
    const double first = std::max(b.o1_i1, b.o1_i2);
    const double second = std::max(b.o2_i1, b.o2_i2);
    return {b_o1_o2 < theta, std::min(first, second) > epsilon};
}

DemorphEvaluation evaluate_grids(std::string morph_id, const Grid& b, double b_o1_o2,
                                 const std::map<iqa::IqaKind, Grid>& iqa_grids, const EvaluationParams& params) {
    DemorphEvaluation ev;
    ev.morph_id = std::move(morph_id);
    ev.b = b;
    ev.b_o1_o2 = b_o1_o2;
    ev.pairing = resolve_pairing(b);
    if (ev.pairing == Pairing::Straight) {
        ev.matched_first = b.o1_i1;
        ev.matched_second = b.o2_i2;
    } else {
        ev.matched_first = b.o1_i2;
        ev.matched_second = b.o2_i1;
    }
    ev.ra_pass = ev.matched_first > params.tau && ev.matched_second > params.tau;
    for (const auto& [kind, grid] : iqa_grids) {
        Grid g = grid;
        if (kind == iqa::IqaKind::Psnr) {
            g = {iqa::cap_psnr(g.o1_i1), iqa::cap_psnr(g.o2_i2), iqa::cap_psnr(g.o1_i2), iqa::cap_psnr(g.o2_i1)};
        }
        ev.iqa[kind] = IqaResult{g, paired_iqa(g), bw_iqa(b, g, params.bw)};
    }
    if (params.theta && params.epsilon) {
        ev.conditions = check_demorph_conditions(b_o1_o2, b, *params.theta, *params.epsilon);
    }
    return ev;
}

DemorphEvaluation evaluate_record(const MorphRecord& record, const EmbeddingStore& embeddings,
                                  const EvaluationParams& params) {
    const auto& e_i1 = embeddings.require(record.gt1_id);
    const auto& e_i2 = embeddings.require(record.gt2_id);
    const auto& e_o1 = embeddings.require(output_embedding_id(record.out1_path));
    const auto& e_o2 = embeddings.require(output_embedding_id(record.out2_path));

    const Grid b{bio::cosine_similarity(e_o1, e_i1), bio::cosine_similarity(e_o2, e_i2),
                 bio::cosine_similarity(e_o1, e_i2), bio::cosine_similarity(e_o2, e_i1)};
    const double b_o1_o2 = bio::cosine_similarity(e_o1, e_o2);

    std::map<iqa::IqaKind, Grid> grids;
    if (!params.kinds.empty()) {
        const ImageBuffer i1 = load_image(record.gt1_path);
        const ImageBuffer i2 = load_image(record.gt2_path);
        const ImageBuffer o1 = load_image(record.out1_path);
        const ImageBuffer o2 = record.out2_path == record.out1_path ? o1 : load_image(record.out2_path);
        for (const auto* pair : {&i1, &i2}) {
            require_same_shape(o1, *pair);
            require_same_shape(o2, *pair);
        }
        for (const auto kind : params.kinds) {
            auto q = [&](const ImageBuffer& o, const ImageBuffer& i) { return iqa::compute(kind, o, i, params.ssim); };
            grids[kind] = Grid{q(o1, i1), q(o2, i2), q(o1, i2), q(o2, i1)};
        }
    }
    return evaluate_grids(record.morph_id, b, b_o1_o2, grids, params);
}

}  // namespace demorph::pairing
