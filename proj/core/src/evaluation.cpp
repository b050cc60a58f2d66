#include "demorph/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "demorph/error.hpp"

namespace demorph::eval {

namespace {

using nlohmann::json;

struct Slot {
    std::optional<RecordResult> result;
    std::optional<Error> error;
};

RecordResult evaluate_one(const MorphRecord& record, const EmbeddingStore& store,
                          std::span<const bio::Embedding> gallery, const pairing::EvaluationParams& params) {
    RecordResult out{pairing::evaluate_record(record, store, params), 0.0, 0.0};
    const std::set<std::string> excluded = {record.gt1_id, record.gt2_id};
    out.impostor_first =
        bio::impostor_score_for_output(store.require(output_embedding_id(record.out1_path)), gallery, excluded);
    out.impostor_second =
        bio::impostor_score_for_output(store.require(output_embedding_id(record.out2_path)), gallery, excluded);
    return out;
}

json grid_json(const pairing::Grid& g) {
    return {{"o1_i1", g.o1_i1}, {"o2_i2", g.o2_i2}, {"o1_i2", g.o1_i2}, {"o2_i1", g.o2_i1}};
}

pairing::Grid grid_from(const json& j) {
    return {j.at("o1_i1").get<double>(), j.at("o2_i2").get<double>(), j.at("o1_i2").get<double>(),
            j.at("o2_i1").get<double>()};
}

json iqa_json(const pairing::IqaResult& r) { return {{"grid", grid_json(r.grid)}, {"paired", r.paired}, {"bw", r.bw}}; }

pairing::IqaResult iqa_from(const json& j) {
    return {grid_from(j.at("grid")), j.at("paired").get<double>(), j.at("bw").get<double>()};
}

}  // namespace

ReportParams report_params(const RunParams& params) {
    ReportParams p;
    p.tau = params.record.tau;
    p.theta = params.record.theta;
    p.epsilon = params.record.epsilon;
    p.target_fmr = params.target_fmr;
    p.clamp_negative_b = params.record.bw.clamp_negative;
    p.bw_normalize = params.bw_normalize;
    p.ssim = params.record.ssim;
    return p;
}

std::vector<bio::Embedding> build_gallery(std::span<const MorphRecord> records, const EmbeddingStore& store,
                                          const EmbeddingStore* gallery_store) {
    if (gallery_store != nullptr) {
        if (gallery_store->dimension() != store.dimension()) {
            throw Error(ErrorCode::DimensionMismatch, "gallery store dimension " +
                                                          std::to_string(gallery_store->dimension()) +
                                                          " differs from " + std::to_string(store.dimension()));
        }
        return {gallery_store->entries().begin(), gallery_store->entries().end()};
    }
    std::vector<bio::Embedding> gallery;
    for (const auto& id : gallery_ids(records)) gallery.push_back(store.require(id));
    return gallery;
}

EvaluationRun run_evaluation(std::span<const MorphRecord> records, const EmbeddingStore& store,
                             const EmbeddingStore* gallery_store, const RunParams& params) {
    if (records.empty()) throw Error(ErrorCode::EmptyRecordSet, "manifest has no records");
    const auto gallery = build_gallery(records, store, gallery_store);

    std::vector<Slot> slots(records.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++) {
            try {
                slots[i].result = evaluate_one(records[i], store, gallery, params.record);
            } catch (const Error& e) {
                slots[i].error = e;
            }
        }
    };
    const unsigned n_threads = std::clamp<unsigned>(params.threads, 1U, static_cast<unsigned>(records.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
    }

    // Fold in morph_id order so the thread count never changes the output.
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return records[a].morph_id < records[b].morph_id; });

    EvaluationRun run;
    std::vector<Reject> rejects;
    for (const auto i : order) {
        if (slots[i].error) {
            if (!params.skip_bad_records) {
                throw Error(slots[i].error->code(), "record '" + records[i].morph_id + "': " + slots[i].error->what());
            }
            rejects.push_back({records[i].morph_id, slots[i].error->what()});
            continue;
        }
        run.records.push_back(std::move(*slots[i].result));
    }
    if (run.records.empty()) throw Error(ErrorCode::EmptyRecordSet, "every record was rejected");
    run.report = aggregate(run.records, params.dataset_name, store.matcher_name(), report_params(params));
    run.report.rejects = std::move(rejects);
    return run;
}

MetricsReport aggregate(std::span<const RecordResult> results, const std::string& dataset_name,
                        const std::string& matcher_name, const ReportParams& params) {
    if (results.empty()) throw Error(ErrorCode::EmptyRecordSet, "nothing to aggregate");
    MetricsReport r;
    r.dataset_name = dataset_name;
    r.matcher_name = matcher_name;
    r.n_morphs = results.size();
    r.params = params;
    r.target_fmr = params.target_fmr;

    bio::ScoreSet scores;
    std::vector<bio::MatchedScores> matched;
    double sum_psnr = 0.0, sum_ssim = 0.0, sum_bw_ssim = 0.0, sum_bw_psnr = 0.0;
    std::size_t dissimilar = 0, aligned = 0, with_conditions = 0;
    for (const auto& res : results) {
        const auto& ev = res.evaluation;
        scores.genuine.push_back(ev.matched_first);
        scores.genuine.push_back(ev.matched_second);
        scores.impostor.push_back(res.impostor_first);
        scores.impostor.push_back(res.impostor_second);
        matched.emplace_back(ev.matched_first, ev.matched_second);
        const auto& ssim = ev.iqa.at(iqa::IqaKind::Ssim);
        const auto& psnr = ev.iqa.at(iqa::IqaKind::Psnr);
        sum_ssim += ssim.paired;
        sum_psnr += psnr.paired;
        sum_bw_ssim += ssim.bw;
        sum_bw_psnr += psnr.bw;
        if (ev.conditions) {
            ++with_conditions;
            dissimilar += ev.conditions->dissimilar ? 1 : 0;
            aligned += ev.conditions->aligned ? 1 : 0;
        }
    }
    const auto n = static_cast<double>(results.size());
    const auto threshold = bio::compute_threshold_at_fmr(scores, params.target_fmr);
    r.threshold = threshold.value;
    r.achieved_fmr = threshold.achieved_fmr;
    r.tmr_at_fmr = bio::tmr(scores, threshold);
    r.ra = bio::restoration_accuracy(matched, params.tau);
    r.mean_ssim = sum_ssim / n;
    r.mean_psnr = sum_psnr / n;
    r.bw_ssim = sum_bw_ssim / n;
    r.bw_psnr = sum_bw_psnr / n;
    if (with_conditions == results.size()) {
        r.dissimilar_rate = static_cast<double>(dissimilar) / n;
        r.aligned_rate = static_cast<double>(aligned) / n;
    }
    return r;
}

void write_record_results(std::span<const RecordResult> results, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    for (const auto& res : results) {
        const auto& ev = res.evaluation;
        json j = {
            {"morph_id", ev.morph_id},
            {"pairing", std::string(pairing::to_string(ev.pairing))},
            {"b", grid_json(ev.b)},
            {"b_o1_o2", ev.b_o1_o2},
            {"matched", {ev.matched_first, ev.matched_second}},
            {"impostor", {res.impostor_first, res.impostor_second}},
            {"ra_pass", ev.ra_pass},
        };
        for (const auto& [kind, r] : ev.iqa) j[kind == iqa::IqaKind::Ssim ? "ssim" : "psnr"] = iqa_json(r);
        j["conditions"] = ev.conditions ? json{{"dissimilar", ev.conditions->dissimilar},
                                               {"aligned", ev.conditions->aligned}}
                                        : json(nullptr);
        out << j.dump() << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

std::vector<RecordResult> read_record_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, path.string());
    std::vector<RecordResult> results;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            RecordResult res;
            auto& ev = res.evaluation;
            ev.morph_id = j.at("morph_id").get<std::string>();
            ev.pairing = j.at("pairing").get<std::string>() == "crossed" ? pairing::Pairing::Crossed
                                                                         : pairing::Pairing::Straight;
            ev.b = grid_from(j.at("b"));
            ev.b_o1_o2 = j.at("b_o1_o2").get<double>();
            ev.matched_first = j.at("matched").at(0).get<double>();
            ev.matched_second = j.at("matched").at(1).get<double>();
            res.impostor_first = j.at("impostor").at(0).get<double>();
            res.impostor_second = j.at("impostor").at(1).get<double>();
            ev.ra_pass = j.at("ra_pass").get<bool>();
            if (j.contains("ssim")) ev.iqa[iqa::IqaKind::Ssim] = iqa_from(j.at("ssim"));
            if (j.contains("psnr")) ev.iqa[iqa::IqaKind::Psnr] = iqa_from(j.at("psnr"));
            if (const auto& c = j.at("conditions"); !c.is_null()) {
                ev.conditions = pairing::DemorphConditions{c.at("dissimilar").get<bool>(), c.at("aligned").get<bool>()};
            }
            results.push_back(std::move(res));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedLine, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return results;
}

}  // namespace demorph::eval
