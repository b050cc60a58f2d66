#include "demorph/biometric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "demorph/error.hpp"

namespace demorph::bio {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "embedding dimensions " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine similarity of an all-zero vector");
    // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): identical vectors then score exactly 1.
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
    try {
        return cosine_similarity(std::span<const double>(a.vector), std::span<const double>(b.vector));
    } catch (const Error& e) {
        throw Error(e.code(), "'" + a.id + "' vs '" + b.id + "': " + e.what());
    }
}

MatchThreshold compute_threshold_at_fmr(const ScoreSet& scores, double target_fmr) {
    if (scores.impostor.empty()) throw Error(ErrorCode::EmptyImpostorSet, "cannot calibrate a threshold");
    if (!(target_fmr > 0.0 && target_fmr < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "target FMR must lie in (0, 1)");
    }
    for (double s : scores.impostor) {
        if (!(s >= -1.0 && s <= 1.0)) throw Error(ErrorCode::InvalidArgument, "impostor score outside [-1, 1]");
    }
    std::vector<double> sorted = scores.impostor;
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());

    // FMR is nonincreasing in the threshold, so the first distinct value that passes is the smallest.
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i > 0 && sorted[i] == sorted[i - 1]) continue;
        const double fmr = static_cast<double>(sorted.size() - i) / n;
        if (fmr <= target_fmr) return {sorted[i], fmr, target_fmr};
    }
    const auto at_one = static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), 1.0));
    const double fmr_at_one = at_one / n;
    if (fmr_at_one <= target_fmr) return {1.0, fmr_at_one, target_fmr};
    throw Error(ErrorCode::UnattainableFmr, "impostor scores at 1.0 exceed the target FMR");
}

double tmr(const ScoreSet& scores, const MatchThreshold& threshold) {
    if (scores.genuine.empty()) throw Error(ErrorCode::EmptyGenuineSet, "cannot compute TMR");
    const auto accepted = std::count_if(scores.genuine.begin(), scores.genuine.end(),
                                        [&](double s) { return s >= threshold.value; });
    return static_cast<double>(accepted) / static_cast<double>(scores.genuine.size());
}

double impostor_score_for_output(const Embedding& output, std::span<const Embedding> gallery,
                                 const std::set<std::string>& excluded_ids) {
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& g : gallery) {
        if (excluded_ids.contains(g.id)) continue;
        best = std::max(best, cosine_similarity(output, g));
        any = true;
    }
    if (!any) throw Error(ErrorCode::EmptyGalleryAfterExclusion, "no gallery entry left for '" + output.id + "'");
    return best;
}

double restoration_accuracy(std::span<const MatchedScores> records, double tau) {
    if (records.empty()) throw Error(ErrorCode::EmptyRecordSet, "restoration accuracy over zero morphs");
    const auto passed = std::count_if(records.begin(), records.end(),
                                      [&](const MatchedScores& r) { return r.first > tau && r.second > tau; });
    return static_cast<double>(passed) / static_cast<double>(records.size());
}

void write_scores_csv(const ScoreSet& scores, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    out << "label,score\n";
    char buf[64];
    auto emit = [&](const char* label, double s) {
        std::snprintf(buf, sizeof buf, "%.17g", s);
        out << label << ',' << buf << '\n';
    };
    for (double s : scores.genuine) emit("genuine", s);
    for (double s : scores.impostor) emit("impostor", s);
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

ScoreSet read_scores_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, path.string());
    ScoreSet scores;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "label,score") {
                throw Error(ErrorCode::MalformedLine, path.string() + ":1: expected header 'label,score'");
            }
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw Error(ErrorCode::MalformedLine, path.string() + ":" + std::to_string(line_no) + ": missing comma");
        }
        const std::string label = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        double score = 0.0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), score);
        if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(score)) {
            throw Error(ErrorCode::MalformedLine,
                        path.string() + ":" + std::to_string(line_no) + ": bad score '" + value + "'");
        }
        if (label == "genuine") {
            scores.genuine.push_back(score);
        } else if (label == "impostor") {
            scores.impostor.push_back(score);
        } else {
            throw Error(ErrorCode::MalformedLine,
                        path.string() + ":" + std::to_string(line_no) + ": unknown label '" + label + "'");
        }
    }
    return scores;
}

}  // namespace demorph::bio
