#include "demorph/sanity.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>

#include "demorph/biometric.hpp"
#include "demorph/error.hpp"
#include "demorph/image.hpp"
#include "demorph/iqa.hpp"
#include "demorph/synthetic.hpp"

namespace demorph::sanity {

namespace {

constexpr int kCandidates = 8;

struct Subjects {
    ImageBuffer subject;
    ImageBuffer other;
};

Subjects pick_subjects(std::uint64_t seed) {
    ImageBuffer subject = synth::texture_face(seed, kPortrait);
    const auto e_subject = synth::grid_embedding(subject);
    // The different subject is the least similar of a few candidates.
    std::optional<ImageBuffer> best;
    double best_b = 2.0;
    for (int k = 1; k <= kCandidates; ++k) {
        auto candidate = synth::texture_face(seed + static_cast<std::uint64_t>(k) * 7919, kPortrait);
        const double b = bio::cosine_similarity(e_subject, synth::grid_embedding(candidate));
        if (b < best_b) {
            best_b = b;
            best = std::move(candidate);
        }
    }
    return {std::move(subject), std::move(*best)};
}

PairScores score(const ImageBuffer& a, const ImageBuffer& b, double epsilon) {
    PairScores s;
    s.ssim = iqa::ssim(a, b);
    s.psnr = iqa::cap_psnr(iqa::psnr(a, b));
    s.b = bio::cosine_similarity(synth::grid_embedding(a), synth::grid_embedding(b));
    s.bw = bw_pair(s.b, s.ssim, epsilon);
    return s;
}

ImageBuffer noisy(const ImageBuffer& img, double sigma, std::uint64_t seed) {
    return degrade(img, {DegradationKind::GaussianNoise, sigma, seed * 1000003ULL + static_cast<std::uint64_t>(sigma)});
}

nlohmann::json pair_json(const PairScores& p) {
    return {{"ssim", p.ssim}, {"psnr", p.psnr}, {"b", p.b}, {"bw_ssim", p.bw}};
}

std::string num(double v, int decimals) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace

double bw_pair(double b, double ssim, double epsilon) {
    const double w = b > epsilon ? std::clamp(b, 0.0, 1.0) : 0.0;
    return w * ssim;
}

Report run(std::uint64_t seed) {
    const auto [subject, other] = pick_subjects(seed);
    Report r;
    r.seed = seed;
    r.row_a.noisy = score(subject, noisy(subject, kRowANoiseSigma, seed), r.epsilon);
    r.row_a.blurred = score(subject, degrade(subject, {DegradationKind::GaussianBlur, kRowABlurSigma, 0}), r.epsilon);

    const PairScores different = score(subject, other, r.epsilon);
    for (int level = 0; level <= 8; ++level) {
        SweepEntry e;
        e.sigma = 10.0 * level;
        e.same_noisy = score(subject, noisy(subject, e.sigma, seed), r.epsilon);
        e.different = different;
        e.crossover = level > 0 && e.different.ssim > e.same_noisy.ssim && e.same_noisy.bw > e.different.bw;
        if (e.crossover) r.crossover_sigmas.push_back(e.sigma);
        r.sweep.push_back(e);
    }
    return r;
}

nlohmann::json to_json(const Report& r) {
    nlohmann::json sweep = nlohmann::json::array();
    for (const auto& e : r.sweep) {
        sweep.push_back({{"sigma", e.sigma},
                         {"same_subject_noisy", pair_json(e.same_noisy)},
                         {"different_subject", pair_json(e.different)},
                         {"crossover", e.crossover}});
    }
    return {{"seed", r.seed},
            {"epsilon", r.epsilon},
            {"row_a",
             {{"noise_sigma", kRowANoiseSigma},
              {"blur_sigma", kRowABlurSigma},
              {"noisy", pair_json(r.row_a.noisy)},
              {"blurred", pair_json(r.row_a.blurred)}}},
            {"row_b", sweep},
            {"crossover_sigmas", r.crossover_sigmas}};
}

std::string to_markdown(const Report& r) {
    std::string out = "## Row A: same subject, noisy vs. blurred copy\n\n";
    out += "| Pair | SSIM | PSNR (dB) | B | BW(SSIM) |\n|---|---|---|---|---|\n";
    auto line = [&](const std::string& name, const PairScores& p) {
        out += "| " + name + " | " + num(p.ssim, 4) + " | " + num(p.psnr, 2) + " | " + num(p.b, 4) + " | " +
               num(p.bw, 4) + " |\n";
    };
    line("noisy (sigma=" + num(kRowANoiseSigma, 0) + ")", r.row_a.noisy);
    line("blurred (sigma=" + num(kRowABlurSigma, 1) + ")", r.row_a.blurred);

    out += "\n## Row B: noisy same subject vs. different subject (epsilon=" + num(r.epsilon, 1) + ")\n\n";
    out += "| sigma | SSIM same | SSIM diff | PSNR same | PSNR diff | B same | B diff | BW same | BW diff | crossover |\n";
    out += "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& e : r.sweep) {
        out += "| " + num(e.sigma, 0) + " | " + num(e.same_noisy.ssim, 4) + " | " + num(e.different.ssim, 4) + " | " +
               num(e.same_noisy.psnr, 2) + " | " + num(e.different.psnr, 2) + " | " + num(e.same_noisy.b, 4) + " | " +
               num(e.different.b, 4) + " | " + num(e.same_noisy.bw, 4) + " | " + num(e.different.bw, 4) + " | " +
               (e.crossover ? "yes" : "no") + " |\n";
    }
    return out;
}

Report sanity_suite(std::uint64_t seed, const std::filesystem::path& out_dir) {
    const Report r = run(seed);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

    const auto [subject, other] = pick_subjects(seed);
    save_png(subject, out_dir / "subject.png");
    save_png(other, out_dir / "different_subject.png");
    save_png(degrade(subject, {DegradationKind::GaussianBlur, kRowABlurSigma, 0}), out_dir / "subject_blurred.png");
    for (const auto& e : r.sweep) {
        if (e.sigma > 0) save_png(noisy(subject, e.sigma, seed), out_dir / ("subject_noise_" + num(e.sigma, 0) + ".png"));
    }
    {
        std::ofstream json_out(out_dir / "sanity.json", std::ios::trunc);
        std::ofstream md_out(out_dir / "sanity.md", std::ios::trunc);
        if (!json_out || !md_out) throw Error(ErrorCode::IoError, "cannot write sanity report into " + out_dir.string());
        json_out << to_json(r).dump(2) << '\n';
        md_out << to_markdown(r);
    }
    if (r.crossover_sigmas.empty()) {
        throw Error(ErrorCode::AssertionFailed,
                    "no noise level in 10..80 where SSIM prefers the different subject and BW(SSIM) does not");
    }
    return r;
}

}  // namespace demorph::sanity
