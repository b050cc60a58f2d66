// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: demorph_acceptance <path-to-demorph-eval>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>

#include "demorph/baselines.hpp"
#include "demorph/biometric.hpp"
#include "demorph/dataset.hpp"
#include "demorph/error.hpp"
#include "demorph/evaluation.hpp"
#include "demorph/iqa.hpp"
#include "demorph/pairing.hpp"
#include "demorph/synthetic.hpp"
#include "support/cli_runner.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace demorph;
using iqa::IqaKind;

namespace {

// Tolerances and bounds.
constexpr double kRuntimeLimitSeconds = 10.0;
constexpr double kOracleBwTolerance = 1e-9;
constexpr double kMinBwGap = 0.1;
// Regression floor from the first run (observed gap 0.8124).
constexpr double kPinnedBwGap = 0.80;
constexpr double kSsimTolerance = 1e-6;
constexpr double kPsnrTolerance = 1e-9;
constexpr int kSsimPairs = 50;
constexpr int kThresholdSets = 200;
constexpr std::size_t kMaxScores = 1000;
constexpr int kPermutationGrids = 1000;
constexpr std::uint64_t kSanitySeed = 42;

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

// The default synthetic benchmark with trivial and oracle outputs.
struct Benchmark {
    testutil::TempDir dir{"acceptance"};
    std::vector<MorphRecord> trivial;
    std::vector<MorphRecord> oracle;
    std::optional<EmbeddingStore> store;
    double build_seconds = 0.0;

    Benchmark() {
        const auto start = std::chrono::steady_clock::now();
        trivial = synth::materialize_benchmark(synth::build_benchmark({}), dir.path());
        store = load_embedding_store(dir / "embeddings.bemb");
        build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        oracle = baseline::materialize(trivial, baseline::Kind::Oracle, dir / "oracle");
        const auto outputs = synth::embed_manifest(oracle);
        for (const auto& e : outputs.entries()) {
            if (!store->contains(e.id)) store->add(e);
        }
    }
};

Benchmark& benchmark() {
    static Benchmark b;
    return b;
}

eval::EvaluationRun evaluate(const std::vector<MorphRecord>& records) {
    eval::RunParams p;
    p.dataset_name = "synthetic";
    p.threads = 4;
    return eval::run_evaluation(records, *benchmark().store, nullptr, p);
}

Outcome trivial_degeneracy() {
    const auto start = std::chrono::steady_clock::now();
    auto& b = benchmark();
    const auto run = evaluate(b.trivial);
    const double seconds =
        b.build_seconds + std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = run.report.n_morphs == 100 && run.report.tmr_at_fmr == 1.0 && run.report.ra == 1.0 &&
                    run.report.target_fmr == 0.10 && run.report.params.tau == 0.4 && seconds < kRuntimeLimitSeconds;
    return {ok, fmt("n=%zu TMR@10%%FMR=%.1f%% RA(tau=0.4)=%.1f%% runtime=%.2fs (limit %.0fs)", run.report.n_morphs,
                    100 * run.report.tmr_at_fmr, 100 * run.report.ra, seconds, kRuntimeLimitSeconds)};
}

Outcome bw_discriminates() {
    const auto trivial = evaluate(benchmark().trivial);
    const auto oracle = evaluate(benchmark().oracle);
    std::map<std::string, double> oracle_bw;
    for (const auto& r : oracle.records) oracle_bw[r.evaluation.morph_id] = r.evaluation.iqa.at(IqaKind::Ssim).bw;
    std::size_t lower = 0;
    for (const auto& r : trivial.records) {
        const auto it = oracle_bw.find(r.evaluation.morph_id);
        if (it != oracle_bw.end() && r.evaluation.iqa.at(IqaKind::Ssim).bw < it->second) ++lower;
    }
    const double gap = oracle.report.bw_ssim - trivial.report.bw_ssim;
    const bool ok = std::abs(oracle.report.bw_ssim - 2.0) <= kOracleBwTolerance &&
                    lower == trivial.records.size() && trivial.records.size() == 100 && gap >= kMinBwGap &&
                    gap >= kPinnedBwGap;
    return {ok, fmt("oracle BW(SSIM)=%.12f trivial BW(SSIM)=%.6f lower on %zu/%zu records gap=%.6f (min %.1f, pinned %.2f)",
                    oracle.report.bw_ssim, trivial.report.bw_ssim, lower, trivial.records.size(), gap, kMinBwGap,
                    kPinnedBwGap)};
}

Outcome ssim_oracle() {
    std::mt19937_64 rng(20240601);
    double worst = 0.0;
    for (int i = 0; i < kSsimPairs; ++i) {
        const auto a = testutil::random_image(rng, 32, 32, 1);
        const auto b = testutil::random_image(rng, 32, 32, 1);
        const double naive = oracle::naive_ssim({a.samples().begin(), a.samples().end()},
                                                {b.samples().begin(), b.samples().end()}, 32, 32);
        worst = std::max(worst, std::abs(iqa::ssim(a, b) - naive));
    }
    // Constant images: only the luminance term survives.
    const double c1 = (0.01 * 255) * (0.01 * 255);
    const double closed = (2.0 * 100 * 50 + c1) / (100.0 * 100 + 50.0 * 50 + c1);
    const double got = iqa::ssim(ImageBuffer::filled(32, 32, 1, 100), ImageBuffer::filled(32, 32, 1, 50));
    const bool ok = worst <= kSsimTolerance && std::abs(got - closed) <= kSsimTolerance;
    return {ok, fmt("max |ssim - naive| over %d pairs=%.3g; constant(100,50)=%.9f closed form %.9f", kSsimPairs,
                    worst, got, closed)};
}

Outcome psnr_closed_forms() {
    std::mt19937_64 rng(7);
    std::vector<std::uint8_t> base(32 * 32 * 3), shifted(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        base[i] = static_cast<std::uint8_t>(rng() % 240);
        shifted[i] = static_cast<std::uint8_t>(base[i] + 16);
    }
    const double offset = iqa::psnr(ImageBuffer(32, 32, 3, base), ImageBuffer(32, 32, 3, shifted));
    const double expected = 20.0 * std::log10(255.0 / 16.0);
    const auto img = ImageBuffer(32, 32, 3, base);
    const double identical = iqa::cap_psnr(iqa::psnr(img, img));
    const double extreme = iqa::psnr(ImageBuffer::filled(8, 8, 3, 0), ImageBuffer::filled(8, 8, 3, 255));
    const bool ok = std::abs(offset - expected) <= kPsnrTolerance && identical == 100.0 &&
                    std::abs(extreme) <= kPsnrTolerance;
    return {ok, fmt("offset 16: %.10f dB (closed form %.10f); identical: %.1f dB; 0 vs 255: %.3g dB", offset,
                    expected, identical, extreme)};
}

Outcome threshold_oracle() {
    std::mt19937_64 rng(99);
    int exact = 0, within = 0, monotone = 0;
    for (int i = 0; i < kThresholdSets; ++i) {
        bio::ScoreSet s;
        const std::size_t n = 1 + rng() % kMaxScores;
        const bool quantized = i % 2 == 0;  // forces ties
        for (std::size_t k = 0; k < n; ++k) {
            double v = testutil::uniform(rng, -1.0, 1.0);
            if (quantized) v = std::round(v * 20) / 20;
            s.impostor.push_back(v);
        }
        const double target = testutil::uniform(rng, 0.001, 0.5);
        const auto want = oracle::brute_force_threshold(s.impostor, target);
        if (!want) {
            // Too many impostors at +1: the rule must refuse rather than return a threshold.
            const bool refused = testutil::thrown_code([&] { (void)bio::compute_threshold_at_fmr(s, target); }) ==
                                 "UnattainableFmr";
            exact += refused ? 1 : 0;
            within += refused ? 1 : 0;
            monotone += refused ? 1 : 0;
            continue;
        }
        const auto got = bio::compute_threshold_at_fmr(s, target);
        if (got.value == want->value && got.achieved_fmr == want->fmr) ++exact;
        if (got.achieved_fmr <= target) ++within;
        const auto looser = bio::compute_threshold_at_fmr(s, std::min(0.999, target + 0.1));
        if (looser.value <= got.value) ++monotone;
    }
    const bool ok = exact == kThresholdSets && within == kThresholdSets && monotone == kThresholdSets;
    return {ok, fmt("exact %d/%d, achieved<=target %d/%d, monotone %d/%d", exact, kThresholdSets, within,
                    kThresholdSets, monotone, kThresholdSets)};
}

pairing::Grid random_grid(std::mt19937_64& rng, double lo, double hi) {
    return {testutil::uniform(rng, lo, hi), testutil::uniform(rng, lo, hi), testutil::uniform(rng, lo, hi),
            testutil::uniform(rng, lo, hi)};
}

Outcome permutation_invariance() {
    std::mt19937_64 rng(123);
    pairing::EvaluationParams params;
    params.theta = 0.6;
    params.epsilon = 0.3;
    int same = 0;
    for (int i = 0; i < kPermutationGrids; ++i) {
        const auto b = random_grid(rng, -1.0, 1.0);
        const std::map<IqaKind, pairing::Grid> grids{{IqaKind::Ssim, random_grid(rng, -1.0, 1.0)},
                                                     {IqaKind::Psnr, random_grid(rng, 0.0, 120.0)}};
        std::map<IqaKind, pairing::Grid> swapped;
        for (const auto& [k, g] : grids) swapped[k] = g.swapped_outputs();
        const double b12 = testutil::uniform(rng, -1.0, 1.0);
        params.tau = testutil::uniform(rng, -0.5, 0.9);
        params.bw.clamp_negative = i % 2 == 0;
        const auto a = pairing::evaluate_grids("m", b, b12, grids, params);
        const auto s = pairing::evaluate_grids("m", b.swapped_outputs(), b12, swapped, params);
        bool eq = a.ra_pass == s.ra_pass && a.conditions->dissimilar == s.conditions->dissimilar &&
                  a.conditions->aligned == s.conditions->aligned &&
                  std::minmax(a.matched_first, a.matched_second) == std::minmax(s.matched_first, s.matched_second);
        for (const auto kind : {IqaKind::Ssim, IqaKind::Psnr}) {
            eq = eq && a.iqa.at(kind).paired == s.iqa.at(kind).paired && a.iqa.at(kind).bw == s.iqa.at(kind).bw;
        }
        same += eq ? 1 : 0;
    }
    return {same == kPermutationGrids, fmt("%d/%d grids identical after swapping outputs", same, kPermutationGrids)};
}

Outcome scenario_classifier() {
    const std::vector<std::string> universe{"A", "B", "C"};
    auto subset = [&](int mask) {
        std::set<std::string> s;
        for (int i = 0; i < 3; ++i) {
            if (mask & (1 << i)) s.insert(universe[i]);
        }
        return s;
    };
    int cases = 0, agree = 0;
    for (int train = 1; train < 8; ++train) {
        for (int test = 1; test < 8; ++test) {
            const auto rel = oracle::set_relation(subset(train), subset(test));
            const Scenario want = rel == oracle::Relation::Subset    ? Scenario::One
                                  : rel == oracle::Relation::Overlap ? Scenario::Two
                                                                     : Scenario::Three;
            agree += classify_scenario({subset(train), subset(test)}) == want ? 1 : 0;
            ++cases;
        }
    }
    return {cases == 49 && agree == 49, fmt("%d/%d cases agree with the set-relation oracle", agree, cases)};
}

Outcome sanity_crossover(const std::string& cli) {
    testutil::TempDir dir("acceptance_sanity");
    const auto r = testutil::cli(cli, "sanity --seed " + std::to_string(kSanitySeed) + " --out " + q(dir.path()));
    const auto at = r.out.find("crossover at sigma:");
    std::string sigmas = at == std::string::npos ? "none" : r.out.substr(at + 19);
    sigmas.erase(std::remove(sigmas.begin(), sigmas.end(), '\n'), sigmas.end());
    const bool ok = r.code == 0 && at != std::string::npos && !sigmas.empty() &&
                    exit_code_for(ErrorCode::AssertionFailed) == 3;
    return {ok, fmt("seed %llu exit %d, crossover sigmas:%s (no-crossover exit code %d)",
                    static_cast<unsigned long long>(kSanitySeed), r.code, sigmas.c_str(),
                    exit_code_for(ErrorCode::AssertionFailed))};
}

Outcome thread_determinism(const std::string& cli) {
    auto& b = benchmark();
    const std::string base = "evaluate --manifest " + q(b.dir / "manifest.jsonl") + " --embeddings " +
                             q(b.dir / "embeddings.bemb") + " --theta 0.9 --epsilon 0.3 --format json";
    const auto one = testutil::cli(cli, base + " --threads 1 --out " + q(b.dir / "t1.json"));
    const auto eight = testutil::cli(cli, base + " --threads 8 --out " + q(b.dir / "t8.json"));
    const auto a = testutil::read_text(b.dir / "t1.json");
    const auto c = testutil::read_text(b.dir / "t8.json");
    const bool ok = one.code == 0 && eight.code == 0 && !a.empty() && a == c;
    return {ok, fmt("exit codes %d/%d, %zu vs %zu bytes, identical=%s", one.code, eight.code, a.size(), c.size(),
                    a == c ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <demorph-eval>\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1];
    report(1, "trivial demorpher reaches perfect TMR and RA", trivial_degeneracy);
    report(2, "BW(SSIM) separates oracle from trivial", bw_discriminates);
    report(3, "SSIM matches the naive oracle", ssim_oracle);
    report(4, "PSNR closed forms", psnr_closed_forms);
    report(5, "threshold calibration matches exhaustive search", threshold_oracle);
    report(6, "metrics invariant to output order", permutation_invariance);
    report(7, "scenario classifier", scenario_classifier);
    report(8, "sanity sweep shows an SSIM/BW crossover", [&] { return sanity_crossover(cli); });
    report(9, "evaluate is thread-count deterministic", [&] { return thread_determinism(cli); });
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
