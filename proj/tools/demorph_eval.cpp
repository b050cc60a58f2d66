// demorph-eval: batch evaluation of demorphing outputs and the supporting tools.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "demorph/baselines.hpp"
#include "demorph/biometric.hpp"
#include "demorph/dataset.hpp"
#include "demorph/error.hpp"
#include "demorph/evaluation.hpp"
#include "demorph/report.hpp"
#include "demorph/sanity.hpp"
#include "demorph/synthetic.hpp"

namespace fs = std::filesystem;
using namespace demorph;

namespace {

struct EvaluateArgs {
    fs::path manifest;
    fs::path embeddings;
    fs::path gallery;
    double fmr = bio::kDefaultTargetFmr;
    double tau = bio::kDefaultTau;
    std::optional<double> theta;
    std::optional<double> epsilon;
    std::string format = "json";
    fs::path out;
    fs::path records_out;
    std::string dataset;
    bool skip_bad_records = false;
    bool bw_normalize = false;
    bool allow_negative_b = false;
    unsigned threads = 0;
};

int run_evaluate(const EvaluateArgs& a) {
    if (a.theta.has_value() != a.epsilon.has_value()) {
        throw Error(ErrorCode::InvalidArgument, "--theta and --epsilon must be given together");
    }
    const auto format = report::parse_format(a.format);
    const auto records = parse_manifest(a.manifest);
    const auto store = load_embedding_store(a.embeddings);
    std::optional<EmbeddingStore> gallery;
    if (!a.gallery.empty()) gallery = load_embedding_store(a.gallery);

    eval::RunParams p;
    p.dataset_name = a.dataset.empty() ? a.manifest.stem().string() : a.dataset;
    p.target_fmr = a.fmr;
    p.record.tau = a.tau;
    p.record.theta = a.theta;
    p.record.epsilon = a.epsilon;
    p.record.bw.clamp_negative = !a.allow_negative_b;
    p.bw_normalize = a.bw_normalize;
    p.skip_bad_records = a.skip_bad_records;
    p.threads = a.threads > 0 ? a.threads : std::max(1U, std::thread::hardware_concurrency());

    const auto run = eval::run_evaluation(records, store, gallery ? &*gallery : nullptr, p);
    report::emit_report(std::vector{run.report}, format, a.out);
    if (!a.records_out.empty()) eval::write_record_results(run.records, a.records_out);

    for (const auto& r : run.report.rejects) std::cerr << "skipped " << r.morph_id << ": " << r.error << '\n';
    std::printf("%s: %zu morphs, TMR@%g%%FMR %.4f, RA %.4f, BW(SSIM) %.4f, BW(PSNR) %.4f\n",
                run.report.dataset_name.c_str(), run.report.n_morphs, 100.0 * run.report.target_fmr,
                run.report.tmr_at_fmr, run.report.ra, run.report.bw_ssim, run.report.bw_psnr);
    return 0;
}

int run_threshold(const fs::path& scores_path, double fmr) {
    const auto scores = bio::read_scores_csv(scores_path);
    const auto t = bio::compute_threshold_at_fmr(scores, fmr);
    std::printf("threshold %.17g\nachieved_fmr %.17g\n", t.value, t.achieved_fmr);
    if (!scores.genuine.empty()) std::printf("tmr %.17g\n", bio::tmr(scores, t));
    return 0;
}

int run_sanity(std::uint64_t seed, const fs::path& out) {
    try {
        const auto r = sanity::sanity_suite(seed, out);
        std::cout << sanity::to_markdown(r);
        std::cout << "\ncrossover at sigma:";
        for (double s : r.crossover_sigmas) std::cout << ' ' << s;
        std::cout << '\n';
    } catch (const Error& e) {
        // The table is still useful when the assertion fails.
        if (e.code() == ErrorCode::AssertionFailed) std::cout << sanity::to_markdown(sanity::run(seed));
        throw;
    }
    return 0;
}

int run_validate_scenario(const fs::path& train, const fs::path& test) {
    const ScenarioSplit split{read_id_list(train), read_id_list(test)};
    std::cout << to_string(classify_scenario(split)) << '\n';
    return 0;
}

int run_baseline(const fs::path& manifest, const std::string& kind, const fs::path& out) {
    const auto records = parse_manifest(manifest);
    const auto rewritten = baseline::materialize(records, baseline::parse_kind(kind), out);
    write_manifest(rewritten, out / "manifest.jsonl");
    std::printf("wrote %zu %s baseline records to %s\n", rewritten.size(), kind.c_str(),
                (out / "manifest.jsonl").string().c_str());
    return 0;
}

int run_synth(const synth::BenchmarkSpec& spec, const fs::path& out) {
    const auto bench = synth::build_benchmark(spec);
    const auto records = synth::materialize_benchmark(bench, out);
    std::printf("wrote %zu morphs over %zu faces to %s\n", records.size(), bench.faces.size(), out.string().c_str());
    return 0;
}

int run_embed_grid(const fs::path& manifest, const fs::path& out) {
    const auto store = synth::embed_manifest(parse_manifest(manifest));
    save_embedding_store(store, out);
    std::printf("wrote %zu embeddings (%s) to %s\n", store.size(), store.matcher_name().c_str(), out.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Metrics for reference-free face demorphing"};
    app.require_subcommand(1);

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate demorpher outputs listed in a manifest");
    evaluate->add_option("--manifest", ev.manifest, "JSON-lines manifest")->required();
    evaluate->add_option("--embeddings", ev.embeddings, "BEMB store covering ground truths and outputs")->required();
    evaluate->add_option("--gallery", ev.gallery, "BEMB store used as the impostor gallery");
    evaluate->add_option("--fmr", ev.fmr, "Target false match rate")->capture_default_str();
    evaluate->add_option("--tau", ev.tau, "Restoration accuracy threshold")->capture_default_str();
    evaluate->add_option("--theta", ev.theta, "Output dissimilarity threshold (needs --epsilon)");
    evaluate->add_option("--epsilon", ev.epsilon, "Output alignment threshold (needs --theta)");
    evaluate->add_option("--format", ev.format, "json|csv|markdown")->capture_default_str();
    evaluate->add_option("--out", ev.out, "Report path")->required();
    evaluate->add_option("--records-out", ev.records_out, "Per-record JSON-lines output");
    evaluate->add_option("--dataset", ev.dataset, "Dataset name in the report (default: manifest stem)");
    evaluate->add_flag("--skip-bad-records", ev.skip_bad_records, "Report failing records instead of aborting");
    evaluate->add_flag("--bw-normalize", ev.bw_normalize, "Also report BW / 2");
    evaluate->add_flag("--allow-negative-b", ev.allow_negative_b, "Do not clamp negative similarity weights");
    evaluate->add_option("--threads", ev.threads, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);

    fs::path scores_path;
    double threshold_fmr = bio::kDefaultTargetFmr;
    auto* threshold = app.add_subcommand("threshold", "Threshold at a target FMR from a label,score CSV");
    threshold->add_option("--scores", scores_path, "CSV with header label,score")->required();
    threshold->add_option("--fmr", threshold_fmr, "Target false match rate")->capture_default_str();

    std::uint64_t sanity_seed = 42;
    fs::path sanity_out;
    auto* sanity_cmd = app.add_subcommand("sanity", "Noise sweep showing where SSIM and BW(SSIM) disagree");
    sanity_cmd->add_option("--seed", sanity_seed, "Subject seed")->capture_default_str();
    sanity_cmd->add_option("--out", sanity_out, "Output directory")->required();

    fs::path train_list, test_list;
    auto* scenario = app.add_subcommand("validate-scenario", "Classify a train/test identity split");
    scenario->add_option("--train", train_list, "Training identity list")->required();
    scenario->add_option("--test", test_list, "Test identity list")->required();

    fs::path baseline_manifest, baseline_out;
    std::string baseline_kind;
    auto* baseline_cmd = app.add_subcommand("demorph-baseline", "Write trivial or oracle outputs and a new manifest");
    baseline_cmd->add_option("--manifest", baseline_manifest, "Input manifest")->required();
    baseline_cmd->add_option("--kind", baseline_kind, "trivial|oracle")
        ->required()
        ->check(CLI::IsMember({"trivial", "oracle"}));
    baseline_cmd->add_option("--out", baseline_out, "Output directory")->required();

    synth::BenchmarkSpec spec;
    fs::path synth_out;
    auto* synth_cmd = app.add_subcommand("synth-benchmark", "Generate texture faces, blended morphs and a manifest");
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();
    synth_cmd->add_option("--identities", spec.identities, "Number of faces")->capture_default_str();
    synth_cmd->add_option("--morphs", spec.morphs, "Number of morphs")->capture_default_str();
    synth_cmd->add_option("--alpha", spec.alpha, "Blend weight")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();

    fs::path embed_manifest_path, embed_out;
    auto* embed_cmd = app.add_subcommand("embed-grid", "Embed every manifest image with the 8x8 grid embedder");
    embed_cmd->add_option("--manifest", embed_manifest_path, "Manifest")->required();
    embed_cmd->add_option("--out", embed_out, "BEMB output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*evaluate) return run_evaluate(ev);
        if (*threshold) return run_threshold(scores_path, threshold_fmr);
        if (*sanity_cmd) return run_sanity(sanity_seed, sanity_out);
        if (*scenario) return run_validate_scenario(train_list, test_list);
        if (*baseline_cmd) return run_baseline(baseline_manifest, baseline_kind, baseline_out);
        if (*synth_cmd) return run_synth(spec, synth_out);
        if (*embed_cmd) return run_embed_grid(embed_manifest_path, embed_out);
    } catch (const Error& e) {
        std::cerr << "demorph-eval: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "demorph-eval: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
