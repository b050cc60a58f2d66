#include "demorph/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "demorph/error.hpp"

namespace demorph::report {

namespace {

using nlohmann::json;

constexpr const char* kTmrPooling =
    "two genuine scores per morph pooled; one shared threshold per dataset and matcher";
constexpr const char* kNormalizedNote = "bw_*_normalized = BW / 2, an extra column outside the BW definition";

constexpr std::string_view kCsvHeader =
    "dataset,matcher,n_morphs,mean_psnr,mean_ssim,ra,tmr_at_fmr,target_fmr,achieved_fmr,threshold,bw_ssim,bw_psnr,"
    "bw_ssim_normalized,bw_psnr_normalized";

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string fixed(double v, int decimals) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

double parse_real(const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::MalformedLine, "bad number '" + s + "' in report csv");
    }
    return v;
}

std::optional<double> opt_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

Format parse_format(std::string_view name) {
    if (name == "json") return Format::Json;
    if (name == "csv") return Format::Csv;
    if (name == "markdown" || name == "md") return Format::Markdown;
    throw Error(ErrorCode::InvalidArgument, "unknown report format '" + std::string(name) + "'");
}

double round_sig9(double v) {
    if (!std::isfinite(v) || v == 0.0) return v;
    return std::strtod(fmt9(v).c_str(), nullptr);
}

eval::MetricsReport canonicalize(const eval::MetricsReport& in) {
    auto r = in;
    for (double* v : {&r.mean_psnr, &r.mean_ssim, &r.ra, &r.tmr_at_fmr, &r.target_fmr, &r.achieved_fmr, &r.threshold,
                      &r.bw_ssim, &r.bw_psnr, &r.params.tau, &r.params.target_fmr, &r.params.ssim.gaussian_sigma,
                      &r.params.ssim.k1, &r.params.ssim.k2, &r.params.ssim.dynamic_range}) {
        *v = round_sig9(*v);
    }
    for (auto* o : {&r.dissimilar_rate, &r.aligned_rate, &r.params.theta, &r.params.epsilon}) {
        if (*o) **o = round_sig9(**o);
    }
    return r;
}

json to_json(const eval::MetricsReport& in) {
    const auto r = canonicalize(in);
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json metrics = {
        {"mean_psnr", r.mean_psnr},   {"mean_ssim", r.mean_ssim},   {"ra", r.ra},
        {"tmr_at_fmr", r.tmr_at_fmr}, {"target_fmr", r.target_fmr}, {"achieved_fmr", r.achieved_fmr},
        {"threshold", r.threshold},   {"bw_ssim", r.bw_ssim},       {"bw_psnr", r.bw_psnr},
    };
    if (r.dissimilar_rate) metrics["dissimilar_rate"] = *r.dissimilar_rate;
    if (r.aligned_rate) metrics["aligned_rate"] = *r.aligned_rate;
    if (r.params.bw_normalize) {
        metrics["bw_ssim_normalized"] = round_sig9(r.bw_ssim / 2.0);
        metrics["bw_psnr_normalized"] = round_sig9(r.bw_psnr / 2.0);
    }
    json params = {
        {"tau", r.params.tau},
        {"theta", opt(r.params.theta)},
        {"epsilon", opt(r.params.epsilon)},
        {"fmr", r.params.target_fmr},
        {"clamp_negative_b", r.params.clamp_negative_b},
        {"bw_normalize", r.params.bw_normalize},
        {"tmr_pooling", kTmrPooling},
        {"ssim",
         {{"window_size", r.params.ssim.window_size},
          {"gaussian_sigma", r.params.ssim.gaussian_sigma},
          {"k1", r.params.ssim.k1},
          {"k2", r.params.ssim.k2},
          {"dynamic_range", r.params.ssim.dynamic_range},
          {"channel", "luma"}}},
    };
    if (r.params.bw_normalize) params["bw_normalize_note"] = kNormalizedNote;
    json rejects = json::array();
    for (const auto& rej : r.rejects) rejects.push_back({{"morph_id", rej.morph_id}, {"error", rej.error}});
    return {{"dataset", r.dataset_name}, {"matcher", r.matcher_name}, {"n_morphs", r.n_morphs},
            {"metrics", metrics},        {"params", params},          {"rejects", rejects}};
}

eval::MetricsReport from_json(const json& j) {
    try {
        eval::MetricsReport r;
        r.dataset_name = j.at("dataset").get<std::string>();
        r.matcher_name = j.at("matcher").get<std::string>();
        r.n_morphs = j.at("n_morphs").get<std::size_t>();
        const auto& m = j.at("metrics");
        r.mean_psnr = m.at("mean_psnr").get<double>();
        r.mean_ssim = m.at("mean_ssim").get<double>();
        r.ra = m.at("ra").get<double>();
        r.tmr_at_fmr = m.at("tmr_at_fmr").get<double>();
        r.target_fmr = m.at("target_fmr").get<double>();
        r.achieved_fmr = m.at("achieved_fmr").get<double>();
        r.threshold = m.at("threshold").get<double>();
        r.bw_ssim = m.at("bw_ssim").get<double>();
        r.bw_psnr = m.at("bw_psnr").get<double>();
        r.dissimilar_rate = opt_from(m, "dissimilar_rate");
        r.aligned_rate = opt_from(m, "aligned_rate");
        const auto& p = j.at("params");
        r.params.tau = p.at("tau").get<double>();
        r.params.theta = opt_from(p, "theta");
        r.params.epsilon = opt_from(p, "epsilon");
        r.params.target_fmr = p.at("fmr").get<double>();
        r.params.clamp_negative_b = p.at("clamp_negative_b").get<bool>();
        r.params.bw_normalize = p.at("bw_normalize").get<bool>();
        const auto& s = p.at("ssim");
        r.params.ssim.window_size = s.at("window_size").get<int>();
        r.params.ssim.gaussian_sigma = s.at("gaussian_sigma").get<double>();
        r.params.ssim.k1 = s.at("k1").get<double>();
        r.params.ssim.k2 = s.at("k2").get<double>();
        r.params.ssim.dynamic_range = s.at("dynamic_range").get<double>();
        for (const auto& rej : j.at("rejects")) {
            r.rejects.push_back({rej.at("morph_id").get<std::string>(), rej.at("error").get<std::string>()});
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedLine, std::string("report json: ") + e.what());
    }
}

std::string to_json_text(const eval::MetricsReport& r) { return to_json(r).dump(2) + "\n"; }

std::string to_csv(std::span<const eval::MetricsReport> reports) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : reports) {
        const std::string norm_ssim = r.params.bw_normalize ? fmt9(r.bw_ssim / 2.0) : "";
        const std::string norm_psnr = r.params.bw_normalize ? fmt9(r.bw_psnr / 2.0) : "";
        out += csv_field(r.dataset_name) + ',' + csv_field(r.matcher_name) + ',' + std::to_string(r.n_morphs) + ',' +
               fmt9(r.mean_psnr) + ',' + fmt9(r.mean_ssim) + ',' + fmt9(r.ra) + ',' + fmt9(r.tmr_at_fmr) + ',' +
               fmt9(r.target_fmr) + ',' + fmt9(r.achieved_fmr) + ',' + fmt9(r.threshold) + ',' + fmt9(r.bw_ssim) +
               ',' + fmt9(r.bw_psnr) + ',' + norm_ssim + ',' + norm_psnr + '\n';
    }
    return out;
}

std::vector<eval::MetricsReport> from_csv(std::string_view text) {
    std::vector<eval::MetricsReport> reports;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            if (line != kCsvHeader) throw Error(ErrorCode::MalformedLine, "unexpected report csv header");
            header = false;
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 14) throw Error(ErrorCode::MalformedLine, "report csv row needs 14 fields");
        eval::MetricsReport r;
        r.dataset_name = f[0];
        r.matcher_name = f[1];
        r.n_morphs = static_cast<std::size_t>(parse_real(f[2]));
        r.mean_psnr = parse_real(f[3]);
        r.mean_ssim = parse_real(f[4]);
        r.ra = parse_real(f[5]);
        r.tmr_at_fmr = parse_real(f[6]);
        r.target_fmr = parse_real(f[7]);
        r.achieved_fmr = parse_real(f[8]);
        r.threshold = parse_real(f[9]);
        r.bw_ssim = parse_real(f[10]);
        r.bw_psnr = parse_real(f[11]);
        r.params.bw_normalize = !f[12].empty();
        r.params.target_fmr = r.target_fmr;
        reports.push_back(std::move(r));
    }
    return reports;
}

std::string to_markdown(std::span<const eval::MetricsReport> reports) {
    std::vector<std::string> datasets;
    std::vector<std::string> matchers;
    std::map<std::pair<std::string, std::string>, const eval::MetricsReport*> cell;
    for (const auto& r : reports) {
        if (std::find(datasets.begin(), datasets.end(), r.dataset_name) == datasets.end()) {
            datasets.push_back(r.dataset_name);
        }
        if (std::find(matchers.begin(), matchers.end(), r.matcher_name) == matchers.end()) {
            matchers.push_back(r.matcher_name);
        }
        cell[{r.dataset_name, r.matcher_name}] = &r;
    }
    const bool normalized = std::any_of(reports.begin(), reports.end(),
                                        [](const auto& r) { return r.params.bw_normalize; });

    std::string header = "| Dataset | PSNR/SSIM |";
    std::string rule = "|---|---|";
    auto column = [&](const std::string& name, const std::string& matcher) {
        header += " " + name + " (" + matcher + ") |";
        rule += "---|";
    };
    for (const auto& m : matchers) column("Rest. Acc", m);
    for (const auto& m : matchers) column("BW(SSIM)", m);
    for (const auto& m : matchers) column("BW(PSNR)", m);
    if (normalized) {
        for (const auto& m : matchers) column("BW(SSIM)/2", m);
        for (const auto& m : matchers) column("BW(PSNR)/2", m);
    }
    for (const auto& m : matchers) {
        const auto* any = reports.empty() ? nullptr : &reports.front();
        column("TMR@" + fixed(100.0 * (any ? any->target_fmr : 0.1), 0) + "%FMR", m);
    }

    std::string out = header + "\n" + rule + "\n";
    for (const auto& d : datasets) {
        const eval::MetricsReport* first = nullptr;
        for (const auto& m : matchers) {
            if (const auto it = cell.find({d, m}); it != cell.end() && first == nullptr) first = it->second;
        }
        std::string row = "| " + d + " | " + fixed(first->mean_psnr, 2) + "/" + fixed(first->mean_ssim, 3) + " |";
        auto value = [&](const std::string& m, auto&& fn) {
            const auto it = cell.find({d, m});
            row += " " + (it == cell.end() ? std::string("-") : fn(*it->second)) + " |";
        };
        for (const auto& m : matchers) value(m, [](const auto& r) { return fixed(100.0 * r.ra, 2) + "%"; });
        for (const auto& m : matchers) value(m, [](const auto& r) { return fixed(r.bw_ssim, 3); });
        for (const auto& m : matchers) value(m, [](const auto& r) { return fixed(r.bw_psnr, 2); });
        if (normalized) {
            for (const auto& m : matchers) value(m, [](const auto& r) { return fixed(r.bw_ssim / 2.0, 3); });
            for (const auto& m : matchers) value(m, [](const auto& r) { return fixed(r.bw_psnr / 2.0, 2); });
        }
        for (const auto& m : matchers) value(m, [](const auto& r) { return fixed(100.0 * r.tmr_at_fmr, 2) + "%"; });
        out += row + "\n";
    }
    return out;
}

void emit_report(std::span<const eval::MetricsReport> reports, Format format, const std::filesystem::path& path) {
    std::string text;
    switch (format) {
        case Format::Json:
            if (reports.size() != 1) throw Error(ErrorCode::InvalidArgument, "json output holds exactly one report");
            text = to_json_text(reports.front());
            break;
        case Format::Csv: text = to_csv(reports); break;
        case Format::Markdown: text = to_markdown(reports); break;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace demorph::report
