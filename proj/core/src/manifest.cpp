#include <array>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "demorph/dataset.hpp"
#include "demorph/error.hpp"

namespace demorph {

namespace {

constexpr std::array<std::string_view, 8> kFields = {"morph_id", "morph_path", "gt1_id",    "gt2_id",
                                                     "gt1_path", "gt2_path",   "out1_path", "out2_path"};

std::string line_prefix(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

std::filesystem::path resolve(const std::string& raw, const std::filesystem::path& base_dir) {
    std::filesystem::path p(raw);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return p.lexically_normal();
}

std::string portable(const std::filesystem::path& p, const std::filesystem::path& base_dir) {
    if (p.is_absolute() && base_dir.is_absolute()) {
        const auto rel = p.lexically_relative(base_dir);
        if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    }
    return p.generic_string();
}

}  // namespace

void validate_record(const MorphRecord& r) {
    if (r.morph_id.empty()) throw Error(ErrorCode::InvalidRecord, "empty morph_id");
    if (r.gt1_id.empty() || r.gt2_id.empty()) throw Error(ErrorCode::InvalidRecord, r.morph_id + ": empty gt id");
    if (r.gt1_id == r.gt2_id) {
        throw Error(ErrorCode::InvalidRecord, r.morph_id + ": gt1_id and gt2_id are both '" + r.gt1_id + "'");
    }
    const std::array<const std::filesystem::path*, 5> distinct = {&r.morph_path, &r.gt1_path, &r.gt2_path,
                                                                  &r.out1_path, &r.out2_path};
    for (std::size_t i = 0; i < distinct.size(); ++i) {
        for (std::size_t j = i + 1; j < distinct.size(); ++j) {
            if (i == 3 && j == 4) continue;  // outputs may coincide
            if (*distinct[i] == *distinct[j]) {
                throw Error(ErrorCode::InvalidRecord, r.morph_id + ": path '" + distinct[i]->string() +
                                                          "' is used for two different roles");
            }
        }
    }
}

std::string output_embedding_id(const std::filesystem::path& output_path) { return output_path.stem().string(); }

std::vector<MorphRecord> parse_manifest_text(std::string_view text, const std::filesystem::path& base_dir) {
    std::vector<MorphRecord> records;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            if (end == text.size()) break;
            continue;
        }

        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::MalformedLine, line_prefix(line_no) + e.what());
        }
        if (!obj.is_object()) throw Error(ErrorCode::MalformedLine, line_prefix(line_no) + "not a JSON object");
        for (const auto& [key, value] : obj.items()) {
            if (std::find(kFields.begin(), kFields.end(), key) == kFields.end()) {
                throw Error(ErrorCode::MalformedLine, line_prefix(line_no) + "unknown field '" + key + "'");
            }
            if (!value.is_string()) {
                throw Error(ErrorCode::MalformedLine, line_prefix(line_no) + "field '" + key + "' is not a string");
            }
        }
        auto field = [&](std::string_view name) {
            const auto it = obj.find(name);
            if (it == obj.end()) throw Error(ErrorCode::MissingField, line_prefix(line_no) + std::string(name));
            return it->get<std::string>();
        };

        MorphRecord r;
        r.morph_id = field("morph_id");
        r.morph_path = resolve(field("morph_path"), base_dir);
        r.gt1_id = field("gt1_id");
        r.gt2_id = field("gt2_id");
        r.gt1_path = resolve(field("gt1_path"), base_dir);
        r.gt2_path = resolve(field("gt2_path"), base_dir);
        r.out1_path = resolve(field("out1_path"), base_dir);
        r.out2_path = resolve(field("out2_path"), base_dir);
        try {
            validate_record(r);
        } catch (const Error& e) {
            throw Error(e.code(), line_prefix(line_no) + e.what());
        }
        if (!seen.insert(r.morph_id).second) {
            throw Error(ErrorCode::DuplicateMorphId, line_prefix(line_no) + r.morph_id);
        }
        records.push_back(std::move(r));
        if (end == text.size()) break;
    }
    return records;
}

std::vector<MorphRecord> parse_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_manifest_text(buf.str(), path.parent_path());
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void write_manifest(std::span<const MorphRecord> records, const std::filesystem::path& path) {
    const auto base = std::filesystem::absolute(path).parent_path();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    for (const auto& r : records) {
        auto p = [&](const std::filesystem::path& x) { return portable(std::filesystem::absolute(x), base); };
        nlohmann::json obj = {
            {"morph_id", r.morph_id},   {"morph_path", p(r.morph_path)}, {"gt1_id", r.gt1_id},
            {"gt2_id", r.gt2_id},       {"gt1_path", p(r.gt1_path)},     {"gt2_path", p(r.gt2_path)},
            {"out1_path", p(r.out1_path)}, {"out2_path", p(r.out2_path)},
        };
        out << obj.dump() << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

std::set<std::string> gallery_ids(std::span<const MorphRecord> records) {
    if (records.empty()) throw Error(ErrorCode::EmptyRecordSet, "gallery of an empty manifest");
    std::set<std::string> ids;
    for (const auto& r : records) {
        ids.insert(r.gt1_id);
        ids.insert(r.gt2_id);
    }
    return ids;
}

}  // namespace demorph
