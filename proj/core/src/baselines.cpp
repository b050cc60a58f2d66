#include "demorph/baselines.hpp"

#include "demorph/error.hpp"

namespace demorph::baseline {

std::pair<ImageBuffer, ImageBuffer> trivial_demorph(const ImageBuffer& morph) { return {morph, morph}; }

std::pair<ImageBuffer, ImageBuffer> oracle_demorph(const MorphRecord& record) {
    return {load_image(record.gt1_path), load_image(record.gt2_path)};
}

Kind parse_kind(std::string_view name) {
    if (name == "trivial") return Kind::Trivial;
    if (name == "oracle") return Kind::Oracle;
    throw Error(ErrorCode::InvalidArgument, "unknown baseline '" + std::string(name) + "' (trivial|oracle)");
}

std::vector<MorphRecord> materialize(std::span<const MorphRecord> records, Kind kind,
                                     const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

    std::vector<MorphRecord> rewritten;
    rewritten.reserve(records.size());
    for (const auto& record : records) {
        MorphRecord r = record;
        if (kind == Kind::Trivial) {
            const auto [o1, o2] = trivial_demorph(load_image(record.morph_path));
            r.out1_path = out_dir / (record.morph_id + "_trivial.png");
            r.out2_path = r.out1_path;
            save_png(o1, r.out1_path);
        } else {
            const auto [o1, o2] = oracle_demorph(record);
            r.out1_path = out_dir / (record.morph_id + "_o1.png");
            r.out2_path = out_dir / (record.morph_id + "_o2.png");
            save_png(o1, r.out1_path);
            save_png(o2, r.out2_path);
        }
        validate_record(r);
        rewritten.push_back(std::move(r));
    }
    return rewritten;
}

}  // namespace demorph::baseline
