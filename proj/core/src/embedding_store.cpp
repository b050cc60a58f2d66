#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>

#include "demorph/dataset.hpp"
#include "demorph/error.hpp"

namespace demorph {

namespace {

class LeWriter {
public:
    void u16(std::uint16_t v) { bytes(v, 2); }
    void u32(std::uint32_t v) { bytes(v, 4); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void str16(const std::string& s, std::string_view what) {
        if (s.size() > 0xFFFF) throw Error(ErrorCode::InvalidArgument, std::string(what) + " longer than 65535 bytes");
        u16(static_cast<std::uint16_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void raw(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    void bytes(std::uint32_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> out_;
};

class LeReader {
public:
    explicit LeReader(std::span<const std::uint8_t> b) : b_(b) {}

    std::uint16_t u16(std::string_view what) {
        need(2, what);
        const auto v = static_cast<std::uint16_t>(b_[pos_] | (b_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32(std::string_view what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    float f32(std::string_view what) { return std::bit_cast<float>(u32(what)); }
    std::string str(std::size_t n, std::string_view what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    [[nodiscard]] std::size_t remaining() const noexcept { return b_.size() - pos_; }

private:
    void need(std::size_t n, std::string_view what) const {
        if (b_.size() - pos_ < n) {
            throw Error(ErrorCode::TruncatedFile, "unexpected end of data reading " + std::string(what) + " at byte " +
                                                      std::to_string(pos_));
        }
    }
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

}  // namespace

EmbeddingStore::EmbeddingStore(std::string matcher_name, std::uint32_t dimension)
    : matcher_name_(std::move(matcher_name)), dimension_(dimension) {
    if (dimension == 0) throw Error(ErrorCode::DimensionMismatch, "embedding dimension must be positive");
}

void EmbeddingStore::add(bio::Embedding embedding) {
    if (embedding.vector.size() != dimension_) {
        throw Error(ErrorCode::DimensionMismatch, "'" + embedding.id + "' has " +
                                                      std::to_string(embedding.vector.size()) +
                                                      " components, store dimension is " + std::to_string(dimension_));
    }
    if (std::all_of(embedding.vector.begin(), embedding.vector.end(), [](double v) { return v == 0.0; })) {
        throw Error(ErrorCode::ZeroVector, "'" + embedding.id + "' is all zeros");
    }
    if (index_.contains(embedding.id)) throw Error(ErrorCode::DuplicateId, embedding.id);
    index_.emplace(embedding.id, entries_.size());
    entries_.push_back(std::move(embedding));
}

const bio::Embedding* EmbeddingStore::find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &entries_[it->second];
}

const bio::Embedding& EmbeddingStore::require(std::string_view id) const {
    if (const auto* e = find(id)) return *e;
    throw Error(ErrorCode::MissingEmbedding, "'" + std::string(id) + "' not in store '" + matcher_name_ + "'");
}

std::vector<std::uint8_t> encode_bemb(const EmbeddingStore& store) {
    LeWriter w;
    w.raw("BEMB");
    w.u16(kBembVersion);
    w.str16(store.matcher_name(), "matcher name");
    w.u32(store.dimension());
    w.u32(static_cast<std::uint32_t>(store.size()));
    for (const auto& e : store.entries()) {
        w.str16(e.id, "embedding id");
        for (double v : e.vector) w.f32(static_cast<float>(v));
    }
    return w.take();
}

EmbeddingStore decode_bemb(std::span<const std::uint8_t> bytes) {
    LeReader r(bytes);
    if (bytes.size() < 4 || r.str(4, "magic") != "BEMB") throw Error(ErrorCode::BadMagic, "not a BEMB stream");
    const auto version = r.u16("version");
    if (version != kBembVersion) throw Error(ErrorCode::UnsupportedVersion, "BEMB version " + std::to_string(version));
    const auto name_len = r.u16("matcher name length");
    std::string name = r.str(name_len, "matcher name");
    const auto dimension = r.u32("dimension");
    const auto count = r.u32("count");
    EmbeddingStore store(std::move(name), dimension);
    const std::uint64_t min_record = 2 + 4ULL * dimension;
    if (static_cast<std::uint64_t>(count) * min_record > r.remaining()) {
        throw Error(ErrorCode::TruncatedFile, "header declares " + std::to_string(count) + " records of dimension " +
                                                  std::to_string(dimension) + " but only " +
                                                  std::to_string(r.remaining()) + " bytes follow");
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto id_len = r.u16("id length");
        bio::Embedding e{r.str(id_len, "id"), std::vector<double>(dimension)};
        for (auto& v : e.vector) v = r.f32("vector");
        store.add(std::move(e));
    }
    if (r.remaining() != 0) {
        throw Error(ErrorCode::TrailingBytes, std::to_string(r.remaining()) + " bytes after the last record");
    }
    return store;
}

EmbeddingStore load_embedding_store(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    try {
        return decode_bemb(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void save_embedding_store(const EmbeddingStore& store, const std::filesystem::path& path) {
    const auto bytes = encode_bemb(store);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace demorph
