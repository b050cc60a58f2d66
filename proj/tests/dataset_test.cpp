#include <bit>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "demorph/dataset.hpp"
#include "demorph/error.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using demorph::EmbeddingStore;
using demorph::MorphRecord;
using demorph::Scenario;
namespace fs = std::filesystem;

namespace {

// Hand-assembled BEMB bytes, independent of the library encoder.
struct BembWriter {
    std::vector<std::uint8_t> bytes;
    void u16(std::uint16_t v) {
        bytes.push_back(v & 0xFF);
        bytes.push_back(v >> 8);
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back((v >> (8 * i)) & 0xFF);
    }
    void str16(const std::string& s) {
        u16(static_cast<std::uint16_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
    void f32(float f) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        u32(bits);
    }
    void header(const std::string& name, std::uint32_t dim, std::uint32_t count, std::uint16_t version = 1) {
        bytes.insert(bytes.end(), {'B', 'E', 'M', 'B'});
        u16(version);
        str16(name);
        u32(dim);
        u32(count);
    }
    void record(const std::string& id, const std::vector<float>& v) {
        str16(id);
        for (float f : v) f32(f);
    }
};

std::string line(const std::string& id, const std::string& a = "A", const std::string& b = "B",
                 const std::string& skip = "") {
    std::string s = "{";
    auto add = [&](const std::string& k, const std::string& v) {
        if (k == skip) return;
        if (s.size() > 1) s += ", ";
        s += "\"" + k + "\": \"" + v + "\"";
    };
    add("morph_id", id);
    add("morph_path", "morphs/" + id + ".png");
    add("gt1_id", a);
    add("gt2_id", b);
    add("gt1_path", "faces/" + a + ".png");
    add("gt2_path", "faces/" + b + ".png");
    add("out1_path", "out/" + id + "_o1.png");
    add("out2_path", "out/" + id + "_o2.png");
    return s + "}";
}

}  // namespace

TEST(Manifest, ParsesRecordsAndResolvesPaths) {
    const auto records = demorph::parse_manifest_text(line("m1") + "\n\n" + line("m2", "B", "C") + "\n", "/data/set");
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].morph_id, "m1");
    EXPECT_EQ(records[0].gt1_path, fs::path("/data/set/faces/A.png"));
    EXPECT_EQ(records[1].gt2_id, "C");
    EXPECT_EQ(records[1].out2_path, fs::path("/data/set/out/m2_o2.png"));
    // Absolute paths are kept as written.
    const auto abs = demorph::parse_manifest_text(
        R"({"morph_id":"m","morph_path":"/x/m.png","gt1_id":"a","gt2_id":"b","gt1_path":"/x/a.png",)"
        R"("gt2_path":"/x/b.png","out1_path":"/x/o.png","out2_path":"/x/o.png"})",
        "/elsewhere");
    EXPECT_EQ(abs[0].gt1_path, fs::path("/x/a.png"));
}

TEST(Manifest, Errors) {
    EXPECT_DEMORPH_ERROR(demorph::parse_manifest_text(line("m1", "A", "B", "gt2_path"), "/d"), MissingField);
    EXPECT_DEMORPH_ERROR(demorph::parse_manifest_text(line("m1", "A", "A"), "/d"), InvalidRecord);
    EXPECT_DEMORPH_ERROR(demorph::parse_manifest_text(line("m1") + "\n" + line("m1", "C", "D"), "/d"),
                         DuplicateMorphId);
    EXPECT_DEMORPH_ERROR(demorph::parse_manifest_text("{not json", "/d"), MalformedLine);
    EXPECT_DEMORPH_ERROR(demorph::parse_manifest_text("[1, 2]", "/d"), MalformedLine);
    auto extra = line("m1");
    extra.insert(1, "\"note\": \"x\", ");
    EXPECT_DEMORPH_ERROR(demorph::parse_manifest_text(extra, "/d"), MalformedLine);
    auto numeric = line("m1");
    numeric.replace(numeric.find("\"A\""), 3, "7");
    EXPECT_DEMORPH_ERROR(demorph::parse_manifest_text(numeric, "/d"), MalformedLine);
    testutil::TempDir dir;
    EXPECT_DEMORPH_ERROR(demorph::parse_manifest(dir / "none.jsonl"), FileNotFound);
}

TEST(Manifest, ErrorNamesTheLine) {
    try {
        demorph::parse_manifest_text(line("m1") + "\n" + line("m2") + "\n{oops", "/d");
        FAIL() << "expected MalformedLine";
    } catch (const demorph::Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Manifest, RecordValidation) {
    MorphRecord r{"m", "/m.png", "a", "b", "/a.png", "/b.png", "/o.png", "/o.png"};
    EXPECT_NO_THROW(demorph::validate_record(r));
    auto clash = r;
    clash.out1_path = "/a.png";
    EXPECT_DEMORPH_ERROR(demorph::validate_record(clash), InvalidRecord);
    auto morph_as_gt = r;
    morph_as_gt.gt2_path = "/m.png";
    EXPECT_DEMORPH_ERROR(demorph::validate_record(morph_as_gt), InvalidRecord);
}

TEST(Manifest, WriteParseRoundTripIsOrderPreservingAndIdempotent) {
    testutil::TempDir dir;
    const auto first = demorph::parse_manifest_text(line("z") + "\n" + line("a", "C", "D") + "\n" + line("m"),
                                                    dir.path());
    demorph::write_manifest(first, dir / "manifest.jsonl");
    const auto second = demorph::parse_manifest(dir / "manifest.jsonl");
    EXPECT_EQ(second, first);
    const auto text = testutil::read_text(dir / "manifest.jsonl");
    EXPECT_NE(text.find("\"faces/A.png\""), std::string::npos) << text;
    demorph::write_manifest(second, dir / "again.jsonl");
    EXPECT_EQ(testutil::read_text(dir / "again.jsonl"), text);
}

TEST(Gallery, Examples) {
    const MorphRecord ab{"m1", "/m1", "A", "B", "/A", "/B", "/o1", "/o2"};
    const MorphRecord bc{"m2", "/m2", "B", "C", "/B", "/C", "/o3", "/o4"};
    EXPECT_EQ(demorph::gallery_ids(std::vector{ab}), (std::set<std::string>{"A", "B"}));
    EXPECT_EQ(demorph::gallery_ids(std::vector{ab, bc}), (std::set<std::string>{"A", "B", "C"}));
    EXPECT_DEMORPH_ERROR(demorph::gallery_ids(std::vector<MorphRecord>{}), EmptyRecordSet);
    EXPECT_EQ(demorph::output_embedding_id("/x/y/m001_o1.png"), "m001_o1");
}

TEST(Store, AddAndLookup) {
    EmbeddingStore s("toy", 4);
    s.add({"a", {1, 0, 0, 0}});
    s.add({"b", {0, 1, 0, 0}});
    s.add({"c", {0, 0, 1, 1}});
    EXPECT_EQ(s.size(), 3u);
    EXPECT_EQ(s.require("c").vector[3], 1.0);
    EXPECT_EQ(s.find("zz"), nullptr);
    EXPECT_DEMORPH_ERROR(s.require("zz"), MissingEmbedding);
    EXPECT_DEMORPH_ERROR(s.add({"d", {1, 2, 3}}), DimensionMismatch);
    EXPECT_DEMORPH_ERROR(s.add({"d", {0, 0, 0, 0}}), ZeroVector);
    EXPECT_DEMORPH_ERROR(s.add({"a", {1, 1, 1, 1}}), DuplicateId);
    EXPECT_DEMORPH_ERROR(EmbeddingStore("toy", 0), DimensionMismatch);
    EXPECT_EQ(s.entries()[1].id, "b");
}

TEST(Bemb, EncoderMatchesHandAssembledBytes) {
    EmbeddingStore s("arc+l2", 2);
    s.add({"i1", {0.5, -0.25}});
    s.add({"img_2", {1.0, 3.0}});
    BembWriter w;
    w.header("arc+l2", 2, 2);
    w.record("i1", {0.5f, -0.25f});
    w.record("img_2", {1.0f, 3.0f});
    EXPECT_EQ(demorph::encode_bemb(s), w.bytes);
}

TEST(Bemb, DecodesThreeRecords) {
    BembWriter w;
    w.header("m", 4, 3);
    w.record("x", {1, 2, 3, 4});
    w.record("y", {0, 0, 0, 1});
    w.record("z", {-1, 0.5f, 0, 0});
    const auto s = demorph::decode_bemb(w.bytes);
    EXPECT_EQ(s.matcher_name(), "m");
    EXPECT_EQ(s.dimension(), 4u);
    EXPECT_EQ(s.size(), 3u);
    EXPECT_EQ(s.require("y").vector, (std::vector<double>{0, 0, 0, 1}));
    EXPECT_EQ(s.require("z").vector, (std::vector<double>{-1, 0.5, 0, 0}));
}

TEST(Bemb, RoundTripIsBitExact) {
    std::mt19937_64 rng(1);
    testutil::TempDir dir;
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint32_t dim = 1 + rng() % 128;
        BembWriter w;
        const std::uint32_t count = rng() % 30;
        w.header("matcher-" + std::to_string(trial), dim, count);
        for (std::uint32_t i = 0; i < count; ++i) {
            std::vector<float> v(dim);
            for (auto& f : v) f = std::bit_cast<float>(static_cast<std::uint32_t>(rng() & 0xBF7FFFFF) | 0x3F000000u);
            w.record("id" + std::to_string(i), v);
        }
        demorph::save_embedding_store(demorph::decode_bemb(w.bytes), dir / "s.bemb");
        EXPECT_EQ(testutil::read_bytes(dir / "s.bemb"), w.bytes) << trial;
        const auto loaded = demorph::load_embedding_store(dir / "s.bemb");
        EXPECT_EQ(demorph::encode_bemb(loaded), w.bytes);
    }
}

TEST(Bemb, Errors) {
    BembWriter good;
    good.header("m", 2, 2);
    good.record("a", {1, 0});
    good.record("b", {0, 1});

    auto bad_magic = good.bytes;
    bad_magic[0] = 'X';
    EXPECT_DEMORPH_ERROR(demorph::decode_bemb(bad_magic), BadMagic);
    EXPECT_DEMORPH_ERROR(demorph::decode_bemb(std::vector<std::uint8_t>{'B', 'E'}), BadMagic);

    auto version = good.bytes;
    version[4] = 2;
    EXPECT_DEMORPH_ERROR(demorph::decode_bemb(version), UnsupportedVersion);

    BembWriter short_count;
    short_count.header("m", 2, 5);
    for (int i = 0; i < 4; ++i) short_count.record("r" + std::to_string(i), {1, 1});
    EXPECT_DEMORPH_ERROR(demorph::decode_bemb(short_count.bytes), TruncatedFile);

    for (std::size_t cut = 1; cut < good.bytes.size(); ++cut) {
        std::vector<std::uint8_t> prefix(good.bytes.begin(), good.bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        const auto code = testutil::thrown_code([&] { demorph::decode_bemb(prefix); });
        EXPECT_TRUE(code == "TruncatedFile" || code == "BadMagic") << cut << " " << code;
    }

    auto trailing = good.bytes;
    trailing.push_back(0);
    EXPECT_DEMORPH_ERROR(demorph::decode_bemb(trailing), TrailingBytes);

    BembWriter dup;
    dup.header("m", 1, 2);
    dup.record("a", {1});
    dup.record("a", {2});
    EXPECT_DEMORPH_ERROR(demorph::decode_bemb(dup.bytes), DuplicateId);

    BembWriter zero_dim;
    zero_dim.header("m", 0, 0);
    EXPECT_DEMORPH_ERROR(demorph::decode_bemb(zero_dim.bytes), DimensionMismatch);

    BembWriter huge;
    huge.header("m", 0x40000000, 0xFFFFFFFF);
    EXPECT_DEMORPH_ERROR(demorph::decode_bemb(huge.bytes), TruncatedFile);

    testutil::TempDir dir;
    EXPECT_DEMORPH_ERROR(demorph::load_embedding_store(dir / "missing.bemb"), FileNotFound);
}

TEST(Scenario, Examples) {
    using S = demorph::ScenarioSplit;
    EXPECT_EQ(demorph::classify_scenario(S{{"A", "B", "C"}, {"A", "B"}}), Scenario::One);
    EXPECT_EQ(demorph::classify_scenario(S{{"A", "B"}, {"B", "C"}}), Scenario::Two);
    EXPECT_EQ(demorph::classify_scenario(S{{"A", "B"}, {"C", "D"}}), Scenario::Three);
    EXPECT_DEMORPH_ERROR(demorph::classify_scenario(S{{}, {"A"}}), EmptySet);
    EXPECT_DEMORPH_ERROR(demorph::classify_scenario(S{{"A"}, {}}), EmptySet);
    EXPECT_EQ(demorph::to_string(Scenario::Two), "scenario2");
}

TEST(Scenario, ExhaustiveOverThreeElementUniverse) {
    const std::vector<std::string> universe{"A", "B", "C"};
    auto subset = [&](int mask) {
        std::set<std::string> s;
        for (int i = 0; i < 3; ++i) {
            if (mask & (1 << i)) s.insert(universe[i]);
        }
        return s;
    };
    int cases = 0;
    for (int train = 1; train < 8; ++train) {
        for (int test = 1; test < 8; ++test) {
            const auto tr = subset(train);
            const auto te = subset(test);
            const auto expected = oracle::set_relation(tr, te);
            const auto got = demorph::classify_scenario({tr, te});
            const Scenario want = expected == oracle::Relation::Subset    ? Scenario::One
                                  : expected == oracle::Relation::Overlap ? Scenario::Two
                                                                          : Scenario::Three;
            EXPECT_EQ(got, want) << "train " << train << " test " << test;
            ++cases;
        }
    }
    EXPECT_EQ(cases, 49);
}

TEST(Scenario, ReadIdList) {
    testutil::TempDir dir;
    testutil::write_text(dir / "ids.txt", "# identities\n  alice \n\nbob\r\nalice\n");
    EXPECT_EQ(demorph::read_id_list(dir / "ids.txt"), (std::set<std::string>{"alice", "bob"}));
    EXPECT_DEMORPH_ERROR(demorph::read_id_list(dir / "none.txt"), FileNotFound);
}
