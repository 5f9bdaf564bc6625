#include <gtest/gtest.h>

#include <string>

#include "emokw/corpus.hpp"
#include "emokw/hash.hpp"
#include "emokw/utf8.hpp"
#include "support/tmpdir.hpp"

using namespace emokw;

namespace {

std::string random_text(Rng& rng, std::size_t len) {
    static const std::u32string alphabet = U"ab★c☆d 好贵。！\x01�~x";
    std::string s;
    for (std::size_t i = 0; i < len; ++i) utf8::append(s, alphabet[rng.below(alphabet.size())]);
    return s;
}

}  // namespace

TEST(Utf8, DecodesAndRejectsIllFormedSequences) {
    EXPECT_TRUE(utf8::is_valid("干净 ok"));
    EXPECT_FALSE(utf8::is_valid("a\xff" "b"));
    EXPECT_FALSE(utf8::is_valid("\xc0\xaf"));          // overlong '/'
    EXPECT_FALSE(utf8::is_valid("\xed\xa0\x80"));      // surrogate
    EXPECT_FALSE(utf8::is_valid("\xe5\xb9"));          // truncated
    EXPECT_EQ(utf8::find_invalid("ab\xff"), 2u);
    EXPECT_EQ(utf8::length("干净a"), 3u);
    EXPECT_EQ(utf8::encode(U'净'), "净");
}

TEST(NoiseFilter, DeletesListedCharacters) {
    NoiseFilter f;
    f.chars = {U'★'};
    EXPECT_EQ(apply_noise_filter("a★b", f), "ab");
    EXPECT_EQ(apply_noise_filter("abc", NoiseFilter{}), "abc");
}

TEST(NoiseFilter, PatternsRunToFixpoint) {
    NoiseFilter f;
    f.patterns = {"ab"};
    EXPECT_EQ(f.apply("aabb"), "");
    f.chars = {U'x'};
    EXPECT_EQ(f.apply("axb"), "");
}

TEST(NoiseFilter, IdempotentAndOrderPreservingOnRandomStrings) {
    NoiseFilter f = default_noise_filter();
    f.patterns = {"ab", "好贵", "c~"};
    Rng rng(123);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::string s = random_text(rng, rng.below(40));
        const std::string once = f.apply(s);
        ASSERT_EQ(f.apply(once), once) << s;
        for (char32_t c : f.chars) ASSERT_EQ(once.find(utf8::encode(c)), std::string::npos);
    }
    // Without patterns the result is exactly the surviving subsequence.
    NoiseFilter chars_only = default_noise_filter();
    for (int trial = 0; trial < 200; ++trial) {
        const std::string s = random_text(rng, 30);
        std::string expect;
        for (std::size_t pos = 0; pos < s.size();) {
            const auto d = utf8::decode(s, pos);
            if (!chars_only.chars.contains(d.codepoint)) expect += s.substr(pos, d.length);
            pos += d.length;
        }
        ASSERT_EQ(chars_only.apply(s), expect);
    }
}

TEST(NoiseFilter, LoadsFileEntries) {
    testutil::TempDir dir;
    const auto p = dir.write("noise.txt", "# comment\nU+2605\nU+0001..U+0003\n☆♥\nstr:[图片]\n\n");
    const NoiseFilter f = load_noise_filter(p);
    EXPECT_TRUE(f.chars.contains(U'★'));
    EXPECT_TRUE(f.chars.contains(U'\x02'));
    EXPECT_TRUE(f.chars.contains(U'☆'));
    EXPECT_TRUE(f.chars.contains(U'♥'));
    ASSERT_EQ(f.patterns.size(), 1u);
    EXPECT_EQ(f.apply("好[图片]★"), "好");
}

TEST(NoiseFilter, ShippedFileMatchesBuiltInDefault) {
    const NoiseFilter shipped = load_noise_filter(EMOKW_DATA_DIR "/noise.txt");
    EXPECT_EQ(shipped.chars, default_noise_filter().chars);
    EXPECT_TRUE(shipped.patterns.empty());
}

TEST(SplitSentences, SplitsOnDelimiters) {
    RawReview r{"r1", "好。贵！", {}, Label::Positive};
    const auto s = split_sentences(r, {U'。', U'！'});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].text, "好");
    EXPECT_EQ(s[1].text, "贵");
    EXPECT_EQ(s[0].id, "r1#0");
    EXPECT_EQ(s[1].id, "r1#1");
    EXPECT_EQ(s[1].review_id, "r1");
    EXPECT_EQ(s[1].label, Label::Positive);
    EXPECT_FALSE(s[0].tokens.has_value());
}

TEST(SplitSentences, NoDelimiterAndAllDelimiters) {
    const auto one = split_sentences({"r", "房间很大", {}, {}}, default_delimiters());
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].text, "房间很大");
    EXPECT_TRUE(split_sentences({"r", "。。", {}, {}}, default_delimiters()).empty());
}

TEST(SplitSentences, NeverLosesNonDelimiterCharacters) {
    Rng rng(9);
    const std::set<char32_t> delims{U'。', U'！'};
    for (int trial = 0; trial < 500; ++trial) {
        RawReview r{"x", random_text(rng, rng.below(30)), {}, {}};
        std::string joined;
        for (const auto& s : split_sentences(r, delims)) {
            ASSERT_FALSE(s.text.empty());
            joined += s.text;
        }
        std::string expect;
        for (std::size_t pos = 0; pos < r.text.size();) {
            const auto d = utf8::decode(r.text, pos);
            if (!delims.contains(d.codepoint)) expect += r.text.substr(pos, d.length);
            pos += d.length;
        }
        ASSERT_EQ(joined, expect);
    }
}

TEST(LoadReviews, JsonlInOrder) {
    testutil::TempDir dir;
    const auto p = dir.write("r.jsonl",
                             R"({"id":"a","text":"x"})" "\n"
                             R"({"id":"b","text":"y","meta":{"score":"5"}})" "\n"
                             R"({"id":"c","text":"","label":"neg"})" "\n");
    const auto r = load_reviews(p, ReviewFormat::Jsonl);
    ASSERT_EQ(r.reviews.size(), 3u);
    EXPECT_EQ(r.reviews[0].id, "a");
    EXPECT_EQ(r.reviews[1].id, "b");
    EXPECT_EQ(r.reviews[2].id, "c");
    EXPECT_EQ(r.reviews[1].meta.at("score"), "5");
    EXPECT_EQ(r.reviews[2].label, Label::Negative);
    EXPECT_EQ(r.reviews[0].label, Label::Unlabeled);
}

TEST(LoadReviews, EmptyFile) {
    testutil::TempDir dir;
    EXPECT_TRUE(load_reviews(dir.write("e.jsonl", ""), ReviewFormat::Jsonl).reviews.empty());
}

TEST(LoadReviews, InvalidUtf8StrictNamesLine) {
    testutil::TempDir dir;
    const auto p = dir.write("bad.jsonl", "{\"id\":\"a\",\"text\":\"ok\"}\n{\"id\":\"b\",\"text\":\"\xff\"}\n");
    try {
        load_reviews(p, ReviewFormat::Jsonl, true);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    }
    const auto lenient = load_reviews(p, ReviewFormat::Jsonl, false);
    EXPECT_EQ(lenient.reviews.size(), 1u);
    ASSERT_EQ(lenient.warnings.size(), 1u);
    EXPECT_NE(lenient.warnings[0].find(":2:"), std::string::npos);
}

TEST(LoadReviews, MalformedRecordsAndLabels) {
    testutil::TempDir dir;
    const auto dup = dir.write("dup.jsonl", R"({"id":"a","text":"x"})" "\n" R"({"id":"a","text":"y"})" "\n");
    EXPECT_THROW(load_reviews(dup, ReviewFormat::Jsonl), DataError);
    const auto nofield = dir.write("nf.jsonl", R"({"id":"a"})" "\n");
    EXPECT_THROW(load_reviews(nofield, ReviewFormat::Jsonl), DataError);
    const auto badlabel = dir.write("bl.jsonl", R"({"id":"a","text":"x","label":"positive"})" "\n");
    EXPECT_THROW(load_reviews(badlabel, ReviewFormat::Jsonl, true), DataError);
    const auto lenient = load_reviews(badlabel, ReviewFormat::Jsonl, false);
    ASSERT_EQ(lenient.reviews.size(), 1u);
    EXPECT_EQ(lenient.reviews[0].label, Label::Unlabeled);
    EXPECT_THROW(load_reviews(dir / "missing.jsonl", ReviewFormat::Jsonl), IoError);
}

TEST(LoadReviews, Tsv) {
    testutil::TempDir dir;
    const auto p = dir.write("r.tsv", "a\t干净。\tpos\r\nb\t贵\nc\t一般\t\n");
    const auto r = load_reviews(p, ReviewFormat::Tsv);
    ASSERT_EQ(r.reviews.size(), 3u);
    EXPECT_EQ(r.reviews[0].text, "干净。");
    EXPECT_EQ(r.reviews[0].label, Label::Positive);
    EXPECT_EQ(r.reviews[1].label, Label::Unlabeled);
    EXPECT_EQ(r.reviews[2].label, Label::Unlabeled);
    const auto bad = dir.write("bad.tsv", "only-one-column\n");
    EXPECT_THROW(load_reviews(bad, ReviewFormat::Tsv), DataError);
}

TEST(Corpus, PartitionsAreDisjointAndComplete) {
    Corpus c({{"1", "r", "a", {}, Label::Positive},
              {"2", "r", "b", {}, Label::Unlabeled},
              {"3", "r", "c", {}, Label::Negative},
              {"4", "r", "d", {}, Label::Positive}});
    EXPECT_EQ(c.positive(), (std::vector<std::size_t>{0, 3}));
    EXPECT_EQ(c.negative(), (std::vector<std::size_t>{2}));
    EXPECT_EQ(c.unlabeled(), (std::vector<std::size_t>{1}));
    EXPECT_EQ(c.labeled(), (std::vector<std::size_t>{0, 2, 3}));
    EXPECT_EQ(c.positive().size() + c.negative().size() + c.unlabeled().size(), c.size());
}

TEST(CorpusFile, RoundTripIsLossless) {
    testutil::TempDir dir;
    const Corpus c({{"r1#0", "r1", "干净", std::vector<std::string>{"干净"}, Label::Positive},
                    {"r1#1", "r1", "贵 \"x\"", std::vector<std::string>{}, Label::Negative},
                    {"r2#0", "r2", "一般", std::nullopt, Label::Unlabeled}});
    const auto p = dir / "c.jsonl";
    save_corpus(c, p);
    EXPECT_EQ(load_corpus(p), c);

    const std::string body = testutil::slurp(p);
    EXPECT_TRUE(body.starts_with("{\"format\":\"sentences\",\"version\":1}\n"));
    EXPECT_NE(body.find(R"("tokens":null,"label":null)"), std::string::npos);
    EXPECT_NE(body.find("干净"), std::string::npos);  // not \u-escaped
}

TEST(CorpusFile, RejectsUnknownVersionAndMissingHeader) {
    testutil::TempDir dir;
    const auto v2 = dir.write("v2.jsonl", "{\"format\":\"sentences\",\"version\":2}\n");
    EXPECT_THROW(load_corpus(v2), FormatError);
    const auto none = dir.write("none.jsonl", R"({"id":"a","review_id":"r","text":"t","tokens":null,"label":null})" "\n");
    EXPECT_THROW(load_corpus(none), FormatError);
    const auto badlabel = dir.write("bl.jsonl", "{\"format\":\"sentences\",\"version\":1}\n"
                                                R"({"id":"a","review_id":"r","text":"t","tokens":null,"label":"x"})" "\n");
    EXPECT_THROW(load_corpus(badlabel), DataError);
}
