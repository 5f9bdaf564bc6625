#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "emokw/hash.hpp"
#include "emokw/segmenter.hpp"
#include "emokw/utf8.hpp"
#include "support/tmpdir.hpp"

using namespace emokw;
using Tokens = std::vector<std::string>;

namespace {

MaxMatch mm(std::initializer_list<const char*> words) {
    return MaxMatch(Lexicon(std::vector<std::string>(words.begin(), words.end())));
}

}  // namespace

TEST(Segment, LongestMatchWins) {
    EXPECT_EQ(segment("abc", mm({"ab", "c"})), (Tokens{"ab", "c"}));
    EXPECT_EQ(segment("abc", mm({"a", "ab", "abc"})), (Tokens{"abc"}));
    EXPECT_EQ(segment("房间很干净", mm({"房间", "干净", "很"})), (Tokens{"房间", "很", "干净"}));
}

TEST(Segment, OutOfVocabularyFallsBackToCodepoints) {
    EXPECT_EQ(segment("abc", mm({"b"})), (Tokens{"a", "b", "c"}));
    EXPECT_EQ(segment("好贵", mm({"x"})), (Tokens{"好", "贵"}));
    EXPECT_TRUE(segment("", mm({"x"})).empty());
}

TEST(Segment, PreSegmentedSplitsAndDropsEmpties) {
    EXPECT_EQ(segment("ab ab", PreSegmented{U' '}), (Tokens{"ab", "ab"}));
    EXPECT_EQ(segment("  ab  c ", PreSegmented{U' '}), (Tokens{"ab", "c"}));
    EXPECT_EQ(segment("干净/大", PreSegmented{U'/'}), (Tokens{"干净", "大"}));
}

TEST(Segment, MaxMatchRejectsEmptyLexicon) {
    EXPECT_THROW(MaxMatch(Lexicon{}), DataError);
}

// Lossless, deterministic, greedy: checked against a brute-force longest match.
TEST(Segment, PropertiesOnRandomInputs) {
    const std::u32string alphabet = U"ab干净大c";
    Rng rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> words;
        const std::size_t nwords = 1 + rng.below(8);
        for (std::size_t w = 0; w < nwords; ++w) {
            std::string word;
            const std::size_t len = 1 + rng.below(4);
            for (std::size_t k = 0; k < len; ++k) utf8::append(word, alphabet[rng.below(alphabet.size())]);
            words.push_back(word);
        }
        const Lexicon lex(words);
        const SegmentationMode mode = MaxMatch(lex);
        std::string text;
        const std::size_t tlen = rng.below(25);
        for (std::size_t k = 0; k < tlen; ++k) utf8::append(text, alphabet[rng.below(alphabet.size())]);

        const Tokens tokens = segment(text, mode);
        std::string joined;
        for (const auto& t : tokens) joined += t;
        ASSERT_EQ(joined, text);
        ASSERT_EQ(segment(text, mode), tokens);

        std::size_t pos = 0;
        for (const auto& t : tokens) {
            // No lexicon word starting here is longer than the emitted token.
            for (const auto& w : words) {
                if (text.compare(pos, w.size(), w) == 0) {
                    ASSERT_LE(w.size(), t.size()) << text;
                }
            }
            if (!lex.contains(t)) {
                ASSERT_EQ(utf8::length(t), 1u);
            }
            pos += t.size();
        }
    }
}

TEST(Lexicon, LoadsWordsDedupesAndSkipsComments) {
    testutil::TempDir dir;
    const Lexicon a = load_lexicon(dir.write("a.txt", "ab\nc\n"));
    EXPECT_EQ(a.size(), 2u);
    EXPECT_EQ(a.max_len(), 2u);
    EXPECT_EQ(load_lexicon(dir.write("d.txt", "ab\nab\n")).size(), 1u);
    const Lexicon cn = load_lexicon(dir.write("cn.txt", "# words\n\n干净\r\n交通\n"));
    EXPECT_EQ(cn.size(), 2u);
    EXPECT_EQ(cn.max_len(), 2u);
    EXPECT_TRUE(cn.contains("干净"));
}

TEST(Lexicon, CommentOnlyFileFailsForMaxMatch) {
    testutil::TempDir dir;
    const Lexicon lex = load_lexicon(dir.write("c.txt", "# nothing\n# here\n"));
    EXPECT_TRUE(lex.empty());
    EXPECT_THROW(MaxMatch{lex}, DataError);
    EXPECT_THROW(load_lexicon(dir / "missing.txt"), IoError);
}
