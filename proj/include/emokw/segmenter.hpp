#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "utf8.hpp"

namespace emokw {

struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
        return std::hash<std::string_view>{}(s);
    }
};

class Lexicon {
public:
    Lexicon() = default;

    template <typename Range>
    explicit Lexicon(const Range& words) {
        for (const auto& w : words) insert(std::string(w));
    }

    /// Ignores empty words.
    void insert(std::string word) {
        if (word.empty()) return;
        max_len_ = std::max(max_len_, utf8::length(word));
        words_.insert(std::move(word));
    }

    bool contains(std::string_view word) const { return words_.find(word) != words_.end(); }
    std::size_t size() const { return words_.size(); }
    bool empty() const { return words_.empty(); }
    /// Longest word, in codepoints.
    std::size_t max_len() const { return max_len_; }

private:
    std::unordered_set<std::string, StringHash, std::equal_to<>> words_;
    std::size_t max_len_ = 0;
};

/// One word per line, '#' comments, blank lines ignored, surrounding
/// whitespace trimmed. An empty result is legal here; MaxMatch rejects it.
inline Lexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in = detail::open_input(path);
    Lexicon lex;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (!utf8::is_valid(line)) throw DataError(detail::where(path, lineno) + "invalid UTF-8");
        lex.insert(std::string(line));
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
    return lex;
}

/// Greedy forward maximum matching against a lexicon.
class MaxMatch {
public:
    explicit MaxMatch(Lexicon lexicon) : lexicon_(std::move(lexicon)) {
        if (lexicon_.empty()) throw DataError("maximum matching needs a nonempty lexicon");
    }
    const Lexicon& lexicon() const { return lexicon_; }

private:
    Lexicon lexicon_;
};

/// Text already split by an external tool; tokens separated by one codepoint.
struct PreSegmented {
    char32_t separator = U' ';
};

using SegmentationMode = std::variant<MaxMatch, PreSegmented>;

namespace detail {

inline std::vector<std::string> max_match(std::string_view text, const Lexicon& lex) {
    std::vector<std::string> tokens;
    // Byte offsets of the next max_len codepoint boundaries, reused per position.
    std::vector<std::size_t> ends;
    ends.reserve(lex.max_len());
    for (std::size_t pos = 0; pos < text.size();) {
        ends.clear();
        for (std::size_t end = pos; end < text.size() && ends.size() < lex.max_len();) {
            end += utf8::decode(text, end).length;
            ends.push_back(end);
        }
        std::size_t take = ends.front();
        for (auto it = ends.rbegin(); it != ends.rend(); ++it) {
            if (lex.contains(text.substr(pos, *it - pos))) {
                take = *it;
                break;
            }
        }
        tokens.emplace_back(text.substr(pos, take - pos));
        pos = take;
    }
    return tokens;
}

inline std::vector<std::string> split_on(std::string_view text, char32_t separator) {
    std::vector<std::string> tokens;
    std::string current;
    for (std::size_t pos = 0; pos < text.size();) {
        const utf8::Decoded d = utf8::decode(text, pos);
        if (d.codepoint == separator) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.append(text.substr(pos, d.length));
        }
        pos += d.length;
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace detail

/// MaxMatch: at each position emit the longest lexicon word starting there,
/// otherwise the single codepoint; tokens always concatenate back to `text`.
/// PreSegmented: split on the separator and drop empty tokens.
inline std::vector<std::string> segment(std::string_view text, const SegmentationMode& mode) {
    if (const auto* mm = std::get_if<MaxMatch>(&mode)) return detail::max_match(text, mm->lexicon());
    return detail::split_on(text, std::get<PreSegmented>(mode).separator);
}

/// Corpus with every sentence's tokens filled in from its text.
inline Corpus segment_corpus(const Corpus& corpus, const SegmentationMode& mode) {
    std::vector<Sentence> out = corpus.sentences();
    for (Sentence& s : out) s.tokens = segment(s.text, mode);
    return Corpus(std::move(out));
}

}  // namespace emokw
