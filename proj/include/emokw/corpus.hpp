#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "utf8.hpp"

namespace emokw {

enum class Label { Positive, Negative, Unlabeled };

/// "pos" / "neg" as used in every corpus file.
inline std::optional<Label> parse_label(std::string_view s) {
    if (s == "pos") return Label::Positive;
    if (s == "neg") return Label::Negative;
    return std::nullopt;
}

inline std::string_view label_name(Label l) {
    switch (l) {
        case Label::Positive: return "pos";
        case Label::Negative: return "neg";
        case Label::Unlabeled: break;
    }
    return "";
}

struct RawReview {
    std::string id;
    std::string text;
    std::map<std::string, std::string> meta;
    /// Review-level label, inherited by every sentence split from the review.
    Label label = Label::Unlabeled;

    bool operator==(const RawReview&) const = default;
};

struct Sentence {
    std::string id;
    std::string review_id;
    std::string text;
    /// nullopt until segmented.
    std::optional<std::vector<std::string>> tokens;
    Label label = Label::Unlabeled;

    bool operator==(const Sentence&) const = default;
};

// ---------------------------------------------------------------------------
// Noise filtering

struct NoiseFilter {
    std::set<char32_t> chars;
    /// Literal substrings, deleted after `chars`.
    std::vector<std::string> patterns;

    /// Deletes every char in `chars`, then every occurrence of every pattern
    /// until none remains. Deleting a pattern can splice a new occurrence
    /// together ("aabb" minus "ab"), so pattern removal runs to a fixpoint;
    /// that is what makes the filter idempotent.
    std::string apply(std::string_view text) const {
        std::string out;
        out.reserve(text.size());
        for (std::size_t pos = 0; pos < text.size();) {
            const utf8::Decoded d = utf8::decode(text, pos);
            if (d.codepoint == utf8::kInvalid || !chars.contains(d.codepoint)) {
                out.append(text.substr(pos, d.length));
            }
            pos += d.length;
        }
        bool changed = true;
        while (changed) {
            changed = false;
            for (const std::string& p : patterns) {
                if (p.empty()) continue;
                for (std::size_t at = out.find(p); at != std::string::npos; at = out.find(p, at)) {
                    out.erase(at, p.size());
                    changed = true;
                }
            }
        }
        return out;
    }
};

inline std::string apply_noise_filter(std::string_view text, const NoiseFilter& filter) {
    return filter.apply(text);
}

/// Same content as data/noise.txt: C0 controls except tab and newline, DEL,
/// C1 controls, zero-width characters, U+FFFD and a set of decorative symbols.
inline NoiseFilter default_noise_filter() {
    NoiseFilter f;
    for (char32_t c = 0x00; c <= 0x1F; ++c) {
        if (c != U'\t' && c != U'\n') f.chars.insert(c);
    }
    for (char32_t c = 0x7F; c <= 0x9F; ++c) f.chars.insert(c);
    for (char32_t c : {U'\u200B', U'\u200C', U'\u200D', U'\u2060', U'\uFEFF', U'\uFFFD'}) {
        f.chars.insert(c);
    }
    for (char32_t c : std::u32string_view{U"★☆♥♡❤◆◇■□●○◎▲△▼▽※♪♫→←↑↓☞☜✔✘✿❀～＾"}) {
        f.chars.insert(c);
    }
    return f;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

inline std::optional<char32_t> parse_codepoint(std::string_view s) {
    if (s.size() < 3 || (s[0] != 'U' && s[0] != 'u') || s[1] != '+') return std::nullopt;
    unsigned long v = 0;
    for (char c : s.substr(2)) {
        int digit;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
        else return std::nullopt;
        v = v * 16 + static_cast<unsigned long>(digit);
        if (v > 0x10FFFF) return std::nullopt;
    }
    return static_cast<char32_t>(v);
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path.string());
    return ss.str();
}

inline std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line) + ": ";
}

}  // namespace detail

/// Noise-set file, one entry per line:
///   U+XXXX             a single codepoint
///   U+XXXX..U+YYYY     an inclusive range
///   str:<literal>      a substring pattern
///   anything else      every codepoint on the (trimmed) line
/// Blank lines and lines starting with '#' are ignored.
inline NoiseFilter load_noise_filter(const std::filesystem::path& path) {
    std::ifstream in = detail::open_input(path);
    NoiseFilter f;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.starts_with("str:")) {
            if (raw.size() > 4) f.patterns.push_back(raw.substr(4));
            continue;
        }
        const std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (!utf8::is_valid(line)) throw DataError(detail::where(path, lineno) + "invalid UTF-8");
        if (const auto dots = line.find(".."); dots != std::string_view::npos) {
            const auto lo = detail::parse_codepoint(line.substr(0, dots));
            const auto hi = detail::parse_codepoint(line.substr(dots + 2));
            if (lo && hi) {
                if (*lo > *hi) throw DataError(detail::where(path, lineno) + "empty range");
                for (char32_t c = *lo; c <= *hi; ++c) f.chars.insert(c);
                continue;
            }
        }
        if (const auto cp = detail::parse_codepoint(line)) {
            f.chars.insert(*cp);
            continue;
        }
        for (char32_t c : utf8::codepoint_set(line)) f.chars.insert(c);
    }
    return f;
}

// ---------------------------------------------------------------------------
// Sentence splitting

inline const std::set<char32_t>& default_delimiters() {
    static const std::set<char32_t> d{U'。', U'！', U'？', U'；', U'!', U'?', U';', U'\n'};
    return d;
}

/// Splits on any delimiter codepoint, dropping empty fragments. Sentence ids
/// are "<review_id>#<k>" with k counting emitted sentences from 0.
inline std::vector<Sentence> split_sentences(const RawReview& review,
                                             const std::set<char32_t>& delimiters) {
    std::vector<Sentence> out;
    std::string current;
    const auto flush = [&] {
        if (current.empty()) return;
        Sentence s;
        s.id = review.id + "#" + std::to_string(out.size());
        s.review_id = review.id;
        s.text = std::move(current);
        s.label = review.label;
        out.push_back(std::move(s));
        current.clear();
    };
    const std::string_view text = review.text;
    for (std::size_t pos = 0; pos < text.size();) {
        const utf8::Decoded d = utf8::decode(text, pos);
        if (d.codepoint != utf8::kInvalid && delimiters.contains(d.codepoint)) {
            flush();
        } else {
            current.append(text.substr(pos, d.length));
        }
        pos += d.length;
    }
    flush();
    return out;
}

// ---------------------------------------------------------------------------
// Review ingestion

enum class ReviewFormat { Jsonl, Tsv };

struct ReviewLoad {
    std::vector<RawReview> reviews;
    /// One entry per skipped or coerced record (lenient mode only).
    std::vector<std::string> warnings;
};

/// Reads reviews from JSONL (`id`, `text`, optional `meta` object of strings,
/// optional `label` "pos"|"neg"|null) or TSV (id<TAB>text[<TAB>label]).
/// In strict mode the first malformed record throws DataError naming the
/// line; otherwise it is skipped and reported in `warnings`.
inline ReviewLoad load_reviews(const std::filesystem::path& path, ReviewFormat format,
                               bool strict = true) {
    std::ifstream in = detail::open_input(path);
    ReviewLoad result;
    std::set<std::string, std::less<>> seen;
    std::string line;
    std::size_t lineno = 0;

    const auto reject = [&](const std::string& why) {
        const std::string msg = detail::where(path, lineno) + why;
        if (strict) throw DataError(msg);
        result.warnings.push_back(msg + " (skipped)");
    };
    const auto label_from = [&](std::string_view s, Label& out) {
        if (const auto l = parse_label(s)) {
            out = *l;
            return;
        }
        const std::string msg =
            detail::where(path, lineno) + "unknown label \"" + std::string(s) + "\"";
        if (strict) throw DataError(msg);
        result.warnings.push_back(msg + " (treated as unlabeled)");
        out = Label::Unlabeled;
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        if (const auto bad = utf8::find_invalid(line); bad != std::string::npos) {
            reject("invalid UTF-8 at byte " + std::to_string(bad));
            continue;
        }

        RawReview r;
        if (format == ReviewFormat::Jsonl) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                reject(std::string("malformed JSON: ") + e.what());
                continue;
            }
            if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
                !j.contains("text") || !j["text"].is_string()) {
                reject("record needs string fields \"id\" and \"text\"");
                continue;
            }
            r.id = j["id"].get<std::string>();
            r.text = j["text"].get<std::string>();
            bool ok = true;
            if (const auto m = j.find("meta"); m != j.end() && !m->is_null()) {
                if (!m->is_object()) {
                    ok = false;
                } else {
                    for (const auto& [k, v] : m->items()) {
                        if (!v.is_string()) {
                            ok = false;
                            break;
                        }
                        r.meta.emplace(k, v.get<std::string>());
                    }
                }
            }
            if (!ok) {
                reject("\"meta\" must be an object of strings");
                continue;
            }
            if (const auto l = j.find("label"); l != j.end() && !l->is_null()) {
                if (!l->is_string()) {
                    reject("\"label\" must be a string or null");
                    continue;
                }
                label_from(l->get<std::string>(), r.label);
            }
        } else {
            std::vector<std::string_view> cols;
            std::string_view rest = line;
            for (auto tab = rest.find('\t'); tab != std::string_view::npos; tab = rest.find('\t')) {
                cols.push_back(rest.substr(0, tab));
                rest.remove_prefix(tab + 1);
            }
            cols.push_back(rest);
            if (cols.size() < 2 || cols.size() > 3) {
                reject("expected 2 or 3 tab-separated columns, got " + std::to_string(cols.size()));
                continue;
            }
            r.id = std::string(cols[0]);
            r.text = std::string(cols[1]);
            if (cols.size() == 3 && !cols[2].empty()) label_from(cols[2], r.label);
        }

        if (r.id.empty()) {
            reject("empty id");
            continue;
        }
        if (seen.contains(r.id)) {
            reject("duplicate id \"" + r.id + "\"");
            continue;
        }
        seen.insert(r.id);
        result.reviews.push_back(std::move(r));
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
    return result;
}

// ---------------------------------------------------------------------------
// Corpus

/// Sentences in file order plus label partitions (indices into sentences()).
/// Immutable once constructed.
class Corpus {
public:
    Corpus() = default;

    explicit Corpus(std::vector<Sentence> sentences) : sentences_(std::move(sentences)) {
        for (std::size_t i = 0; i < sentences_.size(); ++i) {
            switch (sentences_[i].label) {
                case Label::Positive: positive_.push_back(i); break;
                case Label::Negative: negative_.push_back(i); break;
                case Label::Unlabeled: unlabeled_.push_back(i); break;
            }
        }
    }

    const std::vector<Sentence>& sentences() const { return sentences_; }
    const Sentence& operator[](std::size_t i) const { return sentences_[i]; }
    std::size_t size() const { return sentences_.size(); }
    bool empty() const { return sentences_.empty(); }

    const std::vector<std::size_t>& positive() const { return positive_; }
    const std::vector<std::size_t>& negative() const { return negative_; }
    const std::vector<std::size_t>& unlabeled() const { return unlabeled_; }

    /// Positive and Negative sentence indices in corpus order.
    std::vector<std::size_t> labeled() const {
        std::vector<std::size_t> out;
        out.reserve(positive_.size() + negative_.size());
        std::merge(positive_.begin(), positive_.end(), negative_.begin(), negative_.end(),
                   std::back_inserter(out));
        return out;
    }

    bool operator==(const Corpus& other) const { return sentences_ == other.sentences_; }

private:
    std::vector<Sentence> sentences_;
    std::vector<std::size_t> positive_;
    std::vector<std::size_t> negative_;
    std::vector<std::size_t> unlabeled_;
};

inline constexpr int kCorpusVersion = 1;

inline std::string sentence_to_json_line(const Sentence& s) {
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["review_id"] = s.review_id;
    j["text"] = s.text;
    if (s.tokens) {
        j["tokens"] = *s.tokens;
    } else {
        j["tokens"] = nullptr;
    }
    if (s.label == Label::Unlabeled) {
        j["label"] = nullptr;
    } else {
        j["label"] = label_name(s.label);
    }
    return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::strict);
}

/// Canonical sentences JSONL. First line {"format":"sentences","version":1}.
inline void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out = detail::open_output(path);
    nlohmann::ordered_json header;
    header["format"] = "sentences";
    header["version"] = kCorpusVersion;
    out << header.dump() << '\n';
    for (const Sentence& s : corpus.sentences()) out << sentence_to_json_line(s) << '\n';
    out.flush();
    if (!out) throw IoError("write failure on " + path.string());
}

inline Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in = detail::open_input(path);
    std::vector<Sentence> sentences;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    const auto fail = [&](const std::string& why) -> DataError {
        return DataError(detail::where(path, lineno) + why);
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw fail(std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) throw fail("expected a JSON object");

        if (!have_header) {
            if (j.value("format", std::string{}) != "sentences" || !j.contains("version")) {
                throw FormatError(detail::where(path, lineno) + "missing sentences header");
            }
            if (!j["version"].is_number_integer() || j["version"].get<int>() != kCorpusVersion) {
                throw FormatError(detail::where(path, lineno) + "unsupported corpus version " +
                                  j["version"].dump());
            }
            have_header = true;
            continue;
        }

        Sentence s;
        for (const char* key : {"id", "review_id", "text"}) {
            if (!j.contains(key) || !j[key].is_string()) {
                throw fail(std::string("field \"") + key + "\" must be a string");
            }
        }
        s.id = j["id"].get<std::string>();
        s.review_id = j["review_id"].get<std::string>();
        s.text = j["text"].get<std::string>();
        if (const auto t = j.find("tokens"); t != j.end() && !t->is_null()) {
            if (!t->is_array()) throw fail("\"tokens\" must be an array or null");
            std::vector<std::string> tokens;
            tokens.reserve(t->size());
            for (const auto& tok : *t) {
                if (!tok.is_string()) throw fail("token must be a string");
                tokens.push_back(tok.get<std::string>());
            }
            s.tokens = std::move(tokens);
        }
        if (const auto l = j.find("label"); l != j.end() && !l->is_null()) {
            const auto parsed = l->is_string() ? parse_label(l->get<std::string>()) : std::nullopt;
            if (!parsed) throw fail("label must be \"pos\", \"neg\" or null");
            s.label = *parsed;
        }
        sentences.push_back(std::move(s));
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
    if (!have_header) throw FormatError(path.string() + ": missing sentences header");
    return Corpus(std::move(sentences));
}

}  // namespace emokw
