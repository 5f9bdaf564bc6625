#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "text_io.hpp"

namespace emokw {

enum class Polarity { Positive, Negative, Combined };

inline std::string_view polarity_name(Polarity p) {
    switch (p) {
        case Polarity::Positive: return "pos";
        case Polarity::Negative: return "neg";
        case Polarity::Combined: break;
    }
    return "combined";
}

/// What counts as one "document" for the occurrence distribution.
enum class EntropyUnit { Sentence, Review };

// ---------------------------------------------------------------------------
// Term statistics

struct TermOccurrences {
    std::uint64_t tf = 0;
    /// Count in each document that contains the term, in corpus order.
    std::vector<std::uint32_t> counts;

    std::size_t df() const { return counts.size(); }

    bool operator==(const TermOccurrences&) const = default;
};

struct ClassStats {
    std::size_t documents = 0;
    std::uint64_t tokens = 0;
    std::map<std::string, TermOccurrences, std::less<>> terms;

    const TermOccurrences* find(std::string_view term) const {
        const auto it = terms.find(term);
        return it == terms.end() ? nullptr : &it->second;
    }

    /// Appends `later`, which must cover documents after this one's.
    /// Chunked construction followed by in-order merges reproduces the
    /// sequential result exactly, occurrence order included.
    void merge(const ClassStats& later) {
        documents += later.documents;
        tokens += later.tokens;
        for (const auto& [term, occ] : later.terms) {
            TermOccurrences& mine = terms[term];
            mine.tf += occ.tf;
            mine.counts.insert(mine.counts.end(), occ.counts.begin(), occ.counts.end());
        }
    }

    bool operator==(const ClassStats&) const = default;
};

struct ClassTermStats {
    ClassStats positive;
    ClassStats negative;
    EntropyUnit unit = EntropyUnit::Sentence;

    const ClassStats& of(Label l) const {
        if (l == Label::Unlabeled) throw std::invalid_argument("no statistics for unlabeled");
        return l == Label::Positive ? positive : negative;
    }

    void merge(const ClassTermStats& later) {
        positive.merge(later.positive);
        negative.merge(later.negative);
    }

    bool operator==(const ClassTermStats&) const = default;
};

namespace detail {

inline void add_document(ClassStats& cls, const std::vector<const std::vector<std::string>*>& parts) {
    std::unordered_map<std::string_view, std::uint32_t> counts;
    for (const auto* tokens : parts) {
        for (const std::string& t : *tokens) ++counts[t];
        cls.tokens += tokens->size();
    }
    ++cls.documents;
    // Sorted so that per-term occurrence order never depends on hash order.
    std::vector<std::pair<std::string_view, std::uint32_t>> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [term, n] : sorted) {
        auto it = cls.terms.find(term);
        if (it == cls.terms.end()) it = cls.terms.emplace(std::string(term), TermOccurrences{}).first;
        it->second.tf += n;
        it->second.counts.push_back(n);
    }
}

}  // namespace detail

/// Statistics over the labeled sentences among `subset` (indices into the
/// corpus, in order). Unlabeled sentences are ignored. Throws DataError when a
/// labeled sentence is untokenized or either class ends up empty.
inline ClassTermStats build_term_stats(const Corpus& corpus, std::span<const std::size_t> subset,
                                       EntropyUnit unit = EntropyUnit::Sentence) {
    ClassTermStats stats;
    stats.unit = unit;
    const auto check = [&](const Sentence& s) {
        if (!s.tokens) throw DataError("sentence " + s.id + " is not segmented");
    };

    if (unit == EntropyUnit::Sentence) {
        for (std::size_t i : subset) {
            const Sentence& s = corpus[i];
            if (s.label == Label::Unlabeled) continue;
            check(s);
            detail::add_document(s.label == Label::Positive ? stats.positive : stats.negative,
                                 {&*s.tokens});
        }
    } else {
        // One document per (review_id, label), ordered by first appearance.
        std::vector<std::pair<Label, std::vector<const std::vector<std::string>*>>> docs;
        std::map<std::pair<std::string, Label>, std::size_t> slot;
        for (std::size_t i : subset) {
            const Sentence& s = corpus[i];
            if (s.label == Label::Unlabeled) continue;
            check(s);
            const auto [it, fresh] = slot.try_emplace({s.review_id, s.label}, docs.size());
            if (fresh) docs.push_back({s.label, {}});
            docs[it->second].second.push_back(&*s.tokens);
        }
        for (const auto& [label, parts] : docs) {
            detail::add_document(label == Label::Positive ? stats.positive : stats.negative, parts);
        }
    }

    if (stats.positive.documents == 0) throw DataError("no positive labeled sentences");
    if (stats.negative.documents == 0) throw DataError("no negative labeled sentences");
    return stats;
}

inline ClassTermStats build_term_stats(const Corpus& corpus,
                                       EntropyUnit unit = EntropyUnit::Sentence) {
    std::vector<std::size_t> all(corpus.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return build_term_stats(corpus, all, unit);
}

// ---------------------------------------------------------------------------
// Entropy

/// Shannon entropy in bits of the distribution p_d = n_d / sum(n) over the
/// documents with n_d > 0. A term seen in a single document has entropy 0.
/// The result is clamped to [0, log2(#nonzero)], the exact mathematical
/// range, so rounding never pushes a uniform distribution past log2(df).
inline double entropy_of(std::span<const std::uint32_t> counts) {
    std::uint64_t total = 0;
    std::size_t nonzero = 0;
    for (std::uint32_t n : counts) {
        total += n;
        nonzero += n > 0;
    }
    if (total == 0) throw std::invalid_argument("entropy_of: all-zero occurrence vector");
    if (nonzero == 1) return 0.0;
    const double t = static_cast<double>(total);
    double h = 0.0;
    for (std::uint32_t n : counts) {
        if (n == 0) continue;
        const double p = n / t;
        h -= p * std::log2(p);
    }
    return std::clamp(h, 0.0, std::log2(static_cast<double>(nonzero)));
}

struct EntropyRow {
    std::string term;
    double h_pos = 0.0;
    double h_neg = 0.0;
    std::uint64_t tf_pos = 0;
    std::uint64_t tf_neg = 0;
    std::size_t df_pos = 0;
    std::size_t df_neg = 0;

    bool operator==(const EntropyRow&) const = default;
};

/// Per-term entropies for both classes, rows sorted by term.
class EntropyTable {
public:
    EntropyTable() = default;
    explicit EntropyTable(std::vector<EntropyRow> rows) : rows_(std::move(rows)) {
        std::sort(rows_.begin(), rows_.end(),
                  [](const EntropyRow& a, const EntropyRow& b) { return a.term < b.term; });
    }

    const std::vector<EntropyRow>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }

    const EntropyRow* find(std::string_view term) const {
        const auto it = std::lower_bound(
            rows_.begin(), rows_.end(), term,
            [](const EntropyRow& r, std::string_view t) { return r.term < t; });
        return it != rows_.end() && it->term == term ? &*it : nullptr;
    }

private:
    std::vector<EntropyRow> rows_;
};

/// `normalize` divides each class's entropies by log2 of its document count
/// (0 when the class has a single document). Off by default.
inline EntropyTable build_entropy_table(const ClassTermStats& stats, bool normalize = false) {
    std::map<std::string_view, EntropyRow> rows;
    const auto scale = [&](const ClassStats& cls) {
        if (!normalize) return 1.0;
        return cls.documents > 1 ? 1.0 / std::log2(static_cast<double>(cls.documents)) : 0.0;
    };
    const double sp = scale(stats.positive);
    const double sn = scale(stats.negative);
    for (const auto& [term, occ] : stats.positive.terms) {
        EntropyRow& r = rows[term];
        r.h_pos = entropy_of(occ.counts) * sp;
        r.tf_pos = occ.tf;
        r.df_pos = occ.df();
    }
    for (const auto& [term, occ] : stats.negative.terms) {
        EntropyRow& r = rows[term];
        r.h_neg = entropy_of(occ.counts) * sn;
        r.tf_neg = occ.tf;
        r.df_neg = occ.df();
    }
    std::vector<EntropyRow> out;
    out.reserve(rows.size());
    for (auto& [term, row] : rows) {
        row.term = std::string(term);
        out.push_back(std::move(row));
    }
    return EntropyTable(std::move(out));
}

/// TSV: term, H_pos, H_neg, tf_pos, tf_neg, df_pos, df_neg (6-decimal reals).
inline std::string render_entropy_table(const EntropyTable& table) {
    std::string out = "term\tH_pos\tH_neg\ttf_pos\ttf_neg\tdf_pos\tdf_neg\n";
    for (const EntropyRow& r : table.rows()) {
        out += text::escape(r.term);
        out += '\t' + text::fixed(r.h_pos, 6) + '\t' + text::fixed(r.h_neg, 6);
        out += '\t' + std::to_string(r.tf_pos) + '\t' + std::to_string(r.tf_neg);
        out += '\t' + std::to_string(r.df_pos) + '\t' + std::to_string(r.df_neg) + '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Keyword lists

/// Comparison coefficients, ascending.
struct AlphaGrid {
    std::vector<double> values;

    /// 1.5, 1.75, ..., 3.75.
    static AlphaGrid standard() {
        AlphaGrid g;
        for (int i = 0; i < 10; ++i) g.values.push_back(1.5 + 0.25 * i);
        return g;
    }

    /// "2.75", "1.5,2,3" or "lo:hi:step" (inclusive of hi).
    static AlphaGrid parse(std::string_view spec) {
        AlphaGrid g;
        const auto number = [&](std::string_view s) {
            const auto v = text::parse_double(detail::trim(s));
            if (!v) throw std::invalid_argument("bad alpha value \"" + std::string(s) + "\"");
            return *v;
        };
        if (spec.find(':') != std::string_view::npos) {
            const auto c1 = spec.find(':');
            const auto c2 = spec.find(':', c1 + 1);
            if (c2 == std::string_view::npos) throw std::invalid_argument("alpha range needs lo:hi:step");
            const double lo = number(spec.substr(0, c1));
            const double hi = number(spec.substr(c1 + 1, c2 - c1 - 1));
            const double step = number(spec.substr(c2 + 1));
            if (!(step > 0) || hi < lo) throw std::invalid_argument("empty alpha range");
            const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
            for (long i = 0; i <= n; ++i) g.values.push_back(lo + step * static_cast<double>(i));
        } else {
            std::size_t start = 0;
            while (start <= spec.size()) {
                const auto comma = spec.find(',', start);
                const auto piece = spec.substr(start, comma == std::string_view::npos
                                                          ? std::string_view::npos
                                                          : comma - start);
                g.values.push_back(number(piece));
                if (comma == std::string_view::npos) break;
                start = comma + 1;
            }
        }
        std::sort(g.values.begin(), g.values.end());
        g.values.erase(std::unique(g.values.begin(), g.values.end()), g.values.end());
        return g;
    }
};

struct KeywordList {
    Polarity polarity = Polarity::Positive;
    /// Absent for Combined lists.
    std::optional<double> alpha;
    int min_df = 2;
    /// Identifier used in file names, reports and tie-breaking.
    std::string name;
    std::vector<std::string> words;

    bool operator==(const KeywordList&) const = default;
};

inline std::string alpha_label(double alpha) {
    const std::string two = text::fixed(alpha, 2);
    return text::parse_double(two) == alpha ? two : text::shortest(alpha);
}

inline std::string default_list_name(Polarity p, double alpha) {
    return std::string(polarity_name(p)) + "_a" + alpha_label(alpha);
}

/// Positive: { w : H_P(w) > 0, df_P(w) >= min_df, H_P(w) >= alpha * H_N(w) };
/// Negative symmetric. H_opp = 0 satisfies the ratio whenever H_fav > 0.
/// Words are ordered by descending favored-class entropy, then by term.
inline KeywordList extract_keywords(const EntropyTable& table, Polarity polarity, double alpha,
                                    int min_df = 2) {
    if (polarity == Polarity::Combined) {
        throw std::invalid_argument("extract_keywords: polarity must be pos or neg");
    }
    if (!(alpha > 1.0)) throw std::invalid_argument("extract_keywords: alpha must exceed 1");
    if (min_df < 1) throw std::invalid_argument("extract_keywords: min_df must be >= 1");

    const bool pos = polarity == Polarity::Positive;
    std::vector<const EntropyRow*> picked;
    for (const EntropyRow& r : table.rows()) {
        const double fav = pos ? r.h_pos : r.h_neg;
        const double opp = pos ? r.h_neg : r.h_pos;
        const std::size_t df = pos ? r.df_pos : r.df_neg;
        if (fav > 0.0 && df >= static_cast<std::size_t>(min_df) && fav >= alpha * opp) {
            picked.push_back(&r);
        }
    }
    std::stable_sort(picked.begin(), picked.end(), [&](const EntropyRow* a, const EntropyRow* b) {
        return (pos ? a->h_pos : a->h_neg) > (pos ? b->h_pos : b->h_neg);
    });

    KeywordList list;
    list.polarity = polarity;
    list.alpha = alpha;
    list.min_df = min_df;
    list.name = default_list_name(polarity, alpha);
    list.words.reserve(picked.size());
    for (const EntropyRow* r : picked) list.words.push_back(r->term);
    return list;
}

/// 2 * |grid| lists: Positive for ascending alpha, then Negative likewise.
inline std::vector<KeywordList> generate_grid_lists(const EntropyTable& table, const AlphaGrid& grid,
                                                    int min_df = 2) {
    if (grid.values.empty()) throw std::invalid_argument("generate_grid_lists: empty grid");
    std::vector<double> alphas = grid.values;
    std::sort(alphas.begin(), alphas.end());
    std::vector<KeywordList> lists;
    lists.reserve(2 * alphas.size());
    for (Polarity p : {Polarity::Positive, Polarity::Negative}) {
        for (double a : alphas) lists.push_back(extract_keywords(table, p, a, min_df));
    }
    return lists;
}

/// Union of a Positive and a Negative list: `a`'s words in order, then the
/// words of `b` not already present.
inline KeywordList merge_lists(const KeywordList& a, const KeywordList& b) {
    if (a.polarity != Polarity::Positive || b.polarity != Polarity::Negative) {
        throw std::invalid_argument("merge_lists: expected a positive and a negative list");
    }
    KeywordList out;
    out.polarity = Polarity::Combined;
    out.min_df = std::min(a.min_df, b.min_df);
    out.name = "comb_" + a.name + "+" + b.name;
    std::set<std::string_view> seen;
    for (const auto* src : {&a, &b}) {
        for (const std::string& w : src->words) {
            if (seen.insert(w).second) out.words.push_back(w);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Keyword list files
//
//   # polarity=pos|neg|combined
//   # alpha=2.75          (omitted for combined)
//   # min_df=2
//   # name=pos_a2.75
//   word
//   ...
//
// Words are backslash-escaped; a leading '#' in a word is written "\#".

inline std::string render_keyword_list(const KeywordList& list) {
    std::string out = "# polarity=" + std::string(polarity_name(list.polarity)) + '\n';
    if (list.alpha) out += "# alpha=" + text::shortest(*list.alpha) + '\n';
    out += "# min_df=" + std::to_string(list.min_df) + '\n';
    out += "# name=" + list.name + '\n';
    for (const std::string& w : list.words) {
        std::string e = text::escape(w);
        if (!e.empty() && e.front() == '#') e.insert(0, "\\");
        out += e + '\n';
    }
    return out;
}

inline void save_keyword_list(const KeywordList& list, const std::filesystem::path& path) {
    std::ofstream out = detail::open_output(path);
    out << render_keyword_list(list);
    if (!out.flush()) throw IoError("write failure on " + path.string());
}

inline KeywordList load_keyword_list(const std::filesystem::path& path) {
    std::ifstream in = detail::open_input(path);
    KeywordList list;
    bool have_polarity = false;
    bool in_header = true;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (in_header && line.starts_with("# ")) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(2, eq - 2);
            const std::string value = line.substr(eq + 1);
            if (key == "polarity") {
                if (value == "pos") list.polarity = Polarity::Positive;
                else if (value == "neg") list.polarity = Polarity::Negative;
                else if (value == "combined") list.polarity = Polarity::Combined;
                else throw DataError(detail::where(path, lineno) + "unknown polarity " + value);
                have_polarity = true;
            } else if (key == "alpha") {
                list.alpha = text::parse_double(value);
                if (!list.alpha) throw DataError(detail::where(path, lineno) + "bad alpha " + value);
            } else if (key == "min_df") {
                const auto v = text::parse_int<int>(value);
                if (!v) throw DataError(detail::where(path, lineno) + "bad min_df " + value);
                list.min_df = *v;
            } else if (key == "name") {
                list.name = value;
            }
            continue;
        }
        in_header = false;
        if (line.empty()) continue;
        list.words.push_back(text::unescape(line));
    }
    if (!have_polarity) throw FormatError(path.string() + ": missing \"# polarity=\" header");
    if (list.name.empty()) list.name = path.stem().string();
    std::set<std::string_view> seen;
    for (const std::string& w : list.words) {
        if (!seen.insert(w).second) throw DataError(path.string() + ": duplicate word " + w);
    }
    return list;
}

}  // namespace emokw
