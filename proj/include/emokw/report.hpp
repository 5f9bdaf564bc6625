#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "entropy_keywords.hpp"
#include "evaluation.hpp"
#include "linear_svm.hpp"
#include "text_io.hpp"

namespace emokw {

enum class TableFormat { Tsv, Markdown };

// ---------------------------------------------------------------------------
// Frequency

struct FrequencyRow {
    std::string term;
    std::uint64_t tf = 0;
    std::size_t df = 0;

    bool operator==(const FrequencyRow&) const = default;
};

struct FrequencyReport {
    Label label = Label::Positive;
    std::vector<FrequencyRow> rows;
};

/// Most frequent terms of one class: descending tf, then df, then term.
inline FrequencyReport frequency_report(const ClassTermStats& stats, Label label, std::size_t top_n) {
    FrequencyReport r;
    r.label = label;
    for (const auto& [term, occ] : stats.of(label).terms) r.rows.push_back({term, occ.tf, occ.df()});
    const auto before = [](const FrequencyRow& a, const FrequencyRow& b) {
        if (a.tf != b.tf) return a.tf > b.tf;
        if (a.df != b.df) return a.df > b.df;
        return a.term < b.term;
    };
    const std::size_t n = std::min(top_n, r.rows.size());
    std::partial_sort(r.rows.begin(), r.rows.begin() + static_cast<std::ptrdiff_t>(n), r.rows.end(), before);
    r.rows.resize(n);
    return r;
}

// ---------------------------------------------------------------------------
// Glosses

/// word<TAB>gloss per line; '#' comments and blank lines ignored.
class GlossDictionary {
public:
    GlossDictionary() = default;

    /// Malformed lines are skipped; for duplicate words the first entry wins.
    /// Both are recorded in warnings().
    static GlossDictionary load(const std::filesystem::path& path) {
        std::ifstream in = detail::open_input(path);
        GlossDictionary g;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (detail::trim(line).empty() || line.front() == '#') continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos || tab == 0 || !utf8::is_valid(line)) {
                g.warnings_.push_back(detail::where(path, lineno) + "malformed gloss line skipped");
                continue;
            }
            std::string word = line.substr(0, tab);
            std::string gloss = std::string(detail::trim(std::string_view(line).substr(tab + 1)));
            if (!g.entries_.emplace(word, std::move(gloss)).second) {
                g.warnings_.push_back(detail::where(path, lineno) + "duplicate gloss for \"" + word +
                                      "\", keeping the first");
            }
        }
        return g;
    }

    void add(std::string word, std::string gloss) { entries_.emplace(std::move(word), std::move(gloss)); }

    std::optional<std::string> lookup(std::string_view word) const {
        const auto it = entries_.find(word);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return entries_.size(); }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    std::map<std::string, std::string, std::less<>> entries_;
    std::vector<std::string> warnings_;
};

inline std::optional<std::string> gloss_lookup(std::string_view word, const GlossDictionary& glosses) {
    return glosses.lookup(word);
}

// ---------------------------------------------------------------------------
// Weight tables

struct WeightRow {
    std::string word;
    std::optional<std::string> gloss;
    double weight = 0.0;
};

struct WeightTable {
    std::string title;
    std::string list_name;
    std::optional<double> alpha;
    double C = 0.0;
    std::vector<WeightRow> rows;

    std::string caption() const {
        std::string c = "**" + title + "** (list " + list_name;
        if (alpha) c += ", α=" + text::shortest(*alpha);
        c += ", C=" + text::shortest(C) + ")";
        return c;
    }
};

struct WeightTables {
    WeightTable positive;
    WeightTable negative;
};

inline WeightTables weight_tables(const LinearModel& model, std::size_t top_k,
                                  const GlossDictionary* glosses = nullptr) {
    const WeightRanking ranking = weight_report(model, top_k);
    const auto build = [&](std::string title, const std::vector<WeightedWord>& words) {
        WeightTable t;
        t.title = std::move(title);
        t.list_name = model.list.name;
        t.alpha = model.list.alpha;
        t.C = model.config.C;
        for (const WeightedWord& w : words) {
            t.rows.push_back({w.word, glosses ? glosses->lookup(w.word) : std::nullopt, w.weight});
        }
        return t;
    };
    return {build("Positive Emotion Keywords", ranking.positive),
            build("Negative Emotion Keywords", ranking.negative)};
}

// ---------------------------------------------------------------------------
// Rendering. Markdown rounds for reading (3 decimals); TSV keeps full
// precision. Output depends only on the input values.

namespace detail {

inline std::string md_cell(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n' || c == '\r' || c == '\t') out += ' ';
        else out.push_back(c);
    }
    return out;
}

inline std::string md_header(std::initializer_list<std::string_view> cols) {
    std::string head, rule;
    for (std::string_view c : cols) {
        if (!head.empty()) head += " | ", rule += " | ";
        head += c;
        rule += "---";
    }
    return head + '\n' + rule + '\n';
}

}  // namespace detail

inline std::string render_table(const WeightTable& t, TableFormat format) {
    std::string out;
    if (format == TableFormat::Markdown) {
        out += t.caption() + "\n\n";
        out += detail::md_header({"Word", "English", "Weight"});
        for (const WeightRow& r : t.rows) {
            out += detail::md_cell(r.word) + " | " + detail::md_cell(r.gloss.value_or("")) + " | " +
                   text::fixed(r.weight, 3) + '\n';
        }
    } else {
        out += "word\tgloss\tweight\n";
        for (const WeightRow& r : t.rows) {
            out += text::escape(r.word) + '\t' + text::escape(r.gloss.value_or("")) + '\t' +
                   text::full(r.weight) + '\n';
        }
    }
    return out;
}

inline std::string render_table(const FrequencyReport& f, TableFormat format) {
    std::string out;
    if (format == TableFormat::Markdown) {
        out += std::string("**Most frequent terms (") + std::string(label_name(f.label)) + ")**\n\n";
        out += detail::md_header({"Term", "tf", "df"});
        for (const FrequencyRow& r : f.rows) {
            out += detail::md_cell(r.term) + " | " + std::to_string(r.tf) + " | " +
                   std::to_string(r.df) + '\n';
        }
    } else {
        out += "term\ttf\tdf\n";
        for (const FrequencyRow& r : f.rows) {
            out += text::escape(r.term) + '\t' + std::to_string(r.tf) + '\t' + std::to_string(r.df) + '\n';
        }
    }
    return out;
}

/// Markdown: the summary row (list, C, accuracy/F1 mean and std). TSV:
/// one row per fold then "mean" and "std" rows.
inline std::string render_table(const CVReport& r, TableFormat format) {
    std::string out;
    if (format == TableFormat::Markdown) {
        out += detail::md_header({"List", "C", "Accuracy μ", "Accuracy σ", "F1 μ", "F1 σ"});
        out += detail::md_cell(r.list_name) + " | " + text::shortest(r.C) + " | " +
               text::fixed(r.accuracy_mean, 3) + " | " + text::fixed(r.accuracy_std, 3) + " | " +
               text::fixed(r.f1_mean, 3) + " | " + text::fixed(r.f1_std, 3) + '\n';
        return out;
    }
    out += "fold\ttp\tfp\tfn\ttn\tprecision\trecall\tf1\taccuracy\n";
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
        const Metrics& m = r.folds[f];
        out += std::to_string(f) + '\t' + std::to_string(m.tp) + '\t' + std::to_string(m.fp) + '\t' +
               std::to_string(m.fn) + '\t' + std::to_string(m.tn) + '\t' + text::full(m.precision) +
               '\t' + text::full(m.recall) + '\t' + text::full(m.f1) + '\t' + text::full(m.accuracy) +
               '\n';
    }
    out += "mean\t\t\t\t\t\t\t" + text::full(r.f1_mean) + '\t' + text::full(r.accuracy_mean) + '\n';
    out += "std\t\t\t\t\t\t\t" + text::full(r.f1_std) + '\t' + text::full(r.accuracy_std) + '\n';
    return out;
}

inline std::string render_table(const GridSearchReport& g, TableFormat format) {
    std::string out;
    if (format == TableFormat::Markdown) {
        out += detail::md_header({"List", "C", "Accuracy μ", "Accuracy σ", "F1 μ", "F1 σ"});
        for (std::size_t i = 0; i < g.entries.size(); ++i) {
            const CVReport& r = g.entries[i].report;
            std::string name = detail::md_cell(r.list_name);
            if (i == g.winner) name += " (winner)";
            out += name + " | " + text::shortest(r.C) + " | " + text::fixed(r.accuracy_mean, 3) +
                   " | " + text::fixed(r.accuracy_std, 3) + " | " + text::fixed(r.f1_mean, 3) +
                   " | " + text::fixed(r.f1_std, 3) + '\n';
        }
        return out;
    }
    out += "list\tpolarity\talpha\tsize\tC\taccuracy_mean\taccuracy_std\tf1_mean\tf1_std\tfold_digest\twinner\n";
    for (std::size_t i = 0; i < g.entries.size(); ++i) {
        const CVReport& r = g.entries[i].report;
        const KeywordList& l = g.lists[g.entries[i].list_index];
        out += text::escape(r.list_name) + '\t' + std::string(polarity_name(l.polarity)) + '\t' +
               (l.alpha ? text::shortest(*l.alpha) : std::string{}) + '\t' +
               std::to_string(r.list_size) + '\t' + text::shortest(r.C) + '\t' +
               text::full(r.accuracy_mean) + '\t' + text::full(r.accuracy_std) + '\t' +
               text::full(r.f1_mean) + '\t' + text::full(r.f1_std) + '\t' + r.fold_digest + '\t' +
               (i == g.winner ? "1" : "0") + '\n';
    }
    return out;
}

}  // namespace emokw
