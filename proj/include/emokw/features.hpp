#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"
#include "entropy_keywords.hpp"
#include "error.hpp"
#include "hash.hpp"
#include "segmenter.hpp"

namespace emokw {

/// Keyword -> column, in the order of the source list.
class KeywordIndex {
public:
    KeywordIndex() = default;

    explicit KeywordIndex(std::vector<std::string> words) : words_(std::move(words)) {
        columns_.reserve(words_.size());
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if (!columns_.emplace(words_[i], static_cast<std::uint32_t>(i)).second) {
                throw std::invalid_argument("duplicate keyword \"" + words_[i] + "\"");
            }
        }
    }

    explicit KeywordIndex(const KeywordList& list) : KeywordIndex(list.words) {}

    std::size_t dimension() const { return words_.size(); }
    const std::vector<std::string>& words() const { return words_; }
    const std::string& word(std::size_t column) const { return words_.at(column); }

    std::optional<std::uint32_t> column(std::string_view word) const {
        const auto it = columns_.find(word);
        if (it == columns_.end()) return std::nullopt;
        return it->second;
    }

    /// FNV-1a over the words, each followed by '\n'. Identifies the exact
    /// feature layout a model was trained on.
    std::string digest() const {
        std::uint64_t h = kFnvOffset;
        for (const std::string& w : words_) {
            h = fnv1a64(w, h);
            h = fnv1a64("\n", h);
        }
        return hex64(h);
    }

    bool operator==(const KeywordIndex& other) const { return words_ == other.words_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>> columns_;
};

struct SparseEntry {
    std::uint32_t column;
    std::uint32_t count;

    bool operator==(const SparseEntry&) const = default;
};

/// Columns strictly increasing, counts > 0.
using SparseVector = std::vector<SparseEntry>;

/// Keyword counts of a tokenized sentence; other tokens are ignored.
inline SparseVector vectorize(std::span<const std::string> tokens, const KeywordIndex& index) {
    SparseVector v;
    for (const std::string& t : tokens) {
        if (const auto col = index.column(t)) v.push_back({*col, 1});
    }
    std::sort(v.begin(), v.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.column < b.column; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (out > 0 && v[out - 1].column == v[i].column) {
            ++v[out - 1].count;
        } else {
            v[out++] = v[i];
        }
    }
    v.resize(out);
    return v;
}

inline SparseVector vectorize(const Sentence& sentence, const KeywordIndex& index) {
    if (!sentence.tokens) throw DataError("sentence " + sentence.id + " is not segmented");
    return vectorize(*sentence.tokens, index);
}

/// Rows with labels +1 (Positive) / -1 (Negative), in corpus order.
struct LabeledMatrix {
    std::vector<SparseVector> rows;
    std::vector<std::int8_t> labels;
    std::size_t dimension = 0;

    std::size_t size() const { return rows.size(); }

    /// Rows without any keyword; kept, they still inform the bias.
    std::size_t zero_rows() const {
        return static_cast<std::size_t>(
            std::count_if(rows.begin(), rows.end(), [](const SparseVector& r) { return r.empty(); }));
    }

    LabeledMatrix select(std::span<const std::size_t> which) const {
        LabeledMatrix m;
        m.dimension = dimension;
        m.rows.reserve(which.size());
        m.labels.reserve(which.size());
        for (std::size_t i : which) {
            m.rows.push_back(rows[i]);
            m.labels.push_back(labels[i]);
        }
        return m;
    }

    bool operator==(const LabeledMatrix&) const = default;
};

/// Throws DataError on an unlabeled or untokenized sentence.
inline LabeledMatrix build_matrix(const Corpus& corpus, std::span<const std::size_t> which,
                                  const KeywordIndex& index) {
    LabeledMatrix m;
    m.dimension = index.dimension();
    m.rows.reserve(which.size());
    m.labels.reserve(which.size());
    for (std::size_t i : which) {
        const Sentence& s = corpus[i];
        if (s.label == Label::Unlabeled) throw DataError("sentence " + s.id + " is unlabeled");
        m.rows.push_back(vectorize(s, index));
        m.labels.push_back(s.label == Label::Positive ? std::int8_t{1} : std::int8_t{-1});
    }
    return m;
}

inline LabeledMatrix build_matrix(std::span<const Sentence> sentences, const KeywordIndex& index) {
    const Corpus corpus(std::vector<Sentence>(sentences.begin(), sentences.end()));
    std::vector<std::size_t> all(corpus.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return build_matrix(corpus, all, index);
}

/// Debug export: `row<TAB>col<TAB>count` triplets and one 1/0 label per line.
inline void export_matrix(const LabeledMatrix& m, const std::filesystem::path& triplets,
                          const std::filesystem::path& labels) {
    std::ofstream t = detail::open_output(triplets);
    std::ofstream l = detail::open_output(labels);
    t << "row\tcol\tcount\n";
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        for (const SparseEntry& e : m.rows[r]) t << r << '\t' << e.column << '\t' << e.count << '\n';
        l << (m.labels[r] > 0 ? 1 : 0) << '\n';
    }
    if (!t.flush() || !l.flush()) throw IoError("write failure on matrix export");
}

}  // namespace emokw
