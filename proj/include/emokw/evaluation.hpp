#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "corpus.hpp"
#include "entropy_keywords.hpp"
#include "error.hpp"
#include "features.hpp"
#include "hash.hpp"
#include "linear_svm.hpp"

namespace emokw {

// ---------------------------------------------------------------------------
// Folds

struct FoldSpec {
    int k = 5;
    bool stratified = true;
    std::uint64_t seed = 1;
};

struct FoldAssignment {
    int k = 0;
    /// Fold of each item, aligned with the labels given to kfold_split.
    std::vector<std::uint32_t> fold_of;

    std::vector<std::size_t> members(int fold) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_of.size(); ++i) {
            if (fold_of[i] == static_cast<std::uint32_t>(fold)) out.push_back(i);
        }
        return out;
    }

    std::vector<std::size_t> complement(int fold) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_of.size(); ++i) {
            if (fold_of[i] != static_cast<std::uint32_t>(fold)) out.push_back(i);
        }
        return out;
    }

    std::string digest() const {
        std::uint64_t h = fnv1a64(std::to_string(k) + ":");
        for (std::uint32_t f : fold_of) h = fnv1a64(std::to_string(f) + ",", h);
        return hex64(h);
    }

    bool operator==(const FoldAssignment&) const = default;
};

/// Shuffles (seeded) and deals items round-robin into k folds. Stratified
/// deals the positive items first and continues the same rotation with the
/// negatives, so both the per-class and the total fold sizes differ by at
/// most one.
inline FoldAssignment kfold_split(std::span<const std::int8_t> labels, const FoldSpec& spec) {
    const std::size_t n = labels.size();
    if (spec.k < 2) throw std::invalid_argument("kfold_split: k must be >= 2");
    if (static_cast<std::size_t>(spec.k) > n) {
        throw DataError("kfold_split: k=" + std::to_string(spec.k) + " exceeds " +
                        std::to_string(n) + " labeled items");
    }
    Rng rng(spec.seed);
    FoldAssignment out;
    out.k = spec.k;
    out.fold_of.assign(n, 0);

    std::vector<std::vector<std::size_t>> groups;
    if (spec.stratified) {
        groups.resize(2);
        for (std::size_t i = 0; i < n; ++i) groups[labels[i] > 0 ? 0 : 1].push_back(i);
        for (const auto& g : groups) {
            if (g.size() < static_cast<std::size_t>(spec.k)) {
                throw DataError("kfold_split: k=" + std::to_string(spec.k) +
                                " exceeds class size " + std::to_string(g.size()));
            }
        }
    } else {
        groups.emplace_back(n);
        for (std::size_t i = 0; i < n; ++i) groups[0][i] = i;
    }
    std::size_t next = 0;
    for (auto& g : groups) {
        rng.shuffle(g);
        for (std::size_t i : g) {
            out.fold_of[i] = static_cast<std::uint32_t>(next % static_cast<std::size_t>(spec.k));
            ++next;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics

struct Metrics {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
};

/// Undefined ratios (zero denominators) are reported as 0. F1 is evaluated
/// as 2tp / (2tp + fp + fn), equal to 2PR / (P + R) and a single rounding.
inline Metrics metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn,
                                   std::uint64_t tn) {
    const auto ratio = [](std::uint64_t num, std::uint64_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    Metrics m{tp, fp, fn, tn};
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = tp == 0 ? 0.0 : ratio(2 * tp, 2 * tp + fp + fn);
    m.accuracy = ratio(tp + tn, tp + fp + fn + tn);
    return m;
}

/// Labels are 1 (positive class) and 0.
inline Metrics compute_metrics(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("compute_metrics: length mismatch");
    if (predicted.empty()) throw std::invalid_argument("compute_metrics: empty input");
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const int p = predicted[i];
        const int t = truth[i];
        if ((p != 0 && p != 1) || (t != 0 && t != 1)) {
            throw std::invalid_argument("compute_metrics: labels must be 0 or 1");
        }
        (p ? (t ? tp : fp) : (t ? fn : tn))++;
    }
    return metrics_from_counts(tp, fp, fn, tn);
}

// ---------------------------------------------------------------------------
// Cross-validation

struct CVReport {
    std::string list_name;
    std::size_t list_size = 0;
    double C = 0.0;
    std::vector<Metrics> folds;
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;
    double f1_mean = 0.0;
    double f1_std = 0.0;
    std::string fold_digest;
    std::vector<std::string> warnings;
};

namespace detail {

/// Mean and population standard deviation (divisor n).
inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

inline void summarize(CVReport& r) {
    std::vector<double> acc, f1;
    for (const Metrics& m : r.folds) {
        acc.push_back(m.accuracy);
        f1.push_back(m.f1);
    }
    std::tie(r.accuracy_mean, r.accuracy_std) = mean_std(acc);
    std::tie(r.f1_mean, r.f1_std) = mean_std(f1);
}

/// Trains on `train`, scores `test`. A single-class training split cannot
/// produce an SVM, so it falls back to predicting that class (with a warning).
inline Metrics score_fold(const LabeledMatrix& train_m, const LabeledMatrix& test_m,
                          const TrainConfig& config, int fold, std::vector<std::string>& warnings) {
    std::vector<int> truth, pred;
    truth.reserve(test_m.size());
    pred.reserve(test_m.size());
    for (std::int8_t y : test_m.labels) truth.push_back(y > 0 ? 1 : 0);

    const bool has_pos = std::find(train_m.labels.begin(), train_m.labels.end(), 1) != train_m.labels.end();
    const bool has_neg = std::find(train_m.labels.begin(), train_m.labels.end(), -1) != train_m.labels.end();
    if (!has_pos || !has_neg) {
        warnings.push_back("fold " + std::to_string(fold) +
                           ": single-class training split, constant prediction");
        pred.assign(test_m.size(), has_pos ? 1 : 0);
    } else {
        const LinearModel model = train(train_m, config);
        for (const SparseVector& x : test_m.rows) {
            pred.push_back(decision_value(model.weights, model.bias, x) >= 0.0 ? 1 : 0);
        }
    }
    const bool test_pos = std::find(truth.begin(), truth.end(), 1) != truth.end();
    const bool test_neg = std::find(truth.begin(), truth.end(), 0) != truth.end();
    if (!test_pos || !test_neg) {
        warnings.push_back("fold " + std::to_string(fold) +
                           ": held-out split has a single class, F1 follows the zero convention");
    }
    return compute_metrics(pred, truth);
}

}  // namespace detail

/// K-fold CV over a prebuilt matrix; `folds` must be aligned with its rows.
inline CVReport cross_validate(const LabeledMatrix& m, const FoldAssignment& folds,
                               const TrainConfig& config, std::string list_name = {}) {
    if (folds.fold_of.size() != m.size()) throw std::invalid_argument("cross_validate: fold/row mismatch");
    CVReport r;
    r.list_name = std::move(list_name);
    r.list_size = m.dimension;
    r.C = config.C;
    r.fold_digest = folds.digest();
    if (m.dimension == 0) r.warnings.push_back("empty keyword list, bias-only model");
    for (int f = 0; f < folds.k; ++f) {
        const auto test_rows = folds.members(f);
        const auto train_rows = folds.complement(f);
        r.folds.push_back(
            detail::score_fold(m.select(train_rows), m.select(test_rows), config, f, r.warnings));
    }
    detail::summarize(r);
    return r;
}

/// CV of one keyword list over the labeled sentences of the corpus. The list
/// was extracted beforehand on the full labeled sample.
inline CVReport cross_validate(const Corpus& corpus, const KeywordList& list,
                               const TrainConfig& config, const FoldSpec& spec) {
    if (list.words.empty()) throw std::invalid_argument("cross_validate: empty keyword list");
    const std::vector<std::size_t> labeled = corpus.labeled();
    const LabeledMatrix m = build_matrix(corpus, labeled, KeywordIndex(list));
    return cross_validate(m, kfold_split(m.labels, spec), config, list.name);
}

/// How to re-derive a keyword list from training data (nested CV).
struct KeywordRecipe {
    Polarity polarity = Polarity::Positive;
    double alpha = 2.75;
    /// Negative-side coefficient for Combined recipes.
    double alpha_neg = 2.75;
    int min_df = 2;
    bool normalize = false;
    EntropyUnit unit = EntropyUnit::Sentence;

    std::string name() const {
        if (polarity != Polarity::Combined) return default_list_name(polarity, alpha);
        return "comb_" + default_list_name(Polarity::Positive, alpha) + "+" +
               default_list_name(Polarity::Negative, alpha_neg);
    }

    KeywordList build(const EntropyTable& table) const {
        if (polarity != Polarity::Combined) return extract_keywords(table, polarity, alpha, min_df);
        return merge_lists(extract_keywords(table, Polarity::Positive, alpha, min_df),
                           extract_keywords(table, Polarity::Negative, alpha_neg, min_df));
    }
};

/// Nested variant: keywords are re-extracted from each training split, so
/// held-out sentences never influence feature selection.
inline CVReport cross_validate_nested(const Corpus& corpus, const KeywordRecipe& recipe,
                                      const TrainConfig& config, const FoldSpec& spec) {
    const std::vector<std::size_t> labeled = corpus.labeled();
    std::vector<std::int8_t> labels;
    labels.reserve(labeled.size());
    for (std::size_t i : labeled) labels.push_back(corpus[i].label == Label::Positive ? 1 : -1);
    const FoldAssignment folds = kfold_split(labels, spec);

    CVReport r;
    r.list_name = recipe.name() + "@nested";
    r.C = config.C;
    r.fold_digest = folds.digest();
    std::size_t total_size = 0;
    for (int f = 0; f < folds.k; ++f) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i : folds.complement(f)) train_idx.push_back(labeled[i]);
        for (std::size_t i : folds.members(f)) test_idx.push_back(labeled[i]);
        const EntropyTable table =
            build_entropy_table(build_term_stats(corpus, train_idx, recipe.unit), recipe.normalize);
        const KeywordIndex index(recipe.build(table));
        total_size += index.dimension();
        r.folds.push_back(detail::score_fold(build_matrix(corpus, train_idx, index),
                                             build_matrix(corpus, test_idx, index), config, f,
                                             r.warnings));
    }
    r.list_size = total_size / static_cast<std::size_t>(folds.k);
    detail::summarize(r);
    return r;
}

// ---------------------------------------------------------------------------
// Grid search

struct GridEntry {
    std::size_t list_index = 0;
    CVReport report;
};

struct GridSearchReport {
    std::vector<KeywordList> lists;
    std::vector<GridEntry> entries;
    std::size_t winner = 0;  // into entries
    std::string rule =
        "max f1_mean; ties: higher accuracy_mean, smaller list, smaller C, lexicographic list name";

    const GridEntry& best() const { return entries.at(winner); }
    const KeywordList& winning_list() const { return lists.at(best().list_index); }

    /// Best entry among lists of one polarity, by the same rule.
    std::optional<std::size_t> best_of(Polarity p) const;
};

/// True when `a` ranks strictly ahead of `b`.
inline bool ranks_ahead(const CVReport& a, const CVReport& b) {
    if (a.f1_mean != b.f1_mean) return a.f1_mean > b.f1_mean;
    if (a.accuracy_mean != b.accuracy_mean) return a.accuracy_mean > b.accuracy_mean;
    if (a.list_size != b.list_size) return a.list_size < b.list_size;
    if (a.C != b.C) return a.C < b.C;
    return a.list_name < b.list_name;
}

inline std::optional<std::size_t> GridSearchReport::best_of(Polarity p) const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (lists[entries[i].list_index].polarity != p) continue;
        if (!best || ranks_ahead(entries[i].report, entries[*best].report)) best = i;
    }
    return best;
}

namespace detail {

inline unsigned worker_count(unsigned requested, std::size_t jobs) {
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/// Runs job(i) for i in [0, n) on a small pool; the first exception wins.
template <typename Job>
void parallel_for(std::size_t n, unsigned threads, Job&& job) {
    threads = worker_count(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                    try {
                        job(i);
                    } catch (...) {
                        std::lock_guard lock(error_mu);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// CV of every (list, C) pair over one shared fold assignment; the winner is
/// chosen by ranks_ahead. Entries appear in (list, C) order whatever the
/// completion order of the workers. Empty lists are scored as bias-only
/// models rather than skipped.
inline GridSearchReport grid_search(const Corpus& corpus, std::vector<KeywordList> lists,
                                    std::span<const double> C_values, const TrainConfig& base,
                                    const FoldSpec& spec, unsigned threads = 0) {
    if (lists.empty()) throw std::invalid_argument("grid_search: no keyword lists");
    const std::vector<double> Cs = C_values.empty() ? std::vector<double>{base.C}
                                                    : std::vector<double>(C_values.begin(), C_values.end());
    const std::vector<std::size_t> labeled = corpus.labeled();
    std::vector<std::int8_t> labels;
    labels.reserve(labeled.size());
    for (std::size_t i : labeled) labels.push_back(corpus[i].label == Label::Positive ? 1 : -1);
    const FoldAssignment folds = kfold_split(labels, spec);

    GridSearchReport out;
    out.lists = std::move(lists);
    out.entries.resize(out.lists.size() * Cs.size());
    detail::parallel_for(out.lists.size(), threads, [&](std::size_t li) {
        const KeywordList& list = out.lists[li];
        const LabeledMatrix m = build_matrix(corpus, labeled, KeywordIndex(list));
        for (std::size_t ci = 0; ci < Cs.size(); ++ci) {
            TrainConfig cfg = base;
            cfg.C = Cs[ci];
            out.entries[li * Cs.size() + ci] = {li, cross_validate(m, folds, cfg, list.name)};
        }
    });
    for (std::size_t i = 1; i < out.entries.size(); ++i) {
        if (ranks_ahead(out.entries[i].report, out.entries[out.winner].report)) out.winner = i;
    }
    return out;
}

/// grid_search, then one more candidate: the union of the best positive and
/// the best negative list, cross-validated on the same folds. The overall
/// winner is re-chosen across all candidates.
inline GridSearchReport grid_search_with_combined(const Corpus& corpus, std::vector<KeywordList> lists,
                                                  std::span<const double> C_values,
                                                  const TrainConfig& base, const FoldSpec& spec,
                                                  unsigned threads = 0) {
    GridSearchReport out = grid_search(corpus, std::move(lists), C_values, base, spec, threads);
    const auto bp = out.best_of(Polarity::Positive);
    const auto bn = out.best_of(Polarity::Negative);
    if (!bp || !bn) return out;

    KeywordList combined = merge_lists(out.lists[out.entries[*bp].list_index],
                                       out.lists[out.entries[*bn].list_index]);
    GridSearchReport extra = grid_search(corpus, {std::move(combined)}, C_values, base, spec, threads);
    const std::size_t li = out.lists.size();
    out.lists.push_back(std::move(extra.lists.front()));
    for (GridEntry& e : extra.entries) out.entries.push_back({li, std::move(e.report)});
    out.winner = 0;
    for (std::size_t i = 1; i < out.entries.size(); ++i) {
        if (ranks_ahead(out.entries[i].report, out.entries[out.winner].report)) out.winner = i;
    }
    return out;
}

}  // namespace emokw
