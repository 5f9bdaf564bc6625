#include <gtest/gtest.h>

#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "emokw/evaluation.hpp"
#include "emokw/hash.hpp"

using namespace emokw;

namespace {

std::vector<std::int8_t> labels_of(int pos, int neg) {
    std::vector<std::int8_t> y(pos, 1);
    y.insert(y.end(), neg, -1);
    return y;
}

Sentence sent(std::string id, std::vector<std::string> t, Label l) {
    Sentence s;
    s.id = id + "#0";
    s.review_id = std::move(id);
    s.tokens = std::move(t);
    s.label = l;
    return s;
}

// Positive sentences use "good"/"nice", negative "bad"/"awful"; noise words shared.
Corpus separable(int per_class, std::uint64_t seed = 3) {
    Rng rng(seed);
    std::vector<Sentence> out;
    for (int i = 0; i < 2 * per_class; ++i) {
        const bool pos = i % 2 == 0;
        std::vector<std::string> t{pos ? (rng.below(2) ? "good" : "nice") : (rng.below(2) ? "bad" : "awful")};
        for (int j = 0, n = static_cast<int>(rng.below(3)); j < n; ++j) t.push_back("n" + std::to_string(rng.below(5)));
        out.push_back(sent("r" + std::to_string(i), t, pos ? Label::Positive : Label::Negative));
    }
    return Corpus(std::move(out));
}

KeywordList list(std::string name, std::vector<std::string> words, Polarity p = Polarity::Positive) {
    return {p, 2.0, 2, std::move(name), std::move(words)};
}

}  // namespace

TEST(KFold, BalancedTenItems) {
    const auto y = labels_of(5, 5);
    const FoldAssignment f = kfold_split(y, {5, true, 1});
    for (int k = 0; k < 5; ++k) {
        const auto m = f.members(k);
        ASSERT_EQ(m.size(), 2u);
        EXPECT_NE(y[m[0]], y[m[1]]);
    }
}

TEST(KFold, PigeonholeSizes) {
    const FoldAssignment f = kfold_split(labels_of(4, 3), {3, false, 9});
    std::multiset<std::size_t> sizes;
    for (int k = 0; k < 3; ++k) sizes.insert(f.members(k).size());
    EXPECT_EQ(sizes, (std::multiset<std::size_t>{2, 2, 3}));
    const FoldAssignment s = kfold_split(labels_of(4, 3), {3, true, 9});
    sizes.clear();
    for (int k = 0; k < 3; ++k) sizes.insert(s.members(k).size());
    EXPECT_EQ(sizes, (std::multiset<std::size_t>{2, 2, 3}));
}

TEST(KFold, KTwoOnFour) {
    const FoldAssignment f = kfold_split(labels_of(2, 2), {2, true, 5});
    EXPECT_EQ(f.members(0).size(), 2u);
    EXPECT_EQ(f.members(1).size(), 2u);
}

TEST(KFold, DeterministicAndSeedSensitive) {
    const auto y = labels_of(40, 60);
    EXPECT_EQ(kfold_split(y, {5, true, 42}), kfold_split(y, {5, true, 42}));
    EXPECT_EQ(kfold_split(y, {5, true, 42}).digest(), kfold_split(y, {5, true, 42}).digest());
    EXPECT_NE(kfold_split(y, {5, true, 42}).digest(), kfold_split(y, {5, true, 43}).digest());
}

TEST(KFold, Errors) {
    EXPECT_THROW(kfold_split(labels_of(2, 2), {1, true, 1}), std::invalid_argument);
    EXPECT_THROW(kfold_split(labels_of(2, 2), {5, false, 1}), DataError);
    EXPECT_THROW(kfold_split(labels_of(10, 2), {3, true, 1}), DataError);
    EXPECT_NO_THROW(kfold_split(labels_of(10, 2), {3, false, 1}));
}

TEST(KFold, PartitionAndStratificationProperties) {
    Rng rng(123);
    for (int trial = 0; trial < 300; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(9));
        const int pos = k + static_cast<int>(rng.below(60));
        const int neg = k + static_cast<int>(rng.below(60));
        std::vector<std::int8_t> y = labels_of(pos, neg);
        rng.shuffle(y);
        const bool strat = rng.below(2);
        const FoldAssignment f = kfold_split(y, {k, strat, rng.next()});
        std::vector<int> seen(y.size(), 0);
        std::size_t lo = y.size(), hi = 0;
        std::size_t plo = y.size(), phi = 0;
        for (int fold = 0; fold < k; ++fold) {
            const auto m = f.members(fold);
            std::size_t p = 0;
            for (std::size_t i : m) {
                ++seen[i];
                p += y[i] > 0;
            }
            lo = std::min(lo, m.size());
            hi = std::max(hi, m.size());
            plo = std::min(plo, p);
            phi = std::max(phi, p);
            ASSERT_EQ(f.complement(fold).size() + m.size(), y.size());
        }
        for (int c : seen) ASSERT_EQ(c, 1);
        ASSERT_LE(hi - lo, 1u);
        if (strat) {
            ASSERT_LE(phi - plo, 1u);
        }
    }
}

TEST(Metrics, Examples) {
    Metrics m = metrics_from_counts(8, 2, 2, 8);
    EXPECT_DOUBLE_EQ(m.precision, 0.8);
    EXPECT_DOUBLE_EQ(m.recall, 0.8);
    EXPECT_DOUBLE_EQ(m.f1, 0.8);
    EXPECT_DOUBLE_EQ(m.accuracy, 0.8);

    const std::vector<int> t{1, 0, 1, 1, 0};
    m = compute_metrics(t, t);
    EXPECT_EQ(m.precision, 1.0);
    EXPECT_EQ(m.recall, 1.0);
    EXPECT_EQ(m.f1, 1.0);
    EXPECT_EQ(m.accuracy, 1.0);

    const std::vector<int> none{0, 0, 0};
    m = compute_metrics(none, std::vector<int>{1, 0, 1});
    EXPECT_EQ(m.tp + m.fp, 0u);
    EXPECT_EQ(m.precision, 0.0);
    EXPECT_EQ(m.f1, 0.0);
    EXPECT_DOUBLE_EQ(m.accuracy, 1.0 / 3.0);
}

TEST(Metrics, Errors) {
    EXPECT_THROW(compute_metrics(std::vector<int>{1}, std::vector<int>{1, 0}), std::invalid_argument);
    EXPECT_THROW(compute_metrics(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
    EXPECT_THROW(compute_metrics(std::vector<int>{2}, std::vector<int>{1}), std::invalid_argument);
}

TEST(Metrics, MatchRationalFormulasOnAllSmallConfusions) {
    // Each ratio must equal the correctly rounded quotient of its integer counts.
    for (std::uint64_t tp = 0; tp <= 6; ++tp)
        for (std::uint64_t fp = 0; fp + tp <= 6; ++fp)
            for (std::uint64_t fn = 0; fn + fp + tp <= 6; ++fn)
                for (std::uint64_t tn = 0; tn + fn + fp + tp <= 6; ++tn) {
                    const std::uint64_t total = tp + fp + fn + tn;
                    if (total == 0) continue;
                    std::vector<int> pred, truth;
                    const auto add = [&](std::uint64_t n, int p, int t) {
                        pred.insert(pred.end(), n, p);
                        truth.insert(truth.end(), n, t);
                    };
                    add(tp, 1, 1);
                    add(fp, 1, 0);
                    add(fn, 0, 1);
                    add(tn, 0, 0);
                    const Metrics m = compute_metrics(pred, truth);
                    ASSERT_EQ(m.total(), total);
                    ASSERT_EQ(m.tp, tp);
                    ASSERT_EQ(m.tn, tn);
                    ASSERT_EQ(m.accuracy, double(tp + tn) / double(total));
                    ASSERT_EQ(m.precision, tp + fp ? double(tp) / double(tp + fp) : 0.0);
                    ASSERT_EQ(m.recall, tp + fn ? double(tp) / double(tp + fn) : 0.0);
                    ASSERT_EQ(m.f1, tp ? double(2 * tp) / double(2 * tp + fp + fn) : 0.0);
                }
}

TEST(CrossValidate, SeparableIsPerfect) {
    const Corpus c = separable(25);
    const CVReport r = cross_validate(c, list("kw", {"good", "nice", "bad", "awful"}), TrainConfig{}, {5, true, 1});
    EXPECT_EQ(r.folds.size(), 5u);
    EXPECT_EQ(r.accuracy_mean, 1.0);
    EXPECT_EQ(r.accuracy_std, 0.0);
    EXPECT_EQ(r.f1_mean, 1.0);
    EXPECT_EQ(r.list_size, 4u);
    EXPECT_TRUE(r.warnings.empty());
}

TEST(CrossValidate, MeanAndStdOverFolds) {
    const Corpus c = separable(20, 8);
    const CVReport r = cross_validate(c, list("kw", {"good", "n1", "n2"}), TrainConfig{}, {4, true, 2});
    ASSERT_EQ(r.folds.size(), 4u);
    double mean = 0, var = 0;
    for (const Metrics& m : r.folds) mean += m.accuracy;
    mean /= 4;
    for (const Metrics& m : r.folds) var += (m.accuracy - mean) * (m.accuracy - mean);
    EXPECT_NEAR(r.accuracy_mean, mean, 1e-15);
    EXPECT_NEAR(r.accuracy_std, std::sqrt(var / 4), 1e-15);
}

TEST(CrossValidate, RandomLabelsScoreNearMajorityRate) {
    double total = 0.0;
    double majority = 0.0;
    for (int seed = 0; seed < 50; ++seed) {
        Rng rng(1000 + seed);
        std::vector<Sentence> s;
        std::size_t pos = 0;
        for (int i = 0; i < 120; ++i) {
            std::vector<std::string> t;
            for (int j = 0; j < 3; ++j) t.push_back("k" + std::to_string(rng.below(6)));
            const bool p = rng.uniform() < 0.6;
            pos += p;
            s.push_back(sent("r" + std::to_string(i), t, p ? Label::Positive : Label::Negative));
        }
        majority += std::max(pos, 120 - pos) / 120.0;
        const CVReport r = cross_validate(Corpus(std::move(s)), list("k", {"k0", "k1", "k2", "k3", "k4", "k5"}),
                                          TrainConfig{}, {5, true, static_cast<std::uint64_t>(seed)});
        total += r.accuracy_mean;
    }
    EXPECT_NEAR(total / 50, majority / 50, 0.15);
}

TEST(CrossValidate, EmptyListRejectedButMatrixFormIsBiasOnly) {
    const Corpus c = separable(5);
    EXPECT_THROW(cross_validate(c, list("e", {}), TrainConfig{}, {5, true, 1}), std::invalid_argument);
    LabeledMatrix m;
    m.rows.assign(10, {});
    m.labels = labels_of(6, 4);
    const CVReport r = cross_validate(m, kfold_split(m.labels, {2, true, 1}), TrainConfig{});
    EXPECT_FALSE(r.warnings.empty());
    EXPECT_EQ(r.list_size, 0u);
}

TEST(CrossValidate, SingleClassTrainingSplitWarns) {
    LabeledMatrix m;
    m.dimension = 1;
    m.rows = {{{0, 1}}, {{0, 1}}, {}, {}, {}};
    m.labels = {1, 1, -1, -1, -1};
    FoldAssignment f;
    f.k = 2;
    f.fold_of = {0, 0, 1, 1, 1};
    const CVReport r = cross_validate(m, f, TrainConfig{});
    EXPECT_EQ(r.folds.size(), 2u);
    EXPECT_GE(r.warnings.size(), 2u);
    EXPECT_EQ(r.accuracy_mean, 0.0);
}

TEST(CrossValidate, NestedTracksPlainOnCleanData) {
    const Corpus c = separable(30);
    KeywordRecipe recipe;
    recipe.polarity = Polarity::Combined;
    recipe.alpha = recipe.alpha_neg = 1.5;
    const CVReport r = cross_validate_nested(c, recipe, TrainConfig{}, {5, true, 1});
    EXPECT_EQ(r.list_name, "comb_pos_a1.50+neg_a1.50@nested");
    EXPECT_EQ(r.folds.size(), 5u);
    EXPECT_EQ(r.accuracy_mean, 1.0);
    EXPECT_GE(r.list_size, 2u);
}

TEST(GridSearch, SingleListWins) {
    const Corpus c = separable(10);
    const std::vector<double> Cs{0.5};
    const GridSearchReport g = grid_search(c, {list("only", {"good"})}, Cs, TrainConfig{}, {5, true, 1});
    ASSERT_EQ(g.entries.size(), 1u);
    EXPECT_EQ(g.winning_list().name, "only");
}

TEST(GridSearch, TieGoesToSmallerList) {
    const Corpus c = separable(10);
    const std::vector<double> Cs{0.5};
    // "zzz" never occurs, so both lists yield identical models and reports.
    const GridSearchReport g = grid_search(c, {list("a_big", {"good", "nice", "bad", "awful", "zzz"}),
                                               list("b_small", {"good", "nice", "bad", "awful"})},
                                           Cs, TrainConfig{}, {5, true, 1});
    ASSERT_EQ(g.entries.size(), 2u);
    EXPECT_EQ(g.entries[0].report.f1_mean, g.entries[1].report.f1_mean);
    EXPECT_EQ(g.entries[0].report.accuracy_mean, g.entries[1].report.accuracy_mean);
    EXPECT_EQ(g.winning_list().name, "b_small");
}

TEST(GridSearch, TieRuleOrdering) {
    CVReport a, b;
    a.f1_mean = b.f1_mean = 0.9;
    a.accuracy_mean = b.accuracy_mean = 0.8;
    a.list_size = b.list_size = 3;
    a.C = 0.5;
    b.C = 1.0;
    EXPECT_TRUE(ranks_ahead(a, b));
    b.C = 0.5;
    a.list_name = "b";
    b.list_name = "a";
    EXPECT_TRUE(ranks_ahead(b, a));
    EXPECT_FALSE(ranks_ahead(a, a));
    b.accuracy_mean = 0.81;
    EXPECT_TRUE(ranks_ahead(b, a));
    a.f1_mean = 0.91;
    EXPECT_TRUE(ranks_ahead(a, b));
}

TEST(GridSearch, SharedFoldsAndDeterminismAcrossThreads) {
    const Corpus c = separable(40, 11);
    std::vector<KeywordList> lists;
    const std::vector<std::string> pool{"good", "nice", "bad", "awful", "n0", "n1", "n2", "n3"};
    for (int i = 0; i < 6; ++i) {
        std::vector<std::string> w(pool.begin() + i % 3, pool.begin() + 3 + i);
        lists.push_back(list("l" + std::to_string(i), w, i % 2 ? Polarity::Negative : Polarity::Positive));
    }
    const std::vector<double> Cs{0.1, 0.5};
    const GridSearchReport one = grid_search_with_combined(c, lists, Cs, TrainConfig{}, {5, true, 4}, 1);
    const GridSearchReport four = grid_search_with_combined(c, lists, Cs, TrainConfig{}, {5, true, 4}, 4);
    ASSERT_EQ(one.entries.size(), (lists.size() + 1) * Cs.size());
    EXPECT_EQ(one.lists.back().polarity, Polarity::Combined);
    ASSERT_EQ(one.entries.size(), four.entries.size());
    for (std::size_t i = 0; i < one.entries.size(); ++i) {
        EXPECT_EQ(one.entries[i].report.fold_digest, one.entries[0].report.fold_digest);
        EXPECT_EQ(one.entries[i].report.f1_mean, four.entries[i].report.f1_mean);
        EXPECT_EQ(one.entries[i].report.accuracy_std, four.entries[i].report.accuracy_std);
        EXPECT_EQ(one.entries[i].report.list_name, four.entries[i].report.list_name);
    }
    EXPECT_EQ(one.winner, four.winner);
    for (const GridEntry& e : one.entries) {
        EXPECT_FALSE(ranks_ahead(e.report, one.best().report));
    }
}
