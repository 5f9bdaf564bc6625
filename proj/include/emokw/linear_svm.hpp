#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "entropy_keywords.hpp"
#include "error.hpp"
#include "features.hpp"
#include "hash.hpp"
#include "text_io.hpp"

namespace emokw {

struct TrainConfig {
    double C = 0.5;
    /// Stop when the spread of projected gradients (max - min) falls below this.
    double tolerance = 1e-4;
    int max_epochs = 1000;
    std::uint64_t seed = 1;
    /// Constant appended to every row; its weight times this value is the bias.
    double bias_value = 1.0;

    void validate() const {
        if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("C must be positive");
        if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
        if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
        if (!(bias_value > 0.0) || !std::isfinite(bias_value)) {
            throw std::invalid_argument("bias_value must be positive");
        }
    }

    bool operator==(const TrainConfig&) const = default;
};

struct TrainStats {
    int epochs = 0;
    bool converged = false;
    /// (1/2)(|w|^2 + w_b^2) + C * sum(hinge), bias folded in as a feature.
    double primal_objective = 0.0;
    /// (1/2)|w̄|^2 - sum(alpha) after each epoch; non-increasing.
    std::vector<double> dual_history;
    std::size_t support_vectors = 0;

    double dual_objective() const { return dual_history.empty() ? 0.0 : dual_history.back(); }
};

/// Where a model's keyword index came from (reporting only).
struct ListInfo {
    std::string name;
    Polarity polarity = Polarity::Positive;
    std::optional<double> alpha;

    bool operator==(const ListInfo&) const = default;
};

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    KeywordIndex index;
    TrainConfig config;
    TrainStats stats;
    ListInfo list;
};

struct Prediction {
    /// 1 positive, 0 negative; 1 iff decision_value >= 0.
    int label = 0;
    double decision_value = 0.0;
};

// ---------------------------------------------------------------------------
// Training

struct DualSolution {
    /// One dual variable per row, each in [0, C].
    std::vector<double> alpha;
    std::vector<double> weights;
    double bias = 0.0;
    TrainStats stats;
};

/// Dual coordinate descent for the L1-loss (hinge) linear SVM
///   min_w  1/2 |w̄|^2 + C sum_i max(0, 1 - y_i w̄·x̄_i),   x̄_i = (x_i, bias_value)
/// through its box-constrained dual  min_a 1/2 a'Qa - e'a, 0 <= a_i <= C.
/// Coordinates are visited in a fresh seeded permutation each epoch, with
/// liblinear-style shrinking of variables stuck at a bound.
inline DualSolution solve_dual(const LabeledMatrix& m, const TrainConfig& config) {
    config.validate();
    const std::size_t n = m.size();
    if (n == 0) throw DataError("train: empty matrix");
    if (m.labels.size() != n) throw std::invalid_argument("train: labels/rows size mismatch");
    const bool has_pos = std::find(m.labels.begin(), m.labels.end(), 1) != m.labels.end();
    const bool has_neg = std::find(m.labels.begin(), m.labels.end(), -1) != m.labels.end();
    if (!has_pos || !has_neg) throw DataError("train: both classes must be present");

    const double C = config.C;
    const double bv = config.bias_value;
    std::vector<double> w(m.dimension, 0.0);
    double wb = 0.0;
    std::vector<double> alpha(n, 0.0);
    std::vector<double> qd(n);
    for (std::size_t i = 0; i < n; ++i) {
        double q = bv * bv;
        for (const SparseEntry& e : m.rows[i]) {
            if (e.column >= m.dimension) throw std::out_of_range("train: column out of range");
            q += static_cast<double>(e.count) * e.count;
        }
        qd[i] = q;
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(config.seed);

    constexpr double kInf = std::numeric_limits<double>::infinity();
    double pg_max_old = kInf;
    double pg_min_old = -kInf;
    std::size_t active = n;
    double alpha_sum = 0.0;
    TrainStats stats;

    const auto dual_objective = [&] {
        double ww = wb * wb;
        for (double x : w) ww += x * x;
        return 0.5 * ww - alpha_sum;
    };

    while (stats.epochs < config.max_epochs) {
        // Starting both at 0 makes the spread also bound every |PG|; a plain
        // max - min would accept all projected gradients equal but nonzero.
        double pg_max_new = 0.0;
        double pg_min_new = 0.0;
        for (std::size_t i = 0; i + 1 < active; ++i) {
            std::swap(order[i], order[i + rng.below(active - i)]);
        }

        for (std::size_t s = 0; s < active; ++s) {
            const std::size_t i = order[s];
            const double y = m.labels[i];
            double g = wb * bv;
            for (const SparseEntry& e : m.rows[i]) g += w[e.column] * e.count;
            g = g * y - 1.0;

            double pg = 0.0;
            if (alpha[i] == 0.0) {
                if (g > pg_max_old) {
                    std::swap(order[s], order[--active]);
                    --s;
                    continue;
                }
                if (g < 0.0) pg = g;
            } else if (alpha[i] == C) {
                if (g < pg_min_old) {
                    std::swap(order[s], order[--active]);
                    --s;
                    continue;
                }
                if (g > 0.0) pg = g;
            } else {
                pg = g;
            }
            pg_max_new = std::max(pg_max_new, pg);
            pg_min_new = std::min(pg_min_new, pg);

            if (std::fabs(pg) > 1e-12) {
                const double old = alpha[i];
                alpha[i] = std::min(std::max(old - g / qd[i], 0.0), C);
                const double d = (alpha[i] - old) * y;
                alpha_sum += alpha[i] - old;
                for (const SparseEntry& e : m.rows[i]) w[e.column] += d * e.count;
                wb += d * bv;
            }
        }

        ++stats.epochs;
        const double dual = dual_objective();
        if (!std::isfinite(dual)) {
            throw NumericError("train: non-finite dual objective at epoch " +
                               std::to_string(stats.epochs));
        }
        stats.dual_history.push_back(dual);

        if (pg_max_new - pg_min_new <= config.tolerance) {
            if (active == n) {
                stats.converged = true;
                break;
            }
            // Shrunk variables may have drifted: rescan everything once.
            active = n;
            pg_max_old = kInf;
            pg_min_old = -kInf;
            continue;
        }
        pg_max_old = pg_max_new > 0.0 ? pg_max_new : kInf;
        pg_min_old = pg_min_new < 0.0 ? pg_min_new : -kInf;
    }

    double hinge = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double f = wb * bv;
        for (const SparseEntry& e : m.rows[i]) f += w[e.column] * e.count;
        hinge += std::max(0.0, 1.0 - m.labels[i] * f);
        stats.support_vectors += alpha[i] > 0.0;
    }
    double ww = wb * wb;
    for (double x : w) ww += x * x;
    stats.primal_objective = 0.5 * ww + C * hinge;

    for (double x : w) {
        if (!std::isfinite(x)) throw NumericError("train: non-finite weight");
    }

    DualSolution sol;
    sol.alpha = std::move(alpha);
    sol.weights = std::move(w);
    sol.bias = wb * bv;
    sol.stats = std::move(stats);
    return sol;
}

inline LinearModel train(const LabeledMatrix& m, const TrainConfig& config) {
    DualSolution sol = solve_dual(m, config);
    LinearModel model;
    model.weights = std::move(sol.weights);
    model.bias = sol.bias;
    model.config = config;
    model.stats = std::move(sol.stats);
    return model;
}

/// Trains and attaches the keyword index and list provenance.
inline LinearModel train(const LabeledMatrix& m, const TrainConfig& config, const KeywordList& list) {
    if (m.dimension != list.words.size()) {
        throw std::invalid_argument("train: matrix dimension differs from keyword list");
    }
    LinearModel model = train(m, config);
    model.index = KeywordIndex(list.words);
    model.list = {list.name, list.polarity, list.alpha};
    return model;
}

/// (1/2)(|w|^2 + w_b^2) + C * sum(hinge) with w_b = bias / bias_value; the
/// quantity train() minimizes.
inline double primal_objective(const LabeledMatrix& m, std::span<const double> w, double bias,
                               double C, double bias_value = 1.0) {
    const double wb = bias / bias_value;
    double obj = wb * wb;
    for (double x : w) obj += x * x;
    obj *= 0.5;
    double hinge = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        double f = bias;
        for (const SparseEntry& e : m.rows[i]) f += w[e.column] * e.count;
        hinge += std::max(0.0, 1.0 - m.labels[i] * f);
    }
    return obj + C * hinge;
}

// ---------------------------------------------------------------------------
// Prediction

inline double decision_value(std::span<const double> weights, double bias, const SparseVector& x) {
    double f = bias;
    for (const SparseEntry& e : x) {
        if (e.column >= weights.size()) {
            throw std::out_of_range("predict: column " + std::to_string(e.column) +
                                    " outside model dimension " + std::to_string(weights.size()));
        }
        f += weights[e.column] * e.count;
    }
    return f;
}

/// Ties (decision exactly 0) go to the positive class.
inline Prediction predict(const LinearModel& model, const SparseVector& x) {
    const double f = decision_value(model.weights, model.bias, x);
    return {f >= 0.0 ? 1 : 0, f};
}

// ---------------------------------------------------------------------------
// Weight report

struct WeightedWord {
    std::string word;
    double weight = 0.0;

    bool operator==(const WeightedWord&) const = default;
};

struct WeightRanking {
    /// Descending weight.
    std::vector<WeightedWord> positive;
    /// Ascending weight.
    std::vector<WeightedWord> negative;
};

/// Both rankings cover every keyword (top_k clamps to the dimension); the
/// bias never appears. Equal weights are ordered by word.
inline WeightRanking weight_report(const LinearModel& model, std::size_t top_k) {
    if (top_k < 1) throw std::invalid_argument("weight_report: top_k must be >= 1");
    std::vector<WeightedWord> all;
    all.reserve(model.weights.size());
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        all.push_back({model.index.word(j), model.weights[j]});
    }
    const std::size_t k = std::min(top_k, all.size());
    WeightRanking r;
    r.positive = all;
    std::sort(r.positive.begin(), r.positive.end(), [](const auto& a, const auto& b) {
        return a.weight != b.weight ? a.weight > b.weight : a.word < b.word;
    });
    r.positive.resize(k);
    r.negative = std::move(all);
    std::sort(r.negative.begin(), r.negative.end(), [](const auto& a, const auto& b) {
        return a.weight != b.weight ? a.weight < b.weight : a.word < b.word;
    });
    r.negative.resize(k);
    return r;
}

// ---------------------------------------------------------------------------
// Model files
//
// Line-oriented text: a magic line, key=value header, "[weights]" followed
// by one "<keyword>\t<weight>" line per column, and a final
// "checksum=<fnv1a64 hex>" over every preceding byte. Reals are written with
// 17 significant digits, which round-trips every double exactly.

inline constexpr std::string_view kModelMagic = "emokw-linear-model";
inline constexpr int kModelVersion = 1;

inline std::string render_model(const LinearModel& m) {
    std::string out;
    const auto kv = [&](std::string_view k, const std::string& v) {
        out.append(k).append("=").append(v).append("\n");
    };
    out.append(kModelMagic).append("\n");
    kv("format_version", std::to_string(kModelVersion));
    kv("p", std::to_string(m.weights.size()));
    kv("C", text::full(m.config.C));
    kv("tolerance", text::full(m.config.tolerance));
    kv("max_epochs", std::to_string(m.config.max_epochs));
    kv("seed", std::to_string(m.config.seed));
    kv("bias_value", text::full(m.config.bias_value));
    kv("keyword_digest", m.index.digest());
    kv("list_name", text::escape(m.list.name));
    kv("list_polarity", std::string(polarity_name(m.list.polarity)));
    kv("list_alpha", m.list.alpha ? text::full(*m.list.alpha) : std::string{});
    kv("epochs", std::to_string(m.stats.epochs));
    kv("converged", m.stats.converged ? "1" : "0");
    kv("primal_objective", text::full(m.stats.primal_objective));
    kv("dual_objective", text::full(m.stats.dual_objective()));
    kv("support_vectors", std::to_string(m.stats.support_vectors));
    kv("bias", text::full(m.bias));
    out.append("[weights]\n");
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
        out.append(text::escape(m.index.word(j))).append("\t").append(text::full(m.weights[j]));
        out.append("\n");
    }
    const std::string sum = hex64(fnv1a64(out));
    out.append("checksum=").append(sum).append("\n");
    return out;
}

inline void save_model(const LinearModel& m, const std::filesystem::path& path) {
    if (m.weights.size() != m.index.dimension()) {
        throw std::invalid_argument("save_model: weights do not match keyword index");
    }
    std::ofstream out = detail::open_output(path);
    out << render_model(m);
    if (!out.flush()) throw IoError("write failure on " + path.string());
}

inline LinearModel parse_model(std::string_view doc, const std::string& origin = "model") {
    const auto fail = [&](const std::string& why) { return FormatError(origin + ": " + why); };

    const auto cpos = doc.rfind("checksum=");
    if (cpos == std::string_view::npos || (cpos > 0 && doc[cpos - 1] != '\n')) {
        throw fail("missing checksum (truncated file?)");
    }
    std::string_view stored = doc.substr(cpos + 9);
    if (!stored.empty() && stored.back() == '\n') stored.remove_suffix(1);
    if (stored != hex64(fnv1a64(doc.substr(0, cpos)))) throw fail("checksum mismatch");

    std::vector<std::string_view> lines;
    for (std::string_view rest = doc.substr(0, cpos); !rest.empty();) {
        const auto nl = rest.find('\n');
        lines.push_back(rest.substr(0, nl));
        rest.remove_prefix(nl == std::string_view::npos ? rest.size() : nl + 1);
    }
    if (lines.empty() || lines[0] != kModelMagic) throw fail("not a model file");

    std::map<std::string, std::string, std::less<>> header;
    std::size_t li = 1;
    for (; li < lines.size() && lines[li] != "[weights]"; ++li) {
        const auto eq = lines[li].find('=');
        if (eq == std::string_view::npos) throw fail("malformed header line");
        header.emplace(std::string(lines[li].substr(0, eq)), std::string(lines[li].substr(eq + 1)));
    }
    if (li == lines.size()) throw fail("missing [weights] section");
    ++li;

    const auto get = [&](std::string_view k) -> const std::string& {
        const auto it = header.find(k);
        if (it == header.end()) throw fail("missing header field " + std::string(k));
        return it->second;
    };
    const auto real = [&](std::string_view k) {
        const auto v = text::parse_double(get(k));
        if (!v) throw fail("bad real in " + std::string(k));
        return *v;
    };
    const auto integer = [&](std::string_view k) {
        const auto v = text::parse_int<std::uint64_t>(get(k));
        if (!v) throw fail("bad integer in " + std::string(k));
        return *v;
    };

    if (get("format_version") != std::to_string(kModelVersion)) {
        throw fail("unsupported model version " + get("format_version"));
    }

    LinearModel m;
    m.config.C = real("C");
    m.config.tolerance = real("tolerance");
    m.config.max_epochs = static_cast<int>(integer("max_epochs"));
    m.config.seed = integer("seed");
    m.config.bias_value = real("bias_value");
    m.list.name = text::unescape(get("list_name"));
    const std::string& pol = get("list_polarity");
    if (pol == "pos") m.list.polarity = Polarity::Positive;
    else if (pol == "neg") m.list.polarity = Polarity::Negative;
    else if (pol == "combined") m.list.polarity = Polarity::Combined;
    else throw fail("unknown list polarity " + pol);
    if (!get("list_alpha").empty()) m.list.alpha = real("list_alpha");
    m.stats.epochs = static_cast<int>(integer("epochs"));
    m.stats.converged = get("converged") == "1";
    m.stats.primal_objective = real("primal_objective");
    m.stats.dual_history.push_back(real("dual_objective"));
    m.stats.support_vectors = integer("support_vectors");
    m.bias = real("bias");

    const std::uint64_t p = integer("p");
    if (lines.size() - li != p) throw fail("weight count differs from p");
    std::vector<std::string> words;
    words.reserve(p);
    m.weights.reserve(p);
    for (; li < lines.size(); ++li) {
        const auto tab = lines[li].rfind('\t');
        if (tab == std::string_view::npos) throw fail("malformed weight line");
        const auto v = text::parse_double(lines[li].substr(tab + 1));
        if (!v) throw fail("bad weight value");
        words.push_back(text::unescape(lines[li].substr(0, tab)));
        m.weights.push_back(*v);
    }
    m.index = KeywordIndex(std::move(words));
    if (m.index.digest() != get("keyword_digest")) {
        throw fail("keyword digest mismatch: file says " + get("keyword_digest") +
                   ", keywords hash to " + m.index.digest());
    }
    return m;
}

inline LinearModel load_model(const std::filesystem::path& path) {
    return parse_model(detail::read_file(path), path.string());
}

}  // namespace emokw
