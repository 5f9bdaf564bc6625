#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "entropy_keywords.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "features.hpp"
#include "hash.hpp"
#include "linear_svm.hpp"
#include "report.hpp"
#include "segmenter.hpp"

namespace emokw {

/// Every knob of the end-to-end pipeline, defaults as documented per module.
struct PipelineConfig {
    // ingestion
    std::optional<ReviewFormat> review_format;  // by extension when unset
    bool strict = true;
    std::optional<std::filesystem::path> noise_path;  // built-in set when unset
    std::string delimiters = "。！？；!?;\n";
    std::string segment_mode = "auto";  // auto | maxmatch | pre
    std::optional<std::filesystem::path> lexicon_path;
    std::string separator = " ";

    // keyword extraction
    std::string alpha_grid = "1.5:3.75:0.25";
    int min_df = 2;
    bool normalize = false;
    EntropyUnit unit = EntropyUnit::Sentence;

    // training and evaluation
    std::vector<double> C_values{0.5};
    double tolerance = 1e-4;
    int max_epochs = 1000;
    int folds = 5;
    bool stratified = true;
    bool nested = false;
    bool combined = true;
    std::uint64_t seed = 1;
    unsigned threads = 0;

    // reporting
    std::optional<std::filesystem::path> gloss_path;
    std::size_t top_k = 20;
    std::size_t top_n = 50;

    /// Referenced files must exist; numeric ranges must be sane.
    void validate() const {
        const auto exists = [](const std::optional<std::filesystem::path>& p, const char* what) {
            if (p && !std::filesystem::exists(*p)) {
                throw IoError(std::string(what) + " not found: " + p->string());
            }
        };
        exists(noise_path, "noise set");
        exists(lexicon_path, "lexicon");
        exists(gloss_path, "gloss file");
        if (segment_mode != "auto" && segment_mode != "maxmatch" && segment_mode != "pre") {
            throw std::invalid_argument("segment mode must be auto, maxmatch or pre");
        }
        if (segment_mode == "maxmatch" && !lexicon_path) {
            throw std::invalid_argument("maxmatch segmentation needs a lexicon");
        }
        if (utf8::length(separator) != 1) throw std::invalid_argument("separator must be one character");
        if (min_df < 1) throw std::invalid_argument("min_df must be >= 1");
        if (C_values.empty()) throw std::invalid_argument("at least one C value is required");
        for (double c : C_values) {
            if (!(c > 0.0)) throw std::invalid_argument("C values must be positive");
        }
        if (folds < 2) throw std::invalid_argument("folds must be >= 2");
        if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
    }

    AlphaGrid grid() const {
        AlphaGrid g = AlphaGrid::parse(alpha_grid);
        for (double a : g.values) {
            if (!(a > 1.0)) throw std::invalid_argument("alpha values must exceed 1");
        }
        return g;
    }

    SegmentationMode segmentation() const {
        if (segment_mode == "maxmatch" || (segment_mode == "auto" && lexicon_path)) {
            if (!lexicon_path) throw std::invalid_argument("maxmatch segmentation needs a lexicon");
            return MaxMatch(load_lexicon(*lexicon_path));
        }
        return PreSegmented{utf8::decode(separator, 0).codepoint};
    }

    NoiseFilter noise() const { return noise_path ? load_noise_filter(*noise_path) : default_noise_filter(); }

    TrainConfig train_config(double C) const {
        TrainConfig t;
        t.C = C;
        t.tolerance = tolerance;
        t.max_epochs = max_epochs;
        t.seed = derive_seed(seed, "svm");
        return t;
    }

    FoldSpec fold_spec() const { return {folds, stratified, derive_seed(seed, "folds")}; }
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out = open_output(path);
    out << content;
    if (!out.flush()) throw IoError("write failure on " + path.string());
}

inline ReviewFormat guess_format(const std::filesystem::path& p) {
    const std::string ext = p.extension().string();
    return ext == ".tsv" || ext == ".txt" ? ReviewFormat::Tsv : ReviewFormat::Jsonl;
}

inline std::set<char32_t> parse_delimiters(std::string_view spec) {
    std::string unescaped = text::unescape(spec);
    return utf8::codepoint_set(unescaped);
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct IngestSummary {
    std::size_t reviews = 0;
    std::size_t sentences = 0;
    std::size_t positive = 0;
    std::size_t negative = 0;
    std::size_t unlabeled = 0;
    std::vector<std::string> warnings;
};

/// reviews -> noise filter -> sentence split -> segment -> canonical sentences file.
inline IngestSummary cmd_ingest(const std::filesystem::path& reviews_path,
                                const std::filesystem::path& out_path, const PipelineConfig& cfg) {
    cfg.validate();
    const ReviewFormat format = cfg.review_format.value_or(detail::guess_format(reviews_path));
    ReviewLoad loaded = load_reviews(reviews_path, format, cfg.strict);
    const NoiseFilter noise = cfg.noise();
    const auto delimiters = detail::parse_delimiters(cfg.delimiters);
    const SegmentationMode mode = cfg.segmentation();

    std::vector<Sentence> sentences;
    for (RawReview& r : loaded.reviews) {
        r.text = noise.apply(r.text);
        for (Sentence& s : split_sentences(r, delimiters)) {
            s.tokens = segment(s.text, mode);
            sentences.push_back(std::move(s));
        }
    }
    const Corpus corpus(std::move(sentences));
    save_corpus(corpus, out_path);

    IngestSummary sum;
    sum.reviews = loaded.reviews.size();
    sum.sentences = corpus.size();
    sum.positive = corpus.positive().size();
    sum.negative = corpus.negative().size();
    sum.unlabeled = corpus.unlabeled().size();
    sum.warnings = std::move(loaded.warnings);
    return sum;
}

struct ExtractSummary {
    std::filesystem::path table_path;
    std::vector<std::filesystem::path> list_paths;
    std::vector<KeywordList> lists;
};

/// Writes <out>/entropy_table.tsv and one <out>/lists/<name>.txt per
/// (polarity, alpha) pair.
inline ExtractSummary cmd_extract(const std::filesystem::path& corpus_path,
                                  const std::filesystem::path& out_dir, const PipelineConfig& cfg) {
    cfg.validate();
    const AlphaGrid grid = cfg.grid();
    const Corpus corpus = load_corpus(corpus_path);
    const EntropyTable table = build_entropy_table(build_term_stats(corpus, cfg.unit), cfg.normalize);

    std::filesystem::create_directories(out_dir / "lists");
    ExtractSummary sum;
    sum.table_path = out_dir / "entropy_table.tsv";
    detail::write_text(sum.table_path, render_entropy_table(table));
    sum.lists = generate_grid_lists(table, grid, cfg.min_df);
    for (const KeywordList& l : sum.lists) {
        const auto path = out_dir / "lists" / (l.name + ".txt");
        save_keyword_list(l, path);
        sum.list_paths.push_back(path);
    }
    return sum;
}

struct GridSummary {
    GridSearchReport report;
    LinearModel model;
    std::filesystem::path model_path;
};

inline LinearModel train_on_corpus(const Corpus& corpus, const KeywordList& list, const TrainConfig& tc) {
    const std::vector<std::size_t> labeled = corpus.labeled();
    return train(build_matrix(corpus, labeled, KeywordIndex(list)), tc, list);
}

/// CV grid over the given lists (plus the combined best-pos/best-neg list
/// unless disabled); writes grid_report.{tsv,md}, winner_list.txt and
/// model.txt trained on every labeled sentence with the winning settings.
inline GridSummary cmd_grid(const std::filesystem::path& corpus_path,
                            const std::vector<std::filesystem::path>& list_paths,
                            const std::filesystem::path& out_dir, const PipelineConfig& cfg) {
    cfg.validate();
    if (list_paths.empty()) throw std::invalid_argument("grid: no keyword lists given");
    const Corpus corpus = load_corpus(corpus_path);
    std::vector<KeywordList> lists;
    for (const auto& p : list_paths) lists.push_back(load_keyword_list(p));

    const TrainConfig base = cfg.train_config(cfg.C_values.front());
    GridSummary sum;
    sum.report = cfg.combined
                     ? grid_search_with_combined(corpus, std::move(lists), cfg.C_values, base,
                                                 cfg.fold_spec(), cfg.threads)
                     : grid_search(corpus, std::move(lists), cfg.C_values, base, cfg.fold_spec(),
                                   cfg.threads);

    std::filesystem::create_directories(out_dir);
    detail::write_text(out_dir / "grid_report.tsv", render_table(sum.report, TableFormat::Tsv));
    detail::write_text(out_dir / "grid_report.md", render_table(sum.report, TableFormat::Markdown));
    save_keyword_list(sum.report.winning_list(), out_dir / "winner_list.txt");

    sum.model = train_on_corpus(corpus, sum.report.winning_list(),
                                cfg.train_config(sum.report.best().report.C));
    sum.model_path = out_dir / "model.txt";
    save_model(sum.model, sum.model_path);
    return sum;
}

/// CV of a single list (or, with cfg.nested, of the recipe that produced it).
inline CVReport cmd_cv(const std::filesystem::path& corpus_path, const std::filesystem::path& list_path,
                       const PipelineConfig& cfg) {
    cfg.validate();
    const Corpus corpus = load_corpus(corpus_path);
    const KeywordList list = load_keyword_list(list_path);
    const TrainConfig tc = cfg.train_config(cfg.C_values.front());
    if (!cfg.nested) return cross_validate(corpus, list, tc, cfg.fold_spec());
    if (list.polarity == Polarity::Combined || !list.alpha) {
        throw std::invalid_argument("nested CV needs a single-polarity list with an alpha");
    }
    KeywordRecipe recipe;
    recipe.polarity = list.polarity;
    recipe.alpha = *list.alpha;
    recipe.min_df = list.min_df;
    recipe.normalize = cfg.normalize;
    recipe.unit = cfg.unit;
    return cross_validate_nested(corpus, recipe, tc, cfg.fold_spec());
}

inline LinearModel cmd_train(const std::filesystem::path& corpus_path, const std::filesystem::path& list_path,
                             const std::filesystem::path& model_path, const PipelineConfig& cfg) {
    cfg.validate();
    const LinearModel model =
        train_on_corpus(load_corpus(corpus_path), load_keyword_list(list_path),
                        cfg.train_config(cfg.C_values.front()));
    save_model(model, model_path);
    return model;
}

/// One line per sentence: id<TAB>label(1/0)<TAB>decision value. Sentences
/// without tokens are segmented with the configured mode first. A zero-byte
/// input file yields an empty output.
inline std::size_t cmd_predict(const std::filesystem::path& model_path,
                               const std::filesystem::path& sentences_path,
                               const std::filesystem::path& out_path, const PipelineConfig& cfg) {
    cfg.validate();
    const LinearModel model = load_model(model_path);
    Corpus corpus;
    if (!std::filesystem::exists(sentences_path)) throw IoError("cannot open " + sentences_path.string());
    if (std::filesystem::file_size(sentences_path) > 0) corpus = load_corpus(sentences_path);

    std::optional<SegmentationMode> mode;
    std::string out;
    for (const Sentence& s : corpus.sentences()) {
        SparseVector x;
        if (s.tokens) {
            x = vectorize(*s.tokens, model.index);
        } else {
            if (!mode) mode = cfg.segmentation();
            x = vectorize(segment(s.text, *mode), model.index);
        }
        const Prediction p = predict(model, x);
        out += text::escape(s.id) + '\t' + std::to_string(p.label) + '\t' +
               text::shortest(p.decision_value) + '\n';
    }
    detail::write_text(out_path, out);
    return corpus.size();
}

/// weights_{pos,neg}.{md,tsv} from the model, frequency_{pos,neg}.{md,tsv}
/// from the corpus statistics.
inline void cmd_report(const std::filesystem::path& model_path, const std::filesystem::path& corpus_path,
                       const std::filesystem::path& out_dir, const PipelineConfig& cfg,
                       std::vector<std::string>* warnings = nullptr) {
    cfg.validate();
    const LinearModel model = load_model(model_path);
    std::optional<GlossDictionary> glosses;
    if (cfg.gloss_path) {
        glosses = GlossDictionary::load(*cfg.gloss_path);
        if (warnings) warnings->insert(warnings->end(), glosses->warnings().begin(), glosses->warnings().end());
    }
    const ClassTermStats stats = build_term_stats(load_corpus(corpus_path), cfg.unit);

    std::filesystem::create_directories(out_dir);
    const WeightTables tables = weight_tables(model, cfg.top_k, glosses ? &*glosses : nullptr);
    for (const auto& [tag, table] : {std::pair{"pos", &tables.positive}, std::pair{"neg", &tables.negative}}) {
        detail::write_text(out_dir / (std::string("weights_") + tag + ".md"),
                           render_table(*table, TableFormat::Markdown));
        detail::write_text(out_dir / (std::string("weights_") + tag + ".tsv"),
                           render_table(*table, TableFormat::Tsv));
    }
    for (Label l : {Label::Positive, Label::Negative}) {
        const FrequencyReport f = frequency_report(stats, l, cfg.top_n);
        const std::string tag(label_name(l));
        detail::write_text(out_dir / ("frequency_" + tag + ".md"), render_table(f, TableFormat::Markdown));
        detail::write_text(out_dir / ("frequency_" + tag + ".tsv"), render_table(f, TableFormat::Tsv));
    }
}

}  // namespace emokw
