// emokw: polarity keyword extraction, linear SVM training and keyword reports
// for segmented review corpora.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "emokw/emokw.hpp"

namespace fs = std::filesystem;

namespace {

struct Paths {
    fs::path reviews, corpus, out, out_dir, list, model, sentences;
    std::vector<fs::path> lists;
    std::string format;
    std::string unit = "sentence";
};

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

std::vector<fs::path> expand_lists(const std::vector<fs::path>& args) {
    std::vector<fs::path> out;
    for (const fs::path& a : args) {
        if (!fs::is_directory(a)) {
            out.push_back(a);
            continue;
        }
        std::vector<fs::path> found;
        for (const auto& e : fs::directory_iterator(a)) {
            if (e.is_regular_file() && e.path().extension() == ".txt") found.push_back(e.path());
        }
        std::sort(found.begin(), found.end());
        out.insert(out.end(), found.begin(), found.end());
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    emokw::PipelineConfig cfg;
    Paths p;
    std::string lexicon, noise, gloss;
    bool lenient = false, no_stratify = false, no_combined = false;

    CLI::App app{"Polarity keyword extraction and linear SVM analysis of review corpora"};
    app.set_config("--config", "", "Flat key=value config file; command-line flags override it");
    app.require_subcommand(1);

    // Pipeline options, accepted before or after the subcommand.
    app.add_option("--seed", cfg.seed, "Top-level seed; all random streams derive from it");
    app.add_option("--segment-mode", cfg.segment_mode, "auto | maxmatch | pre")
        ->check(CLI::IsMember({"auto", "maxmatch", "pre"}));
    app.add_option("--lexicon", lexicon, "Lexicon for maximum matching (one word per line)");
    app.add_option("--separator", cfg.separator, "Token separator for pre-segmented text");
    app.add_option("--delimiters", cfg.delimiters, R"(Sentence delimiters (\n escapes allowed))");
    app.add_option("--noise", noise, "Noise-set file (default: built-in set)");
    app.add_flag("--lenient", lenient, "Skip malformed input records instead of failing");
    app.add_option("--alpha-grid", cfg.alpha_grid, "Comparison coefficients: list 'a,b' or range 'lo:hi:step'");
    app.add_option("--min-df", cfg.min_df, "Minimum favored-class document frequency");
    app.add_flag("--normalize", cfg.normalize, "Divide entropies by log2(class size) (non-default)");
    app.add_option("--unit", p.unit, "Entropy document unit: sentence | review")
        ->check(CLI::IsMember({"sentence", "review"}));
    app.add_option("--C", cfg.C_values, "Soft-margin constant(s); several values form a grid")->delimiter(',');
    app.add_option("--tolerance", cfg.tolerance, "Solver stopping tolerance");
    app.add_option("--max-epochs", cfg.max_epochs, "Solver epoch limit");
    app.add_option("--folds", cfg.folds, "Cross-validation folds k");
    app.add_flag("--no-stratify", no_stratify, "Plain instead of stratified folds");
    app.add_flag("--nested", cfg.nested, "Re-extract keywords inside each fold (cv)");
    app.add_flag("--no-combined", no_combined, "Skip the combined best-pos/best-neg candidate (grid)");
    app.add_option("--threads", cfg.threads, "Worker threads for grid search (0 = hardware)");
    app.add_option("--gloss", gloss, "Gloss file word<TAB>translation (report)");
    app.add_option("--top-k", cfg.top_k, "Rows per weight table");
    app.add_option("--top-n", cfg.top_n, "Rows per frequency table");

    auto* ingest = app.add_subcommand("ingest", "Reviews -> cleaned, split, segmented sentences file");
    ingest->add_option("reviews", p.reviews, "Reviews file (.jsonl or .tsv)")->required();
    ingest->add_option("-o,--out", p.out, "Output sentences JSONL")->required();
    ingest->add_option("--format", p.format, "jsonl | tsv (default: by extension)")
        ->check(CLI::IsMember({"jsonl", "tsv"}));

    auto* extract = app.add_subcommand("extract", "Entropy table and keyword lists over the alpha grid");
    extract->add_option("corpus", p.corpus, "Sentences JSONL")->required();
    extract->add_option("-o,--out-dir", p.out_dir, "Output directory")->required();

    auto* grid = app.add_subcommand("grid", "Cross-validate keyword lists and train the winner");
    grid->add_option("corpus", p.corpus, "Sentences JSONL")->required();
    grid->add_option("lists", p.lists, "Keyword list files or directories")->required();
    grid->add_option("-o,--out-dir", p.out_dir, "Output directory")->required();

    auto* cv = app.add_subcommand("cv", "Cross-validate one keyword list");
    cv->add_option("corpus", p.corpus, "Sentences JSONL")->required();
    cv->add_option("list", p.list, "Keyword list file")->required();
    cv->add_option("-o,--out", p.out, "Per-fold TSV output (default: stdout summary only)");

    auto* trn = app.add_subcommand("train", "Train a model on all labeled sentences");
    trn->add_option("corpus", p.corpus, "Sentences JSONL")->required();
    trn->add_option("list", p.list, "Keyword list file")->required();
    trn->add_option("-o,--out", p.out, "Model file")->required();

    auto* pred = app.add_subcommand("predict", "Label sentences with a trained model");
    pred->add_option("model", p.model, "Model file")->required();
    pred->add_option("sentences", p.sentences, "Sentences JSONL")->required();
    pred->add_option("-o,--out", p.out, "Output TSV: id, label, decision")->required();

    auto* rep = app.add_subcommand("report", "Weight tables and frequency rankings");
    rep->add_option("model", p.model, "Model file")->required();
    rep->add_option("corpus", p.corpus, "Sentences JSONL (for frequencies)")->required();
    rep->add_option("-o,--out-dir", p.out_dir, "Output directory")->required();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (!lexicon.empty()) cfg.lexicon_path = lexicon;
    if (!noise.empty()) cfg.noise_path = noise;
    if (!gloss.empty()) cfg.gloss_path = gloss;
    if (!p.format.empty()) cfg.review_format = p.format == "tsv" ? emokw::ReviewFormat::Tsv : emokw::ReviewFormat::Jsonl;
    cfg.strict = !lenient;
    cfg.stratified = !no_stratify;
    cfg.combined = !no_combined;
    cfg.unit = p.unit == "review" ? emokw::EntropyUnit::Review : emokw::EntropyUnit::Sentence;

    try {
        if (*ingest) {
            const auto s = emokw::cmd_ingest(p.reviews, p.out, cfg);
            print_warnings(s.warnings);
            std::cout << "reviews\t" << s.reviews << "\nsentences\t" << s.sentences << "\npos\t"
                      << s.positive << "\nneg\t" << s.negative << "\nunlabeled\t" << s.unlabeled << '\n';
        } else if (*extract) {
            const auto s = emokw::cmd_extract(p.corpus, p.out_dir, cfg);
            std::cout << s.table_path.string() << '\n';
            for (std::size_t i = 0; i < s.lists.size(); ++i) {
                std::cout << s.list_paths[i].string() << '\t' << s.lists[i].words.size() << '\n';
            }
        } else if (*grid) {
            const auto s = emokw::cmd_grid(p.corpus, expand_lists(p.lists), p.out_dir, cfg);
            for (const auto& e : s.report.entries) print_warnings(e.report.warnings);
            std::cout << emokw::render_table(s.report, emokw::TableFormat::Markdown);
            std::cout << "model\t" << s.model_path.string() << '\n';
        } else if (*cv) {
            const auto r = emokw::cmd_cv(p.corpus, p.list, cfg);
            print_warnings(r.warnings);
            std::cout << emokw::render_table(r, emokw::TableFormat::Markdown);
            if (!p.out.empty()) {
                std::ofstream out(p.out, std::ios::binary);
                if (!(out << emokw::render_table(r, emokw::TableFormat::Tsv))) {
                    throw emokw::IoError("cannot write " + p.out.string());
                }
            }
        } else if (*trn) {
            const auto m = emokw::cmd_train(p.corpus, p.list, p.out, cfg);
            std::cout << "epochs\t" << m.stats.epochs << "\nconverged\t" << m.stats.converged
                      << "\nsupport_vectors\t" << m.stats.support_vectors << "\nprimal_objective\t"
                      << emokw::text::full(m.stats.primal_objective) << '\n';
        } else if (*pred) {
            const auto n = emokw::cmd_predict(p.model, p.sentences, p.out, cfg);
            std::cout << "predicted\t" << n << '\n';
        } else if (*rep) {
            std::vector<std::string> warnings;
            emokw::cmd_report(p.model, p.corpus, p.out_dir, cfg, &warnings);
            print_warnings(warnings);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const emokw::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
