// svcnn command line: train a convolutional short-text classifier, derive
// per-word/per-phrase importance scores from it, extract top-k task words,
// and benchmark against the count- and gradient-based baselines.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>

#include "svcnn/baselines.hpp"
#include "svcnn/corpus.hpp"
#include "svcnn/embeddings.hpp"
#include "svcnn/eval.hpp"
#include "svcnn/model.hpp"
#include "svcnn/scoring.hpp"

namespace {

using namespace svcnn;

struct Options {
    std::string corpus_path;
    std::string embeddings_path;
    std::string embeddings_format = "text";
    bool random_embeddings = false;
    std::string lexicon_path;
    std::string model_path;
    std::string out_path;
    int m = 100;
    int h = 1;
    int d = 300;
    std::string pooling = "avg";
    std::string nonlinearity = "relu";
    double lr = 0.05;
    double l2 = 0.0;
    int epochs = 25;
    int folds = 10;
    std::vector<int> ks;
    uint64_t seed = 1;
    std::string stopwords = "auto";  // auto | off | builtin | <path>
    std::string class_source = "gold";
    std::string dedupe = "on";
    std::vector<std::string> methods;
    size_t min_tokens = 1;
    bool finetune_embeddings = false;
    std::string saliency_norm = "linf";
    std::string acc_denom = "min";    // min | k
    std::string averaging = "micro";  // micro | macro
    std::string eval_texts = "all";   // all | with-gold
    bool timestamps = false;
    bool unlabeled = false;
    bool highlight = false;

    // synth
    std::string synth_classes = "pos,neg";
    int keywords_per_class = 1;
    int texts_per_class = 1000;
    int bg_vocab = 200;
    int min_len = 8;
    int max_len = 20;
    double noise = 0.0;
};

void add_common_flags(CLI::App* cmd, Options& o) {
    cmd->set_help_flag("--help", "print this help message and exit");  // frees -h for --h
    cmd->set_config("--config", "", "read options from a key=value config file");
    cmd->add_option("--corpus", o.corpus_path, "labeled corpus file (label<TAB>text per line)");
    cmd->add_option("--embeddings", o.embeddings_path, "pretrained embeddings file");
    cmd->add_option("--embeddings-format", o.embeddings_format, "embeddings file format")
        ->check(CLI::IsMember({"text", "binary"}));
    cmd->add_flag("--random-embeddings", o.random_embeddings,
                  "use deterministic random vectors for every word instead of a pretrained file");
    cmd->add_option("--lexicon", o.lexicon_path, "ground-truth lexicon file (word[<TAB>class])");
    cmd->add_option("--model", o.model_path, "model file to write (train) or read (extract)");
    cmd->add_option("--out", o.out_path, "output file (default: stdout)");
    cmd->add_option("--m", o.m, "number of filters (default 100)");
    cmd->add_option("--h", o.h, "filter width in words; 1 = words, >=2 = phrases (default 1)");
    cmd->add_option("--d", o.d, "embedding dimension (default 300)");
    cmd->add_option("--pooling", o.pooling, "pooling operation (default avg)")
        ->check(CLI::IsMember({"max", "avg"}));
    cmd->add_option("--nonlinearity", o.nonlinearity, "activation (default relu)")
        ->check(CLI::IsMember({"relu", "tanh", "identity"}));
    cmd->add_option("--lr", o.lr, "SGD learning rate (default 0.05)");
    cmd->add_option("--l2", o.l2, "L2 weight decay (default 0)");
    cmd->add_option("--epochs", o.epochs, "training epochs (default 25)");
    cmd->add_option("--folds", o.folds, "cross-validation fold count (default 10)");
    cmd->add_option("--k", o.ks, "Top-k cutoff, repeatable (default 1 3 5)");
    cmd->add_option("--seed", o.seed, "random seed (default 1)");
    cmd->add_option("--stopwords", o.stopwords,
                    "stop words: auto (bundled list when --h >= 2), off, builtin, or a file path");
    cmd->add_option("--class-source", o.class_source,
                    "class used for scoring: gold label or predicted label")
        ->check(CLI::IsMember({"gold", "predicted"}));
    cmd->add_option("--dedupe", o.dedupe, "keep only each word's best occurrence (default on)")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--methods", o.methods,
                    "methods to run: SV-MAX SV-AVG TF-IDF TF-IDF-softmax SalMap-MAX SalMap-AVG");
    cmd->add_option("--min-tokens", o.min_tokens, "drop texts with fewer tokens at load (default 1)");
    cmd->add_flag("--finetune-embeddings", o.finetune_embeddings,
                  "update word vectors during training (default frozen; vectors are not persisted)");
    cmd->add_option("--saliency-norm", o.saliency_norm, "per-word gradient reduction (default linf)")
        ->check(CLI::IsMember({"linf", "l2"}));
    cmd->add_option("--acc-denom", o.acc_denom,
                    "accuracy@k per-text denominator: min(k, positions) or always k")
        ->check(CLI::IsMember({"min", "k"}));
    cmd->add_option("--averaging", o.averaging, "precision/recall averaging (default micro)")
        ->check(CLI::IsMember({"micro", "macro"}));
    cmd->add_option("--eval-texts", o.eval_texts,
                    "accuracy@k averages over all texts or only texts containing a lexicon word")
        ->check(CLI::IsMember({"all", "with-gold"}));
    cmd->add_flag("--timestamps", o.timestamps, "prefix diagnostics with wall-clock timestamps");
}

std::string diag_prefix(const Options& o) {
    if (!o.timestamps) return "";
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "[%H:%M:%S] ", std::localtime(&t));
    return buf;
}

std::optional<StopwordSet> resolve_stopwords(const Options& o) {
    if (o.stopwords == "off") return std::nullopt;
    if (o.stopwords == "auto") {
        if (o.h >= 2) return builtin_stopwords();  // phrase mode trains without stop words
        return std::nullopt;
    }
    if (o.stopwords == "builtin") return builtin_stopwords();
    return load_stopwords(o.stopwords);
}

Corpus load_corpus_checked(const Options& o) {
    if (o.corpus_path.empty()) throw std::runtime_error("--corpus is required");
    auto stopwords = resolve_stopwords(o);
    LoadStats stats;
    Corpus corpus =
        load_labeled_corpus(o.corpus_path, stopwords ? &*stopwords : nullptr, o.min_tokens, &stats);
    if (stats.skipped_empty || stats.skipped_short)
        std::cerr << diag_prefix(o) << "skipped " << stats.skipped_empty << " empty and "
                  << stats.skipped_short << " short texts at load\n";
    return corpus;
}

EmbeddingTable make_table(const Options& o, int dim) {
    if (o.random_embeddings) return EmbeddingTable(dim, o.seed);
    if (o.embeddings_path.empty())
        throw std::runtime_error("--embeddings is required unless --random-embeddings is set");
    EmbeddingTable table = load_embeddings(
        o.embeddings_path,
        o.embeddings_format == "text" ? EmbeddingFormat::Text : EmbeddingFormat::Binary, o.seed);
    std::cerr << diag_prefix(o) << "loaded " << table.vocab_size()
              << " embeddings, dim=" << table.dim() << "\n";
    return table;
}

ModelConfig make_config(const Options& o, const std::vector<std::string>& classes) {
    ModelConfig cfg;
    cfg.m = o.m;
    cfg.h = o.h;
    cfg.d = o.d;
    cfg.classes = classes;
    cfg.pooling = pooling_from_string(o.pooling);
    cfg.nonlinearity = nonlinearity_from_string(o.nonlinearity);
    cfg.lr = o.lr;
    cfg.l2 = o.l2;
    cfg.epochs = o.epochs;
    cfg.seed = o.seed;
    cfg.finetune_embeddings = o.finetune_embeddings;
    return cfg;
}

std::string join(const std::vector<std::string>& v, char sep) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i];
    }
    return out;
}

std::string fmt6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

void echo_config(std::ostream& out, const ModelConfig& cfg, const Options& o) {
    out << "config m=" << cfg.m << " h=" << cfg.h << " d=" << cfg.d
        << " pooling=" << to_string(cfg.pooling) << " nonlinearity=" << to_string(cfg.nonlinearity)
        << " lr=" << cfg.lr << " l2=" << cfg.l2 << " epochs=" << cfg.epochs << " seed=" << cfg.seed
        << " classes=" << join(cfg.classes, ',') << " stopwords=" << o.stopwords
        << " finetune_embeddings=" << (cfg.finetune_embeddings ? "on" : "off") << "\n";
}

void write_output(const Options& o, const std::string& data) {
    if (o.out_path.empty()) {
        std::cout << data;
        return;
    }
    std::ofstream out(o.out_path);
    if (!out) throw std::runtime_error("cannot write output file: " + o.out_path);
    out << data;
}

MetricOptions make_metric_options(const Options& o) {
    MetricOptions mo;
    mo.dedupe = o.dedupe == "on";
    mo.denominator_always_k = o.acc_denom == "k";
    mo.only_texts_with_gold = o.eval_texts == "with-gold";
    mo.macro = o.averaging == "macro";
    return mo;
}

int cmd_train(const Options& o) {
    if (o.model_path.empty()) throw std::runtime_error("train: --model output path is required");
    Corpus corpus = load_corpus_checked(o);
    EmbeddingTable table = make_table(o, o.d);
    if (table.dim() != o.d)
        throw std::runtime_error("embedding file dimension " + std::to_string(table.dim()) +
                                 " does not match --d " + std::to_string(o.d));
    ModelConfig cfg = make_config(o, corpus.classes);
    echo_config(std::cout, cfg, o);
    CnnModel model = train(corpus, table, cfg, [&](const EpochStats& s) {
        std::cout << "epoch " << s.epoch << "/" << cfg.epochs << " loss=" << fmt6(s.mean_loss)
                  << " acc=" << fmt6(s.train_accuracy) << " skipped_short=" << s.skipped_short
                  << "\n";
    });
    save_model(model, o.model_path);
    std::cout << "saved model to " << o.model_path << "\n";
    return 0;
}

int cmd_extract(const Options& o) {
    if (o.model_path.empty()) throw std::runtime_error("extract: --model is required");
    CnnModel model = load_model(o.model_path);

    Options adjusted = o;
    adjusted.h = model.config.h;  // stop-word auto mode follows the trained width
    auto stopwords = resolve_stopwords(adjusted);

    std::vector<TokenizedText> texts;
    if (o.unlabeled) {
        if (o.corpus_path.empty()) throw std::runtime_error("extract: --corpus is required");
        LoadStats stats;
        texts = load_unlabeled_texts(o.corpus_path, stopwords ? &*stopwords : nullptr,
                                     o.min_tokens, &stats);
        if (stats.skipped_empty)
            std::cerr << diag_prefix(o) << "skipped " << stats.skipped_empty << " empty lines\n";
    } else {
        Options loader = adjusted;
        texts = load_corpus_checked(loader).texts;
    }

    EmbeddingTable table = make_table(o, model.config.d);
    if (table.dim() != model.config.d)
        throw std::runtime_error("model expects d=" + std::to_string(model.config.d) +
                                 " but embedding table has dim " + std::to_string(table.dim()));

    const ClassSource source = (o.unlabeled || o.class_source == "predicted")
                                   ? ClassSource::Predicted
                                   : ClassSource::Gold;
    const int k = o.ks.empty() ? 5 : o.ks.front();
    const bool dedupe = o.highlight ? false : o.dedupe == "on";
    ExtractionResult result = extract_corpus(model, table, texts, source, k, dedupe);
    if (result.skipped_short)
        std::cerr << diag_prefix(o) << "skipped " << result.skipped_short
                  << " texts shorter than the filter width\n";

    if (o.highlight)
        write_output(o, format_highlight_report(texts, result.records, model.config.h));
    else
        write_output(o, format_extraction_report(
                            model.config.pooling == Pooling::Max ? "SV-MAX" : "SV-AVG",
                            result.records));
    return 0;
}

int run_evaluation(const Options& o, std::vector<Method> methods) {
    if (o.lexicon_path.empty()) throw std::runtime_error("--lexicon is required");
    Corpus corpus = load_corpus_checked(o);
    Lexicon lexicon = load_lexicon(o.lexicon_path);
    EmbeddingTable table = make_table(o, o.d);

    ModelConfig cfg = make_config(o, corpus.classes);
    EvalOptions eopts;
    eopts.folds = o.folds;
    if (!o.ks.empty()) eopts.ks = o.ks;
    eopts.metrics = make_metric_options(o);
    eopts.saliency_norm = o.saliency_norm == "l2" ? SaliencyNorm::L2 : SaliencyNorm::LInf;

    std::vector<MethodReport> reports =
        run_crossval(corpus, table, lexicon, methods, cfg, eopts, &std::cerr);
    std::cout << format_metric_tables(reports);
    if (!o.out_path.empty()) {
        std::ofstream out(o.out_path);
        if (!out) throw std::runtime_error("cannot write output file: " + o.out_path);
        out << format_metric_csv(reports);
        std::cerr << diag_prefix(o) << "wrote CSV to " << o.out_path << "\n";
    }
    return 0;
}

int cmd_evaluate(const Options& o) {
    std::vector<Method> methods;
    for (const auto& name : o.methods) methods.push_back(method_from_string(name));
    if (methods.empty()) methods = {Method::SvAvg};
    return run_evaluation(o, methods);
}

int cmd_compare(const Options& o) {
    std::vector<Method> methods;
    for (const auto& name : o.methods) methods.push_back(method_from_string(name));
    if (methods.empty()) methods = all_methods();
    return run_evaluation(o, methods);
}

int cmd_synth(const Options& o) {
    if (o.out_path.empty()) throw std::runtime_error("synth: --out corpus path is required");
    if (o.lexicon_path.empty()) throw std::runtime_error("synth: --lexicon output path is required");

    SynthSpec spec;
    spec.classes.clear();
    std::string cls;
    for (char c : o.synth_classes) {
        if (c == ',') {
            if (!cls.empty()) spec.classes.push_back(cls);
            cls.clear();
        } else {
            cls.push_back(c);
        }
    }
    if (!cls.empty()) spec.classes.push_back(cls);
    spec.keywords.resize(spec.classes.size());
    for (size_t c = 0; c < spec.classes.size(); ++c)
        for (int i = 0; i < o.keywords_per_class; ++i)
            spec.keywords[c].push_back("kw" + spec.classes[c] + std::to_string(i));
    spec.background_vocab = o.bg_vocab;
    spec.min_len = o.min_len;
    spec.max_len = o.max_len;
    spec.texts_per_class = o.texts_per_class;
    spec.noise = o.noise;
    spec.seed = o.seed;

    auto [corpus, lexicon] = generate_synthetic(spec);
    save_corpus(corpus, o.out_path);
    save_lexicon(lexicon, o.lexicon_path);
    std::cerr << diag_prefix(o) << "wrote " << corpus.texts.size() << " texts to " << o.out_path
              << " and " << lexicon.entries.size() << " lexicon entries to " << o.lexicon_path
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"task-specific word and phrase identification from labeled short texts"};
    app.set_help_flag("--help", "print this help message and exit");
    app.require_subcommand(1);

    Options o;
    auto* train_cmd = app.add_subcommand("train", "train a classifier and save it");
    auto* extract_cmd =
        app.add_subcommand("extract", "score texts with a trained model and report top-k items");
    extract_cmd->add_flag("--unlabeled", o.unlabeled,
                          "input has one raw text per line; scores use the predicted class");
    extract_cmd->add_flag("--highlight", o.highlight,
                          "render each text with selected items marked and rank superscripts");
    auto* evaluate_cmd =
        app.add_subcommand("evaluate", "cross-validate one method against a lexicon");
    auto* compare_cmd =
        app.add_subcommand("compare", "cross-validate all methods against a lexicon");
    auto* synth_cmd =
        app.add_subcommand("synth", "generate a planted-keyword corpus and matching lexicon");
    synth_cmd->add_option("--classes", o.synth_classes, "comma-separated class names");
    synth_cmd->add_option("--keywords-per-class", o.keywords_per_class,
                          "planted keywords per class (named kw<class><i>)");
    synth_cmd->add_option("--texts-per-class", o.texts_per_class, "texts generated per class");
    synth_cmd->add_option("--bg-vocab", o.bg_vocab, "background vocabulary size");
    synth_cmd->add_option("--min-len", o.min_len, "minimum text length");
    synth_cmd->add_option("--max-len", o.max_len, "maximum text length");
    synth_cmd->add_option("--noise", o.noise, "probability a text omits its class keyword");

    for (auto* cmd : {train_cmd, extract_cmd, evaluate_cmd, compare_cmd, synth_cmd})
        add_common_flags(cmd, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return cmd_train(o);
        if (extract_cmd->parsed()) return cmd_extract(o);
        if (evaluate_cmd->parsed()) return cmd_evaluate(o);
        if (compare_cmd->parsed()) return cmd_compare(o);
        if (synth_cmd->parsed()) return cmd_synth(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
