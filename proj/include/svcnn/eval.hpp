#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svcnn/baselines.hpp"
#include "svcnn/corpus.hpp"
#include "svcnn/model.hpp"
#include "svcnn/scoring.hpp"

namespace svcnn {

enum class Method { SvMax, SvAvg, Tfidf, TfidfSoftmax, SalmapMax, SalmapAvg };

std::string method_name(Method m);
Method method_from_string(const std::string& s);
std::vector<Method> all_methods();

struct MetricOptions {
    bool dedupe = true;
    bool denominator_always_k = false;  // accuracy@k: divide by k instead of min(k, positions)
    bool only_texts_with_gold = false;  // average accuracy@k only over texts with >= 1 lexicon word
    bool macro = false;                 // macro-averaged precision/recall instead of micro
};

// Mean over texts of |Top-k ∩ T_class| / min(k, positions). Wildcard lexicon
// entries match any class.
double accuracy_at_k(const std::vector<ExtractionRecord>& records, const Lexicon& lexicon, int k,
                     const MetricOptions& opts = {});

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Micro-averaged by default: P = sum(hits)/sum(|selected|),
// R = sum(hits)/sum(|text-words ∩ T|). Throws if the corpus contains no
// ground-truth word at all (recall undefined).
Prf precision_recall_f1(const std::vector<ExtractionRecord>& records, const Lexicon& lexicon,
                        int k, const MetricOptions& opts = {});

struct WordCount {
    std::string word;
    int count = 0;
};

// Per class: words ranked by how often they appear in the texts' Top-k
// lists, ties alphabetical, truncated to top_n.
std::vector<std::pair<std::string, std::vector<WordCount>>> frequency_table(
    const std::vector<ExtractionRecord>& records, size_t top_n);

struct MetricValues {
    double accuracy_at_k = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MethodReport {
    Method method = Method::SvAvg;
    std::vector<int> ks;
    std::optional<double> classification_accuracy;        // mean over folds; absent for
                                                          // feature-selection methods
    std::vector<std::optional<double>> fold_accuracy;     // per fold
    std::vector<std::vector<MetricValues>> per_fold;      // [k index][fold index]
    std::vector<MetricValues> mean;                       // per k
    std::vector<std::string> fold_labels;                 // "0".."9", or "all"
};

struct EvalOptions {
    int folds = 10;
    std::vector<int> ks = {1, 3, 5};
    MetricOptions metrics;
    SaliencyNorm saliency_norm = SaliencyNorm::LInf;
};

// 10-fold protocol: trainable methods are trained per fold and scored on the
// held-out split; the count-based TF-IDF is fitted and scored once on the
// whole corpus. Deterministic given the config seed.
std::vector<MethodReport> run_crossval(const Corpus& corpus, EmbeddingTable& table,
                                       const Lexicon& lexicon, const std::vector<Method>& methods,
                                       const ModelConfig& config, const EvalOptions& opts,
                                       std::ostream* diagnostics = nullptr);

// Aligned tables shaped like the accuracy@k and P/R/F1 summaries.
std::string format_metric_tables(const std::vector<MethodReport>& reports);
// Machine-readable rows: method,fold,k,metric,value
std::string format_metric_csv(const std::vector<MethodReport>& reports);

struct SynthSpec {
    std::vector<std::string> classes = {"pos", "neg"};
    std::vector<std::vector<std::string>> keywords;  // one set per class, disjoint
    int background_vocab = 200;
    int min_len = 8;
    int max_len = 20;
    int texts_per_class = 1000;
    double noise = 0.0;  // probability a text omits its class keyword
    uint64_t seed = 1;
};

// Background tokens are drawn uniformly; with probability 1-noise one class
// keyword replaces the token at a uniform position. The lexicon maps each
// planted keyword to its class.
std::pair<Corpus, Lexicon> generate_synthetic(const SynthSpec& spec);

}  // namespace svcnn
