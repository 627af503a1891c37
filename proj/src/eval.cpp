#include "svcnn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "svcnn/rng.hpp"

namespace svcnn {

std::string method_name(Method m) {
    switch (m) {
        case Method::SvMax: return "SV-MAX";
        case Method::SvAvg: return "SV-AVG";
        case Method::Tfidf: return "TF-IDF";
        case Method::TfidfSoftmax: return "TF-IDF-softmax";
        case Method::SalmapMax: return "SalMap-MAX";
        case Method::SalmapAvg: return "SalMap-AVG";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    std::string norm;
    for (char c : s)
        norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (norm == "sv-max") return Method::SvMax;
    if (norm == "sv-avg") return Method::SvAvg;
    if (norm == "tf-idf" || norm == "tfidf") return Method::Tfidf;
    if (norm == "tf-idf-softmax" || norm == "tfidf-softmax") return Method::TfidfSoftmax;
    if (norm == "salmap-max") return Method::SalmapMax;
    if (norm == "salmap-avg") return Method::SalmapAvg;
    throw std::invalid_argument("unknown method: " + s);
}

std::vector<Method> all_methods() {
    return {Method::SvMax,    Method::SvAvg,     Method::Tfidf,
            Method::TfidfSoftmax, Method::SalmapMax, Method::SalmapAvg};
}

namespace {

// Distinct selected surfaces among the first k items that are lexicon words
// for the record's gold class.
size_t selection_hits(const ExtractionRecord& rec, const Lexicon& lexicon, int k,
                      size_t* taken = nullptr) {
    std::unordered_set<std::string> seen;
    size_t hits = 0, used = 0;
    for (const auto& item : rec.selection.items) {
        if (static_cast<int>(used) >= k) break;
        ++used;
        if (!seen.insert(item.surface).second) continue;
        if (lexicon.matches(item.surface, rec.gold)) ++hits;
    }
    if (taken) *taken = used;
    return hits;
}

size_t gold_words_in_text(const ExtractionRecord& rec, const Lexicon& lexicon) {
    std::unordered_set<std::string> distinct(rec.tokens.begin(), rec.tokens.end());
    size_t n = 0;
    for (const auto& w : distinct)
        if (lexicon.matches(w, rec.gold)) ++n;
    return n;
}

}  // namespace

double accuracy_at_k(const std::vector<ExtractionRecord>& records, const Lexicon& lexicon, int k,
                     const MetricOptions& opts) {
    if (k < 1) throw std::invalid_argument("accuracy_at_k: k must be >= 1");
    double sum = 0.0;
    size_t evaluated = 0;
    for (const auto& rec : records) {
        if (opts.only_texts_with_gold && gold_words_in_text(rec, lexicon) == 0) continue;
        const double denom = opts.denominator_always_k
                                 ? static_cast<double>(k)
                                 : static_cast<double>(std::min(k, rec.n_positions));
        sum += static_cast<double>(selection_hits(rec, lexicon, k)) / denom;
        ++evaluated;
    }
    return evaluated == 0 ? 0.0 : sum / static_cast<double>(evaluated);
}

Prf precision_recall_f1(const std::vector<ExtractionRecord>& records, const Lexicon& lexicon,
                        int k, const MetricOptions& opts) {
    if (k < 1) throw std::invalid_argument("precision_recall_f1: k must be >= 1");

    size_t total_gold = 0;
    for (const auto& rec : records) total_gold += gold_words_in_text(rec, lexicon);
    if (total_gold == 0)
        throw std::runtime_error("precision_recall_f1: no ground-truth word occurs in the corpus; "
                                 "recall is undefined");

    Prf out;
    if (!opts.macro) {
        size_t hits_sum = 0, selected_sum = 0;
        for (const auto& rec : records) {
            size_t taken = 0;
            hits_sum += selection_hits(rec, lexicon, k, &taken);
            selected_sum += taken;
        }
        out.precision = selected_sum == 0
                            ? 0.0
                            : static_cast<double>(hits_sum) / static_cast<double>(selected_sum);
        out.recall = static_cast<double>(hits_sum) / static_cast<double>(total_gold);
    } else {
        double p_sum = 0.0, r_sum = 0.0;
        size_t p_n = 0, r_n = 0;
        for (const auto& rec : records) {
            size_t taken = 0;
            const size_t hits = selection_hits(rec, lexicon, k, &taken);
            p_sum += taken == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(taken);
            ++p_n;
            const size_t gold = gold_words_in_text(rec, lexicon);
            if (gold > 0) {
                r_sum += static_cast<double>(hits) / static_cast<double>(gold);
                ++r_n;
            }
        }
        out.precision = p_n == 0 ? 0.0 : p_sum / static_cast<double>(p_n);
        out.recall = r_n == 0 ? 0.0 : r_sum / static_cast<double>(r_n);
    }
    out.f1 = out.precision + out.recall > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

std::vector<std::pair<std::string, std::vector<WordCount>>> frequency_table(
    const std::vector<ExtractionRecord>& records, size_t top_n) {
    std::map<std::string, std::map<std::string, int>> counts;  // class -> word -> count
    for (const auto& rec : records)
        for (const auto& item : rec.selection.items) ++counts[rec.gold][item.surface];

    std::vector<std::pair<std::string, std::vector<WordCount>>> out;
    for (auto& [cls, words] : counts) {
        std::vector<WordCount> ranked;
        ranked.reserve(words.size());
        for (auto& [word, count] : words) ranked.push_back({word, count});
        std::sort(ranked.begin(), ranked.end(), [](const WordCount& a, const WordCount& b) {
            if (a.count != b.count) return a.count > b.count;
            return a.word < b.word;
        });
        if (ranked.size() > top_n) ranked.resize(top_n);
        out.emplace_back(cls, std::move(ranked));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cross-validation driver

namespace {

bool needs_pooling(const std::vector<Method>& methods, Pooling pooling) {
    for (Method m : methods) {
        if (pooling == Pooling::Max && (m == Method::SvMax || m == Method::SalmapMax)) return true;
        if (pooling == Pooling::Avg && (m == Method::SvAvg || m == Method::SalmapAvg)) return true;
    }
    return false;
}

uint64_t fold_seed(uint64_t base, int fold, uint32_t salt) {
    return rng::mix(base, rng::mix(static_cast<uint64_t>(fold), salt));
}

}  // namespace

std::vector<MethodReport> run_crossval(const Corpus& corpus, EmbeddingTable& table,
                                       const Lexicon& lexicon, const std::vector<Method>& methods,
                                       const ModelConfig& config, const EvalOptions& opts,
                                       std::ostream* diag) {
    if (opts.folds < 2) throw std::invalid_argument("run_crossval: need at least 2 folds");
    if (opts.ks.empty()) throw std::invalid_argument("run_crossval: need at least one k");
    if (lexicon.empty()) throw std::invalid_argument("run_crossval: empty lexicon");
    const int k_max = *std::max_element(opts.ks.begin(), opts.ks.end());

    FoldPlan plan = kfold_split(corpus, opts.folds, config.seed);

    std::vector<MethodReport> reports(methods.size());
    for (size_t mi = 0; mi < methods.size(); ++mi) {
        reports[mi].method = methods[mi];
        reports[mi].ks = opts.ks;
        reports[mi].per_fold.resize(opts.ks.size());
    }

    auto record_fold = [&](MethodReport& report, const std::vector<ExtractionRecord>& records,
                           std::optional<double> class_acc, const std::string& fold_label) {
        report.fold_labels.push_back(fold_label);
        report.fold_accuracy.push_back(class_acc);
        for (size_t ki = 0; ki < opts.ks.size(); ++ki) {
            MetricValues mv;
            mv.accuracy_at_k = accuracy_at_k(records, lexicon, opts.ks[ki], opts.metrics);
            Prf prf = precision_recall_f1(records, lexicon, opts.ks[ki], opts.metrics);
            mv.precision = prf.precision;
            mv.recall = prf.recall;
            mv.f1 = prf.f1;
            report.per_fold[ki].push_back(mv);
        }
    };

    // TF-IDF values are fixed for a given corpus, so it is fitted and scored
    // once on the whole corpus instead of per fold.
    for (size_t mi = 0; mi < methods.size(); ++mi) {
        if (methods[mi] != Method::Tfidf) continue;
        if (diag) *diag << "fitting TF-IDF on the whole corpus\n";
        TfidfModel tfidf = fit_tfidf(corpus);
        ExtractionResult res = extract_tfidf(tfidf, corpus.texts, k_max, opts.metrics.dedupe);
        record_fold(reports[mi], res.records, std::nullopt, "all");
    }

    const bool want_max = needs_pooling(methods, Pooling::Max);
    const bool want_avg = needs_pooling(methods, Pooling::Avg);
    bool any_fold_method = want_max || want_avg;
    for (Method m : methods)
        if (m == Method::TfidfSoftmax) any_fold_method = true;

    for (int fold = 0; any_fold_method && fold < opts.folds; ++fold) {
        Corpus train_split = fold_subset(corpus, plan, fold, /*test=*/false);
        Corpus test_split = fold_subset(corpus, plan, fold, /*test=*/true);
        if (diag) *diag << "fold " << fold << ": train " << train_split.texts.size() << " / test "
                        << test_split.texts.size() << "\n";

        CnnModel cnn_max, cnn_avg;
        if (want_max) {
            ModelConfig cfg = config;
            cfg.classes = corpus.classes;
            cfg.pooling = Pooling::Max;
            cfg.seed = fold_seed(config.seed, fold, 0x6d617831);
            cnn_max = train(train_split, table, cfg);
        }
        if (want_avg) {
            ModelConfig cfg = config;
            cfg.classes = corpus.classes;
            cfg.pooling = Pooling::Avg;
            cfg.seed = fold_seed(config.seed, fold, 0x61766731);
            cnn_avg = train(train_split, table, cfg);
        }

        for (size_t mi = 0; mi < methods.size(); ++mi) {
            MethodReport& report = reports[mi];
            const std::string fold_label = std::to_string(fold);
            switch (methods[mi]) {
                case Method::Tfidf:
                    break;
                case Method::SvMax: {
                    double acc = classification_accuracy(cnn_max, table, test_split.texts);
                    ExtractionResult res = extract_corpus(cnn_max, table, test_split.texts,
                                                          ClassSource::Gold, k_max,
                                                          opts.metrics.dedupe);
                    record_fold(report, res.records, acc, fold_label);
                    break;
                }
                case Method::SvAvg: {
                    double acc = classification_accuracy(cnn_avg, table, test_split.texts);
                    ExtractionResult res = extract_corpus(cnn_avg, table, test_split.texts,
                                                          ClassSource::Gold, k_max,
                                                          opts.metrics.dedupe);
                    record_fold(report, res.records, acc, fold_label);
                    break;
                }
                case Method::SalmapMax: {
                    ExtractionResult res = extract_salmap(cnn_max, table, test_split.texts, k_max,
                                                          opts.metrics.dedupe, opts.saliency_norm);
                    record_fold(report, res.records, std::nullopt, fold_label);
                    break;
                }
                case Method::SalmapAvg: {
                    ExtractionResult res = extract_salmap(cnn_avg, table, test_split.texts, k_max,
                                                          opts.metrics.dedupe, opts.saliency_norm);
                    record_fold(report, res.records, std::nullopt, fold_label);
                    break;
                }
                case Method::TfidfSoftmax: {
                    SoftmaxTrainConfig scfg;
                    scfg.lr = config.lr;
                    scfg.epochs = config.epochs;
                    scfg.l2 = config.l2;
                    scfg.seed = fold_seed(config.seed, fold, 0x73667478);
                    TfidfSoftmaxModel tsm = train_tfidf_softmax(train_split, scfg);
                    double acc = tsm.accuracy(test_split.texts);
                    ExtractionResult res =
                        extract_tfidf_softmax(tsm, test_split.texts, k_max, opts.metrics.dedupe);
                    record_fold(report, res.records, acc, fold_label);
                    break;
                }
            }
        }
    }

    // Per-method means over folds.
    for (auto& report : reports) {
        const size_t n_folds = report.fold_labels.size();
        report.mean.resize(opts.ks.size());
        if (n_folds == 0) continue;
        for (size_t ki = 0; ki < opts.ks.size(); ++ki) {
            MetricValues mean;
            for (const MetricValues& mv : report.per_fold[ki]) {
                mean.accuracy_at_k += mv.accuracy_at_k;
                mean.precision += mv.precision;
                mean.recall += mv.recall;
                mean.f1 += mv.f1;
            }
            const auto n = static_cast<double>(n_folds);
            mean.accuracy_at_k /= n;
            mean.precision /= n;
            mean.recall /= n;
            mean.f1 /= n;
            report.mean[ki] = mean;
        }
        double acc_sum = 0.0;
        size_t acc_n = 0;
        for (const auto& acc : report.fold_accuracy)
            if (acc) {
                acc_sum += *acc;
                ++acc_n;
            }
        if (acc_n > 0) report.classification_accuracy = acc_sum / static_cast<double>(acc_n);
    }
    return reports;
}

// ---------------------------------------------------------------------------
// Output formatting

namespace {

std::string fmt6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

std::string pct(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * x);
    return buf;
}

void append_padded(std::string& out, const std::string& s, size_t width) {
    out += s;
    for (size_t i = s.size(); i < width; ++i) out += ' ';
}

}  // namespace

std::string format_metric_tables(const std::vector<MethodReport>& reports) {
    if (reports.empty()) return "";
    const std::vector<int>& ks = reports.front().ks;
    constexpr size_t kMethodW = 16, kColW = 11;

    std::string out = "== accuracy@k ==\n";
    append_padded(out, "Method", kMethodW);
    append_padded(out, "ClassAcc", kColW);
    for (int k : ks) append_padded(out, "Top-" + std::to_string(k), kColW);
    out += '\n';
    for (const auto& rep : reports) {
        append_padded(out, method_name(rep.method), kMethodW);
        append_padded(out, rep.classification_accuracy ? pct(*rep.classification_accuracy) : "N/A",
                      kColW);
        for (size_t ki = 0; ki < ks.size(); ++ki)
            append_padded(out, pct(rep.mean[ki].accuracy_at_k), kColW);
        out += '\n';
    }

    out += "\n== precision / recall / F1 ==\n";
    append_padded(out, "Method", kMethodW);
    for (int k : ks) {
        append_padded(out, "P@" + std::to_string(k), kColW);
        append_padded(out, "R@" + std::to_string(k), kColW);
        append_padded(out, "F1@" + std::to_string(k), kColW);
    }
    out += '\n';
    for (const auto& rep : reports) {
        append_padded(out, method_name(rep.method), kMethodW);
        for (size_t ki = 0; ki < ks.size(); ++ki) {
            append_padded(out, pct(rep.mean[ki].precision), kColW);
            append_padded(out, pct(rep.mean[ki].recall), kColW);
            append_padded(out, pct(rep.mean[ki].f1), kColW);
        }
        out += '\n';
    }
    return out;
}

std::string format_metric_csv(const std::vector<MethodReport>& reports) {
    std::string out = "method,fold,k,metric,value\n";
    for (const auto& rep : reports) {
        const std::string name = method_name(rep.method);
        for (size_t fi = 0; fi < rep.fold_labels.size(); ++fi) {
            if (rep.fold_accuracy[fi])
                out += name + "," + rep.fold_labels[fi] + ",,classification_accuracy," +
                       fmt6(*rep.fold_accuracy[fi]) + "\n";
            for (size_t ki = 0; ki < rep.ks.size(); ++ki) {
                const std::string prefix =
                    name + "," + rep.fold_labels[fi] + "," + std::to_string(rep.ks[ki]) + ",";
                const MetricValues& mv = rep.per_fold[ki][fi];
                out += prefix + "accuracy_at_k," + fmt6(mv.accuracy_at_k) + "\n";
                out += prefix + "precision," + fmt6(mv.precision) + "\n";
                out += prefix + "recall," + fmt6(mv.recall) + "\n";
                out += prefix + "f1," + fmt6(mv.f1) + "\n";
            }
        }
        if (rep.classification_accuracy)
            out += name + ",mean,,classification_accuracy," + fmt6(*rep.classification_accuracy) +
                   "\n";
        for (size_t ki = 0; ki < rep.ks.size(); ++ki) {
            const std::string prefix = name + ",mean," + std::to_string(rep.ks[ki]) + ",";
            const MetricValues& mv = rep.mean[ki];
            out += prefix + "accuracy_at_k," + fmt6(mv.accuracy_at_k) + "\n";
            out += prefix + "precision," + fmt6(mv.precision) + "\n";
            out += prefix + "recall," + fmt6(mv.recall) + "\n";
            out += prefix + "f1," + fmt6(mv.f1) + "\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

std::pair<Corpus, Lexicon> generate_synthetic(const SynthSpec& spec) {
    if (spec.classes.size() < 2) throw std::invalid_argument("synthetic: need >= 2 classes");
    if (spec.keywords.size() != spec.classes.size())
        throw std::invalid_argument("synthetic: one keyword set per class required");
    if (spec.min_len < 1 || spec.max_len < spec.min_len)
        throw std::invalid_argument("synthetic: bad length range");
    if (spec.texts_per_class < 1) throw std::invalid_argument("synthetic: texts_per_class < 1");
    if (spec.noise < 0.0 || spec.noise >= 1.0)
        throw std::invalid_argument("synthetic: noise must be in [0, 1)");

    size_t keyword_total = 0;
    std::unordered_set<std::string> seen_kw;
    for (const auto& set : spec.keywords) {
        if (set.empty()) throw std::invalid_argument("synthetic: empty keyword set");
        for (const auto& kw : set) {
            if (!seen_kw.insert(kw).second)
                throw std::invalid_argument("synthetic: keyword sets must be disjoint: " + kw);
            ++keyword_total;
        }
    }
    if (static_cast<size_t>(spec.background_vocab) < 2 * keyword_total)
        throw std::invalid_argument(
            "synthetic: background vocabulary must be at least twice the keyword count");

    std::vector<std::string> background(static_cast<size_t>(spec.background_vocab));
    for (size_t i = 0; i < background.size(); ++i) background[i] = "bg" + std::to_string(i);

    auto rng = rng::engine(rng::mix(spec.seed, 0x73796e74 /* "synt" */));
    Corpus corpus;
    corpus.classes = spec.classes;
    Lexicon lexicon;
    for (size_t c = 0; c < spec.classes.size(); ++c)
        for (const auto& kw : spec.keywords[c]) lexicon.entries[kw] = spec.classes[c];

    for (size_t c = 0; c < spec.classes.size(); ++c) {
        for (int t = 0; t < spec.texts_per_class; ++t) {
            const auto len = static_cast<size_t>(
                spec.min_len + static_cast<int>(rng::below(rng, static_cast<uint64_t>(
                                                                    spec.max_len - spec.min_len + 1))));
            TokenizedText text;
            text.label = spec.classes[c];
            text.id = "synth-" + spec.classes[c] + "-" + std::to_string(t);
            text.tokens.reserve(len);
            for (size_t j = 0; j < len; ++j)
                text.tokens.push_back(background[rng::below(rng, background.size())]);
            if (rng::uniform01(rng) >= spec.noise) {
                const auto& kws = spec.keywords[c];
                const auto pos = rng::below(rng, len);
                text.tokens[pos] = kws[rng::below(rng, kws.size())];
            }
            corpus.texts.push_back(std::move(text));
        }
    }
    return {std::move(corpus), std::move(lexicon)};
}

}  // namespace svcnn
