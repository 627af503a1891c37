#pragma once

#include <Eigen/Dense>
#include <string>
#include <unordered_map>
#include <vector>

#include "svcnn/corpus.hpp"
#include "svcnn/model.hpp"
#include "svcnn/scoring.hpp"

namespace svcnn {

// Count-based word importance. The per-class idf tables come from
// class-restricted sub-corpora; the whole-corpus idf feeds the softmax
// baseline's feature space. No smoothing: idf(w) = ln(N / df(w)).
struct TfidfModel {
    std::unordered_map<std::string, int> vocabulary;  // word -> feature index
    Eigen::VectorXd idf;                              // whole-corpus, by index
    std::vector<std::string> classes;
    std::vector<std::unordered_map<std::string, double>> per_class_idf;  // by class index

    int class_index(const std::string& label) const;
    // tf(w, text) * idf restricted to the class sub-corpus; 0 for unseen words.
    double class_score(const std::string& word, int tf_count, size_t text_len, int cls) const;
    // Whole-corpus tf-idf feature vector of a text (size |V|).
    Eigen::VectorXd features(const std::vector<std::string>& tokens) const;
};

TfidfModel fit_tfidf(const Corpus& corpus);

// Scores each token by tf(w, text) * idf_class(w) using the text's gold
// class and returns the top k positions.
RankedSelection tfidf_top_k(const TfidfModel& model, const TokenizedText& text, int k,
                            bool dedupe);

struct SoftmaxTrainConfig {
    double lr = 0.05;
    int epochs = 25;
    uint64_t seed = 1;
    double l2 = 0.0;
};

// Linear softmax classifier over whole-corpus tf-idf features; weights are
// zero-initialized and trained by per-text SGD on the cross-entropy loss.
struct TfidfSoftmaxModel {
    TfidfModel tfidf;
    Eigen::MatrixXd weights;  // |C| x |V|

    int predict(const std::vector<std::string>& tokens) const;
    double accuracy(const std::vector<TokenizedText>& texts) const;
};

TfidfSoftmaxModel train_tfidf_softmax(const Corpus& corpus, const SoftmaxTrainConfig& config);

// token score = weights(class, vocab(w)) * tfidf(w, text)
RankedSelection tfidf_softmax_top_k(const TfidfSoftmaxModel& model, const TokenizedText& text,
                                    const std::string& target_class, int k, bool dedupe);

enum class SaliencyNorm { LInf, L2 };

// Gradient of the class logit <u_c, r> with respect to the input matrix;
// the per-word score reduces each gradient row by the chosen norm.
ScoreVector saliency_scores(const CnnModel& model, EmbeddingTable& table,
                            const TokenizedText& text, const std::string& target_class,
                            SaliencyNorm norm = SaliencyNorm::LInf);

// Batch extraction wrappers producing the shared record shape.
ExtractionResult extract_tfidf(const TfidfModel& model, const std::vector<TokenizedText>& texts,
                               int k, bool dedupe);
ExtractionResult extract_tfidf_softmax(const TfidfSoftmaxModel& model,
                                       const std::vector<TokenizedText>& texts, int k, bool dedupe);
ExtractionResult extract_salmap(const CnnModel& model, EmbeddingTable& table,
                                const std::vector<TokenizedText>& texts, int k, bool dedupe,
                                SaliencyNorm norm = SaliencyNorm::LInf);

}  // namespace svcnn
