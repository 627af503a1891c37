#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "svcnn/corpus.hpp"
#include "svcnn/model.hpp"

namespace svcnn {

// Per-position importance scores for one class: scores[j] weights the word
// (h=1) or the h-word window (h>=2) starting at token j.
struct ScoreVector {
    Eigen::VectorXd scores;           // length n - h + 1
    std::string target_class;
    std::vector<int> positions;       // first-token index of each score
};

struct RankedItem {
    std::string surface;  // the word, or h tokens joined by spaces
    int position = 0;     // first-token index
    double score = 0.0;
};

// Items sorted by descending score, ties by ascending position.
struct RankedSelection {
    std::vector<RankedItem> items;
    int k = 0;
};

// scores[j] = sum_i U(c, i) * v_i[j] over the retained feature vectors.
// Independent of the pooling mode given the same trained parameters.
ScoreVector score_vector(const ForwardTrace& trace, const CnnModel& model,
                         const std::string& target_class);

// Shared ranking: sort by score descending (position ascending on ties),
// optionally keep only each surface form's best occurrence, truncate to k.
RankedSelection rank_top_k(const std::vector<std::string>& tokens,
                           const Eigen::Ref<const Eigen::VectorXd>& scores, int k, bool dedupe,
                           int h = 1);

RankedSelection top_k_words(const TokenizedText& text, const ScoreVector& sv, int k, bool dedupe);

// Surface form = h consecutive tokens joined by spaces; windows may overlap.
RankedSelection top_k_phrases(const TokenizedText& text, const ScoreVector& sv, int k, int h);

enum class ClassSource { Gold, Predicted };

// One evaluated text with its ranked selection. Tokens are kept so metric
// code can see which ground-truth words the text contained.
struct ExtractionRecord {
    std::string id;
    std::string gold;        // "-" for unlabeled input
    std::string used_class;  // class the score vector targeted
    std::string predicted;
    double predicted_prob = 0.0;
    int n_tokens = 0;
    int n_positions = 0;  // n - h + 1
    std::vector<std::string> tokens;
    RankedSelection selection;
};

struct ExtractionResult {
    std::vector<ExtractionRecord> records;
    size_t skipped_short = 0;  // texts shorter than the filter width
};

// Runs the model over every text and extracts the Top-k positions scored
// for the gold label (evaluation) or the predicted label (deployment).
ExtractionResult extract_corpus(const CnnModel& model, EmbeddingTable& table,
                                const std::vector<TokenizedText>& texts, ClassSource source,
                                int k, bool dedupe);

// Tab-separated report: method, id, gold, predicted, item count, then
// (position, score, surface) triples. Scores use 6 decimal places.
std::string format_extraction_report(const std::string& method,
                                     const std::vector<ExtractionRecord>& records);

// Tokens rendered in order with every selected position marked and
// superscripted with its 1-based rank, one text per line.
std::string format_highlight_report(const std::vector<TokenizedText>& texts,
                                    const std::vector<ExtractionRecord>& records, int h);

}  // namespace svcnn
