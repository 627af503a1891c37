#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "svcnn/corpus.hpp"
#include "svcnn/embeddings.hpp"
#include "svcnn/nnkernel.hpp"

namespace svcnn {

struct ModelConfig {
    int m = 100;  // filter count
    int h = 1;    // filter width in words
    int d = 300;  // embedding dimension
    std::vector<std::string> classes;
    Pooling pooling = Pooling::Avg;
    Nonlinearity nonlinearity = Nonlinearity::Relu;
    double lr = 0.05;
    int epochs = 25;
    uint64_t seed = 1;
    double l2 = 0.0;
    bool finetune_embeddings = false;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
    size_t skipped_short = 0;
};

using ProgressFn = std::function<void(const EpochStats&)>;

// The classifier: m filters, one pooling, softmax on top. Row c of
// softmax_weights holds the per-filter weights for class c.
struct CnnModel {
    ModelConfig config;
    std::vector<Filter> filters;
    Eigen::MatrixXd softmax_weights;  // |C| x m

    ForwardTrace forward(const Eigen::Ref<const Eigen::MatrixXd>& X) const;
    int class_index(const std::string& label) const;
};

struct Prediction {
    int class_index = 0;
    std::string class_name;
    double probability = 0.0;
};

// Parameters drawn uniformly from [-0.1, 0.1]; deterministic given the seed.
CnnModel init_model(const ModelConfig& config);

// One pass per epoch over the texts in seeded shuffled order, one SGD step
// per text. Texts shorter than h are skipped and counted. Deterministic
// given (corpus order, seed).
CnnModel train(const Corpus& corpus, EmbeddingTable& table, const ModelConfig& config,
               const ProgressFn& progress = {});

Prediction predict(const CnnModel& model, EmbeddingTable& table,
                   const std::vector<std::string>& tokens);

// Fraction of texts predicted correctly; texts shorter than h are excluded
// and counted in *skipped when given.
double classification_accuracy(const CnnModel& model, EmbeddingTable& table,
                               const std::vector<TokenizedText>& texts,
                               size_t* skipped = nullptr);

// Versioned little-endian binary format; see README for the byte layout.
// Round trips are bitwise exact.
void save_model(const CnnModel& model, const std::string& path);
CnnModel load_model(const std::string& path);

}  // namespace svcnn
