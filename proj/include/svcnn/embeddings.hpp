#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace svcnn {

enum class EmbeddingFormat { Text, Binary };

// Word -> d-dimensional vector map. Out-of-vocabulary words get a vector
// with components uniform in [-0.25, 0.25], generated deterministically
// from (oov_seed, word) and cached so repeat queries are bitwise identical.
//
// lookup() mutates the cache: single writer, or warm the cache first.
class EmbeddingTable {
public:
    EmbeddingTable(Eigen::Index dim, uint64_t oov_seed)
        : dim_(dim), oov_seed_(oov_seed) {}

    Eigen::Index dim() const { return dim_; }
    size_t vocab_size() const { return vectors_.size(); }
    uint64_t oov_seed() const { return oov_seed_; }

    void insert(const std::string& word, Eigen::VectorXd vec);
    bool contains(const std::string& word) const { return vectors_.count(word) > 0; }

    const Eigen::VectorXd& lookup(const std::string& word);

    // Adds delta to the stored vector for `word` (materializes the OOV
    // vector first if needed). Used by embedding fine-tuning.
    void update(const std::string& word, const Eigen::VectorXd& delta);

    const std::unordered_map<std::string, Eigen::VectorXd>& vectors() const { return vectors_; }

private:
    Eigen::Index dim_;
    uint64_t oov_seed_;
    std::unordered_map<std::string, Eigen::VectorXd> vectors_;
    std::unordered_map<std::string, Eigen::VectorXd> oov_cache_;
};

// Text format: optional header line "<count> <dim>", then one
// "<word> <f1> ... <fd>" per line.
// Binary format: ASCII header "<count> <dim>\n", then per word the token
// bytes terminated by a single space followed by dim little-endian 32-bit
// IEEE-754 floats, optionally followed by a newline.
EmbeddingTable load_embeddings(const std::string& path, EmbeddingFormat format,
                               uint64_t oov_seed = 0);

// Row j is the embedding of tokens[j]. Throws on an empty token sequence.
Eigen::MatrixXd text_matrix(EmbeddingTable& table, const std::vector<std::string>& tokens);

}  // namespace svcnn
