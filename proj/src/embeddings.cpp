#include "svcnn/embeddings.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "svcnn/rng.hpp"

namespace svcnn {

void EmbeddingTable::insert(const std::string& word, Eigen::VectorXd vec) {
    if (vec.size() != dim_)
        throw std::runtime_error("embedding dimension mismatch for word \"" + word + "\"");
    if (!vec.allFinite())
        throw std::runtime_error("non-finite embedding for word \"" + word + "\"");
    vectors_[word] = std::move(vec);
}

const Eigen::VectorXd& EmbeddingTable::lookup(const std::string& word) {
    if (auto it = vectors_.find(word); it != vectors_.end()) return it->second;
    if (auto it = oov_cache_.find(word); it != oov_cache_.end()) return it->second;
    auto rng = rng::engine(rng::mix(oov_seed_, rng::fnv1a(word)));
    Eigen::VectorXd vec(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) vec[i] = rng::uniform(rng, -0.25, 0.25);
    return oov_cache_.emplace(word, std::move(vec)).first->second;
}

void EmbeddingTable::update(const std::string& word, const Eigen::VectorXd& delta) {
    if (delta.size() != dim_) throw std::runtime_error("embedding update dimension mismatch");
    if (auto it = vectors_.find(word); it != vectors_.end()) {
        it->second += delta;
        return;
    }
    lookup(word);  // materialize into the OOV cache
    oov_cache_.find(word)->second += delta;
}

namespace {

bool parse_uint(const std::string& s, uint64_t& out) {
    if (s.empty()) return false;
    uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<uint64_t>(c - '0');
    }
    out = v;
    return true;
}

EmbeddingTable load_text(const std::string& path, uint64_t oov_seed) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embeddings file: " + path);

    std::string line;
    uint64_t declared_count = 0;
    bool has_header = false;
    Eigen::Index dim = 0;

    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty embeddings file");
    {
        std::istringstream iss(line);
        std::vector<std::string> parts;
        std::string p;
        while (iss >> p) parts.push_back(p);
        uint64_t a = 0, b = 0;
        if (parts.size() == 2 && parse_uint(parts[0], a) && parse_uint(parts[1], b)) {
            if (b == 0) throw std::runtime_error(path + ": zero-dimension header");
            has_header = true;
            declared_count = a;
            dim = static_cast<Eigen::Index>(b);
        }
    }

    EmbeddingTable table(dim, oov_seed);
    auto parse_row = [&](const std::string& row) {
        std::istringstream iss(row);
        std::string word;
        if (!(iss >> word)) return;  // blank line
        std::vector<double> vals;
        double v;
        while (iss >> v) vals.push_back(v);
        if (dim == 0) {
            if (vals.empty())
                throw std::runtime_error(path + ": no vector components for word \"" + word + "\"");
            dim = static_cast<Eigen::Index>(vals.size());
            table = EmbeddingTable(dim, oov_seed);
        }
        if (static_cast<Eigen::Index>(vals.size()) != dim)
            throw std::runtime_error(path + ": dimension mismatch for word \"" + word + "\" (got " +
                                     std::to_string(vals.size()) + ", expected " +
                                     std::to_string(dim) + ")");
        table.insert(word, Eigen::Map<Eigen::VectorXd>(vals.data(), dim));
    };

    if (!has_header) parse_row(line);
    while (std::getline(in, line)) parse_row(line);

    if (table.vocab_size() == 0) throw std::runtime_error(path + ": no embeddings loaded");
    if (has_header && declared_count != table.vocab_size())
        std::cerr << "warning: " << path << " header declares " << declared_count << " words, loaded "
                  << table.vocab_size() << "\n";
    return table;
}

EmbeddingTable load_binary(const std::string& path, uint64_t oov_seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open embeddings file: " + path);

    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error(path + ": missing binary header");
    std::istringstream iss(header);
    uint64_t count = 0, dim64 = 0;
    if (!(iss >> count >> dim64)) throw std::runtime_error(path + ": malformed binary header");
    if (dim64 == 0) throw std::runtime_error(path + ": zero-dimension header");
    auto dim = static_cast<Eigen::Index>(dim64);

    EmbeddingTable table(dim, oov_seed);
    std::vector<char> payload(static_cast<size_t>(dim) * 4);
    for (uint64_t w = 0; w < count; ++w) {
        int c = in.get();
        while (c == '\n' || c == '\r' || c == ' ') c = in.get();
        std::string word;
        while (c != ' ' && c != EOF) {
            word.push_back(static_cast<char>(c));
            c = in.get();
        }
        if (c == EOF || word.empty())
            throw std::runtime_error(path + ": truncated binary payload at word " + std::to_string(w));
        if (!in.read(payload.data(), static_cast<std::streamsize>(payload.size())))
            throw std::runtime_error(path + ": truncated binary payload for word \"" + word + "\"");
        Eigen::VectorXd vec(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            const auto* b = reinterpret_cast<const unsigned char*>(payload.data() + i * 4);
            uint32_t bits = static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
                            static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
            vec[i] = static_cast<double>(std::bit_cast<float>(bits));
        }
        table.insert(word, std::move(vec));
    }
    return table;
}

}  // namespace

EmbeddingTable load_embeddings(const std::string& path, EmbeddingFormat format, uint64_t oov_seed) {
    return format == EmbeddingFormat::Text ? load_text(path, oov_seed)
                                           : load_binary(path, oov_seed);
}

Eigen::MatrixXd text_matrix(EmbeddingTable& table, const std::vector<std::string>& tokens) {
    if (tokens.empty()) throw std::invalid_argument("text_matrix: empty token sequence");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(tokens.size()), table.dim());
    for (size_t j = 0; j < tokens.size(); ++j) X.row(static_cast<Eigen::Index>(j)) = table.lookup(tokens[j]);
    return X;
}

}  // namespace svcnn
