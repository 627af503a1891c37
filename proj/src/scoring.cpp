#include "svcnn/scoring.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace svcnn {

ScoreVector score_vector(const ForwardTrace& trace, const CnnModel& model,
                         const std::string& target_class) {
    const int c = model.class_index(target_class);
    if (c < 0) throw std::invalid_argument("score_vector: unknown class: " + target_class);
    if (trace.feature_vectors.size() != model.filters.size())
        throw std::invalid_argument("score_vector: trace does not match model");

    ScoreVector sv;
    sv.target_class = target_class;
    const Eigen::Index len = trace.feature_vectors.empty() ? 0 : trace.feature_vectors[0].size();
    sv.scores = Eigen::VectorXd::Zero(len);
    for (size_t i = 0; i < trace.feature_vectors.size(); ++i)
        sv.scores += model.softmax_weights(c, static_cast<Eigen::Index>(i)) * trace.feature_vectors[i];
    sv.positions.resize(static_cast<size_t>(len));
    for (Eigen::Index j = 0; j < len; ++j) sv.positions[static_cast<size_t>(j)] = static_cast<int>(j);
    return sv;
}

RankedSelection rank_top_k(const std::vector<std::string>& tokens,
                           const Eigen::Ref<const Eigen::VectorXd>& scores, int k, bool dedupe,
                           int h) {
    if (k < 1) throw std::invalid_argument("rank_top_k: k must be >= 1");
    if (h < 1) throw std::invalid_argument("rank_top_k: h must be >= 1");
    const auto positions = static_cast<size_t>(scores.size());
    if (positions + static_cast<size_t>(h) - 1 != tokens.size())
        throw std::invalid_argument("rank_top_k: score length does not match token count");

    std::vector<int> order(positions);
    for (size_t j = 0; j < positions; ++j) order[j] = static_cast<int>(j);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    auto surface_at = [&](int pos) {
        if (h == 1) return tokens[static_cast<size_t>(pos)];
        std::string s = tokens[static_cast<size_t>(pos)];
        for (int t = 1; t < h; ++t) {
            s += ' ';
            s += tokens[static_cast<size_t>(pos + t)];
        }
        return s;
    };

    RankedSelection sel;
    sel.k = k;
    std::unordered_set<std::string> seen;
    for (int pos : order) {
        if (static_cast<int>(sel.items.size()) >= k) break;
        std::string surface = surface_at(pos);
        if (dedupe && !seen.insert(surface).second) continue;
        sel.items.push_back({std::move(surface), pos, scores[pos]});
    }
    return sel;
}

RankedSelection top_k_words(const TokenizedText& text, const ScoreVector& sv, int k, bool dedupe) {
    return rank_top_k(text.tokens, sv.scores, k, dedupe, 1);
}

RankedSelection top_k_phrases(const TokenizedText& text, const ScoreVector& sv, int k, int h) {
    if (h < 2) throw std::invalid_argument("top_k_phrases: phrase width must be >= 2");
    if (text.tokens.size() < static_cast<size_t>(h))
        throw std::invalid_argument("top_k_phrases: text shorter than phrase width");
    return rank_top_k(text.tokens, sv.scores, k, /*dedupe=*/false, h);
}

ExtractionResult extract_corpus(const CnnModel& model, EmbeddingTable& table,
                                const std::vector<TokenizedText>& texts, ClassSource source,
                                int k, bool dedupe) {
    if (table.dim() != model.config.d)
        throw std::invalid_argument("extract_corpus: embedding table dimension does not match model");
    const int h = model.config.h;
    ExtractionResult result;
    for (const auto& text : texts) {
        if (text.tokens.size() < static_cast<size_t>(h)) {
            ++result.skipped_short;
            continue;
        }
        Eigen::MatrixXd X = text_matrix(table, text.tokens);
        ForwardTrace trace = model.forward(X);
        int pred = 0;
        for (Eigen::Index c = 1; c < trace.probabilities.size(); ++c)
            if (trace.probabilities[c] > trace.probabilities[pred]) pred = static_cast<int>(c);
        const std::string& predicted = model.config.classes[static_cast<size_t>(pred)];

        std::string used;
        if (source == ClassSource::Gold) {
            if (model.class_index(text.label) < 0)
                throw std::invalid_argument("extract_corpus: gold label not in model classes: " +
                                            text.label);
            used = text.label;
        } else {
            used = predicted;
        }

        ScoreVector sv = score_vector(trace, model, used);
        ExtractionRecord rec;
        rec.id = text.id;
        rec.gold = text.label.empty() ? "-" : text.label;
        rec.used_class = used;
        rec.predicted = predicted;
        rec.predicted_prob = trace.probabilities[pred];
        rec.n_tokens = static_cast<int>(text.tokens.size());
        rec.n_positions = static_cast<int>(sv.scores.size());
        rec.tokens = text.tokens;
        rec.selection = rank_top_k(text.tokens, sv.scores, k, dedupe, h);
        result.records.push_back(std::move(rec));
    }
    return result;
}

namespace {

std::string fmt6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

}  // namespace

std::string format_extraction_report(const std::string& method,
                                     const std::vector<ExtractionRecord>& records) {
    std::string out = "#method\tid\tgold\tpredicted\tn\t[position\tscore\tsurface]...\n";
    for (const auto& rec : records) {
        out += method;
        out += '\t';
        out += rec.id;
        out += '\t';
        out += rec.gold;
        out += '\t';
        out += rec.predicted;
        out += '\t';
        out += std::to_string(rec.selection.items.size());
        for (const auto& item : rec.selection.items) {
            out += '\t';
            out += std::to_string(item.position);
            out += '\t';
            out += fmt6(item.score);
            out += '\t';
            out += item.surface;
        }
        out += '\n';
    }
    return out;
}

std::string format_highlight_report(const std::vector<TokenizedText>& texts,
                                    const std::vector<ExtractionRecord>& records, int h) {
    std::unordered_map<std::string, const ExtractionRecord*> by_id;
    for (const auto& rec : records) by_id[rec.id] = &rec;

    std::string out;
    for (const auto& text : texts) {
        auto it = by_id.find(text.id);
        // rank per token position: a token inside several selected windows
        // keeps the best (lowest) rank
        std::vector<int> rank(text.tokens.size(), 0);
        if (it != by_id.end()) {
            const auto& items = it->second->selection.items;
            for (size_t r = 0; r < items.size(); ++r)
                for (int t = 0; t < h; ++t) {
                    auto pos = static_cast<size_t>(items[r].position + t);
                    if (rank[pos] == 0 || static_cast<int>(r) + 1 < rank[pos])
                        rank[pos] = static_cast<int>(r) + 1;
                }
        }
        out += text.id;
        out += '\t';
        if (it != by_id.end()) {
            out += it->second->used_class;
        } else {
            out += "-";
        }
        out += '\t';
        for (size_t j = 0; j < text.tokens.size(); ++j) {
            if (j) out += ' ';
            if (rank[j] > 0) {
                out += '[';
                out += text.tokens[j];
                out += "]^";
                out += std::to_string(rank[j]);
            } else {
                out += text.tokens[j];
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace svcnn
