#include "svcnn/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "svcnn/nnkernel.hpp"
#include "svcnn/rng.hpp"

namespace svcnn {

int TfidfModel::class_index(const std::string& label) const {
    for (size_t i = 0; i < classes.size(); ++i)
        if (classes[i] == label) return static_cast<int>(i);
    return -1;
}

double TfidfModel::class_score(const std::string& word, int tf_count, size_t text_len,
                               int cls) const {
    const auto& idf_map = per_class_idf[static_cast<size_t>(cls)];
    auto it = idf_map.find(word);
    if (it == idf_map.end()) return 0.0;
    return static_cast<double>(tf_count) / static_cast<double>(text_len) * it->second;
}

Eigen::VectorXd TfidfModel::features(const std::vector<std::string>& tokens) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocabulary.size()));
    for (const auto& tok : tokens) {
        auto it = vocabulary.find(tok);
        if (it != vocabulary.end()) x[it->second] += 1.0;
    }
    x /= static_cast<double>(tokens.size());
    return x.cwiseProduct(idf);
}

TfidfModel fit_tfidf(const Corpus& corpus) {
    if (corpus.texts.empty()) throw std::invalid_argument("fit_tfidf: empty corpus");
    TfidfModel model;
    model.classes = corpus.classes;
    model.per_class_idf.resize(corpus.classes.size());

    // vocabulary indices in first-appearance order keeps everything
    // reproducible across runs
    std::vector<int> df_total;
    std::vector<std::vector<int>> df_class(corpus.classes.size());
    std::vector<size_t> docs_per_class(corpus.classes.size(), 0);
    std::vector<std::string> words;

    for (const auto& text : corpus.texts) {
        const int cls = corpus.class_index(text.label);
        ++docs_per_class[static_cast<size_t>(cls)];
        std::unordered_map<std::string, bool> seen;
        for (const auto& tok : text.tokens) {
            if (seen.count(tok)) continue;
            seen.emplace(tok, true);
            auto [it, inserted] = model.vocabulary.try_emplace(tok, static_cast<int>(words.size()));
            if (inserted) {
                words.push_back(tok);
                df_total.push_back(0);
                for (auto& dc : df_class) dc.push_back(0);
            }
            ++df_total[static_cast<size_t>(it->second)];
            ++df_class[static_cast<size_t>(cls)][static_cast<size_t>(it->second)];
        }
    }

    const auto n_docs = static_cast<double>(corpus.texts.size());
    model.idf.resize(static_cast<Eigen::Index>(words.size()));
    for (size_t w = 0; w < words.size(); ++w)
        model.idf[static_cast<Eigen::Index>(w)] = std::log(n_docs / static_cast<double>(df_total[w]));
    for (size_t c = 0; c < corpus.classes.size(); ++c) {
        const auto n_c = static_cast<double>(docs_per_class[c]);
        for (size_t w = 0; w < words.size(); ++w)
            if (df_class[c][w] > 0)
                model.per_class_idf[c][words[w]] = std::log(n_c / static_cast<double>(df_class[c][w]));
    }
    return model;
}

namespace {

Eigen::VectorXd tfidf_token_scores(const TfidfModel& model, const TokenizedText& text, int cls) {
    std::unordered_map<std::string, int> counts;
    for (const auto& tok : text.tokens) ++counts[tok];
    Eigen::VectorXd scores(static_cast<Eigen::Index>(text.tokens.size()));
    for (size_t j = 0; j < text.tokens.size(); ++j)
        scores[static_cast<Eigen::Index>(j)] =
            model.class_score(text.tokens[j], counts[text.tokens[j]], text.tokens.size(), cls);
    return scores;
}

}  // namespace

RankedSelection tfidf_top_k(const TfidfModel& model, const TokenizedText& text, int k,
                            bool dedupe) {
    const int cls = model.class_index(text.label);
    if (cls < 0) throw std::invalid_argument("tfidf_top_k: unknown class: " + text.label);
    return rank_top_k(text.tokens, tfidf_token_scores(model, text, cls), k, dedupe, 1);
}

int TfidfSoftmaxModel::predict(const std::vector<std::string>& tokens) const {
    Eigen::VectorXd logits = weights * tfidf.features(tokens);
    int best = 0;
    for (Eigen::Index c = 1; c < logits.size(); ++c)
        if (logits[c] > logits[best]) best = static_cast<int>(c);
    return best;
}

double TfidfSoftmaxModel::accuracy(const std::vector<TokenizedText>& texts) const {
    if (texts.empty()) return 0.0;
    size_t correct = 0;
    for (const auto& text : texts) {
        const int cls = tfidf.class_index(text.label);
        if (predict(text.tokens) == cls) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(texts.size());
}

TfidfSoftmaxModel train_tfidf_softmax(const Corpus& corpus, const SoftmaxTrainConfig& config) {
    if (corpus.texts.empty()) throw std::invalid_argument("train_tfidf_softmax: empty corpus");
    TfidfSoftmaxModel model;
    model.tfidf = fit_tfidf(corpus);
    const auto n_classes = static_cast<Eigen::Index>(corpus.classes.size());
    const auto n_feats = static_cast<Eigen::Index>(model.tfidf.vocabulary.size());
    model.weights = Eigen::MatrixXd::Zero(n_classes, n_feats);

    std::vector<size_t> order_pool(corpus.texts.size());
    for (size_t i = 0; i < order_pool.size(); ++i) order_pool[i] = i;
    auto shuffle_rng = rng::engine(rng::mix(config.seed, 0x74666964 /* "tfid" */));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng::shuffle(order_pool, shuffle_rng);
        for (size_t idx : order_pool) {
            const TokenizedText& text = corpus.texts[idx];
            const int label = corpus.class_index(text.label);
            Eigen::VectorXd x = model.tfidf.features(text.tokens);
            Eigen::VectorXd probs = softmax(model.weights * x);
            probs[label] -= 1.0;  // now dL/dlogits
            if (config.l2 > 0.0) model.weights *= (1.0 - config.lr * config.l2);
            model.weights.noalias() -= config.lr * (probs * x.transpose());
        }
    }
    return model;
}

RankedSelection tfidf_softmax_top_k(const TfidfSoftmaxModel& model, const TokenizedText& text,
                                    const std::string& target_class, int k, bool dedupe) {
    const int cls = model.tfidf.class_index(target_class);
    if (cls < 0) throw std::invalid_argument("tfidf_softmax_top_k: unknown class: " + target_class);
    std::unordered_map<std::string, int> counts;
    for (const auto& tok : text.tokens) ++counts[tok];
    Eigen::VectorXd scores(static_cast<Eigen::Index>(text.tokens.size()));
    for (size_t j = 0; j < text.tokens.size(); ++j) {
        const std::string& tok = text.tokens[j];
        auto it = model.tfidf.vocabulary.find(tok);
        double s = 0.0;
        if (it != model.tfidf.vocabulary.end()) {
            const double tfidf = static_cast<double>(counts[tok]) /
                                 static_cast<double>(text.tokens.size()) *
                                 model.tfidf.idf[it->second];
            s = model.weights(cls, it->second) * tfidf;
        }
        scores[static_cast<Eigen::Index>(j)] = s;
    }
    return rank_top_k(text.tokens, scores, k, dedupe, 1);
}

ScoreVector saliency_scores(const CnnModel& model, EmbeddingTable& table,
                            const TokenizedText& text, const std::string& target_class,
                            SaliencyNorm norm) {
    const int cls = model.class_index(target_class);
    if (cls < 0) throw std::invalid_argument("saliency_scores: unknown class: " + target_class);
    if (text.tokens.size() < static_cast<size_t>(model.config.h))
        throw std::invalid_argument("saliency_scores: text shorter than filter");

    Eigen::MatrixXd X = text_matrix(table, text.tokens);
    ForwardTrace trace = model.forward(X);
    Eigen::VectorXd dz = Eigen::VectorXd::Zero(trace.probabilities.size());
    dz[cls] = 1.0;  // differentiate the raw class logit
    GradientSet grads =
        backward_from_logits(X, model.filters, model.softmax_weights, dz, model.config.pooling,
                             model.config.nonlinearity, trace, /*want_input_grad=*/true);

    ScoreVector sv;
    sv.target_class = target_class;
    sv.scores.resize(X.rows());
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
        Eigen::VectorXd row = grads.input->row(j);
        sv.scores[j] = norm == SaliencyNorm::LInf ? row.cwiseAbs().maxCoeff() : row.norm();
    }
    sv.positions.resize(static_cast<size_t>(X.rows()));
    for (Eigen::Index j = 0; j < X.rows(); ++j) sv.positions[static_cast<size_t>(j)] = static_cast<int>(j);
    return sv;
}

namespace {

ExtractionRecord base_record(const TokenizedText& text, const std::string& used_class,
                             int n_positions) {
    ExtractionRecord rec;
    rec.id = text.id;
    rec.gold = text.label.empty() ? "-" : text.label;
    rec.used_class = used_class;
    rec.predicted = "-";
    rec.n_tokens = static_cast<int>(text.tokens.size());
    rec.n_positions = n_positions;
    rec.tokens = text.tokens;
    return rec;
}

}  // namespace

ExtractionResult extract_tfidf(const TfidfModel& model, const std::vector<TokenizedText>& texts,
                               int k, bool dedupe) {
    ExtractionResult result;
    for (const auto& text : texts) {
        if (text.tokens.empty()) {
            ++result.skipped_short;
            continue;
        }
        ExtractionRecord rec = base_record(text, text.label, static_cast<int>(text.tokens.size()));
        rec.selection = tfidf_top_k(model, text, k, dedupe);
        result.records.push_back(std::move(rec));
    }
    return result;
}

ExtractionResult extract_tfidf_softmax(const TfidfSoftmaxModel& model,
                                       const std::vector<TokenizedText>& texts, int k,
                                       bool dedupe) {
    ExtractionResult result;
    for (const auto& text : texts) {
        if (text.tokens.empty()) {
            ++result.skipped_short;
            continue;
        }
        ExtractionRecord rec = base_record(text, text.label, static_cast<int>(text.tokens.size()));
        const int pred = model.predict(text.tokens);
        rec.predicted = model.tfidf.classes[static_cast<size_t>(pred)];
        rec.selection = tfidf_softmax_top_k(model, text, text.label, k, dedupe);
        result.records.push_back(std::move(rec));
    }
    return result;
}

ExtractionResult extract_salmap(const CnnModel& model, EmbeddingTable& table,
                                const std::vector<TokenizedText>& texts, int k, bool dedupe,
                                SaliencyNorm norm) {
    ExtractionResult result;
    for (const auto& text : texts) {
        if (text.tokens.size() < static_cast<size_t>(model.config.h)) {
            ++result.skipped_short;
            continue;
        }
        ScoreVector sv = saliency_scores(model, table, text, text.label, norm);
        ExtractionRecord rec = base_record(text, text.label, static_cast<int>(sv.scores.size()));
        rec.selection = rank_top_k(text.tokens, sv.scores, k, dedupe, 1);
        result.records.push_back(std::move(rec));
    }
    return result;
}

}  // namespace svcnn
