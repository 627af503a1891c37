#include "svcnn/model.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "svcnn/rng.hpp"

namespace svcnn {

void ModelConfig::validate() const {
    if (m < 1) throw std::invalid_argument("config: m must be >= 1");
    if (h < 1) throw std::invalid_argument("config: h must be >= 1");
    if (d < 1) throw std::invalid_argument("config: d must be >= 1");
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("config: lr must be > 0");
    if (l2 < 0.0) throw std::invalid_argument("config: l2 must be >= 0");
    if (classes.size() < 2) throw std::invalid_argument("config: need at least 2 classes");
}

ForwardTrace CnnModel::forward(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
    return forward_cnn(X, filters, softmax_weights, config.pooling, config.nonlinearity);
}

int CnnModel::class_index(const std::string& label) const {
    for (size_t i = 0; i < config.classes.size(); ++i)
        if (config.classes[i] == label) return static_cast<int>(i);
    return -1;
}

CnnModel init_model(const ModelConfig& config) {
    config.validate();
    CnnModel model;
    model.config = config;
    auto rng = rng::engine(rng::mix(config.seed, 0x696e6974 /* "init" */));
    model.filters.reserve(static_cast<size_t>(config.m));
    for (int i = 0; i < config.m; ++i) {
        Filter f;
        f.weights.resize(config.h, config.d);
        for (Eigen::Index r = 0; r < f.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < f.weights.cols(); ++c)
                f.weights(r, c) = rng::uniform(rng, -0.1, 0.1);
        f.bias = rng::uniform(rng, -0.1, 0.1);
        model.filters.push_back(std::move(f));
    }
    const auto n_classes = static_cast<Eigen::Index>(config.classes.size());
    model.softmax_weights.resize(n_classes, config.m);
    for (Eigen::Index r = 0; r < n_classes; ++r)
        for (Eigen::Index c = 0; c < config.m; ++c)
            model.softmax_weights(r, c) = rng::uniform(rng, -0.1, 0.1);
    return model;
}

namespace {

void apply_l2(GradientSet& grads, const CnnModel& model, double l2) {
    if (l2 == 0.0) return;
    for (size_t i = 0; i < model.filters.size(); ++i)
        grads.filter_weights[i] += l2 * model.filters[i].weights;
    grads.softmax_weights += l2 * model.softmax_weights;
}

}  // namespace

CnnModel train(const Corpus& corpus, EmbeddingTable& table, const ModelConfig& config,
               const ProgressFn& progress) {
    config.validate();
    if (corpus.texts.empty()) throw std::invalid_argument("train: empty corpus");
    if (table.dim() != config.d)
        throw std::invalid_argument("train: embedding table dimension does not match config d");

    CnnModel model = init_model(config);
    const size_t h = static_cast<size_t>(config.h);

    std::vector<size_t> trainable;
    for (size_t i = 0; i < corpus.texts.size(); ++i)
        if (corpus.texts[i].tokens.size() >= h) trainable.push_back(i);
    const size_t skipped_short = corpus.texts.size() - trainable.size();
    if (trainable.empty()) throw std::invalid_argument("train: all texts shorter than filter width");

    auto shuffle_rng = rng::engine(rng::mix(config.seed, 0x73687566 /* "shuf" */));
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        rng::shuffle(trainable, shuffle_rng);
        double loss_sum = 0.0;
        size_t correct = 0;
        for (size_t idx : trainable) {
            const TokenizedText& text = corpus.texts[idx];
            const int label = model.class_index(text.label);
            if (label < 0) throw std::invalid_argument("train: label not in class set: " + text.label);
            Eigen::MatrixXd X = text_matrix(table, text.tokens);
            ForwardTrace trace = model.forward(X);
            loss_sum += cross_entropy(trace.probabilities, label);
            Eigen::Index pred = 0;
            trace.probabilities.maxCoeff(&pred);
            if (pred == label) ++correct;
            GradientSet grads =
                backward(X, model.filters, model.softmax_weights, label, config.pooling,
                         config.nonlinearity, trace, config.finetune_embeddings);
            apply_l2(grads, model, config.l2);
            sgd_step(model.filters, model.softmax_weights, grads, config.lr);
            if (config.finetune_embeddings && grads.input) {
                for (size_t j = 0; j < text.tokens.size(); ++j)
                    table.update(text.tokens[j],
                                 -config.lr * grads.input->row(static_cast<Eigen::Index>(j)).transpose());
            }
        }
        if (progress) {
            EpochStats stats;
            stats.epoch = epoch;
            stats.mean_loss = loss_sum / static_cast<double>(trainable.size());
            stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(trainable.size());
            stats.skipped_short = skipped_short;
            progress(stats);
        }
    }
    return model;
}

Prediction predict(const CnnModel& model, EmbeddingTable& table,
                   const std::vector<std::string>& tokens) {
    Eigen::MatrixXd X = text_matrix(table, tokens);
    ForwardTrace trace = model.forward(X);
    int best = 0;
    for (Eigen::Index c = 1; c < trace.probabilities.size(); ++c)
        if (trace.probabilities[c] > trace.probabilities[best]) best = static_cast<int>(c);
    return {best, model.config.classes[static_cast<size_t>(best)], trace.probabilities[best]};
}

double classification_accuracy(const CnnModel& model, EmbeddingTable& table,
                               const std::vector<TokenizedText>& texts, size_t* skipped) {
    size_t evaluated = 0, correct = 0, skip = 0;
    for (const auto& text : texts) {
        if (text.tokens.size() < static_cast<size_t>(model.config.h)) {
            ++skip;
            continue;
        }
        ++evaluated;
        if (predict(model, table, text.tokens).class_name == text.label) ++correct;
    }
    if (skipped) *skipped = skip;
    if (evaluated == 0) return 0.0;
    return static_cast<double>(correct) / static_cast<double>(evaluated);
}

// ---------------------------------------------------------------------------
// Persistence. Little-endian throughout; doubles are stored bit-exact.

namespace {

constexpr char kMagic[4] = {'S', 'V', 'C', 'N'};
constexpr uint16_t kVersion = 1;

void put_bytes(std::ofstream& out, const void* p, size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void put_le(std::ofstream& out, T value) {
    unsigned char buf[sizeof(T)];
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(value);
    for (size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(u >> (8 * i));
    put_bytes(out, buf, sizeof(T));
}

void put_f64(std::ofstream& out, double value) { put_le(out, std::bit_cast<uint64_t>(value)); }

struct Reader {
    std::ifstream in;
    std::string path;

    void get_bytes(void* p, size_t n) {
        if (!in.read(static_cast<char*>(p), static_cast<std::streamsize>(n)))
            throw std::runtime_error(path + ": truncated model file");
    }
    template <typename T>
    T get_le() {
        unsigned char buf[sizeof(T)];
        get_bytes(buf, sizeof(T));
        std::make_unsigned_t<T> u = 0;
        for (size_t i = 0; i < sizeof(T); ++i)
            u |= static_cast<std::make_unsigned_t<T>>(buf[i]) << (8 * i);
        return static_cast<T>(u);
    }
    double get_f64() { return std::bit_cast<double>(get_le<uint64_t>()); }
};

}  // namespace

void save_model(const CnnModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    const ModelConfig& cfg = model.config;
    put_bytes(out, kMagic, 4);
    put_le(out, kVersion);
    put_le(out, static_cast<uint32_t>(cfg.m));
    put_le(out, static_cast<uint32_t>(cfg.h));
    put_le(out, static_cast<uint32_t>(cfg.d));
    put_le(out, static_cast<uint8_t>(cfg.pooling == Pooling::Max ? 0 : 1));
    put_le(out, static_cast<uint8_t>(cfg.nonlinearity == Nonlinearity::Relu ? 0
                                     : cfg.nonlinearity == Nonlinearity::Tanh ? 1 : 2));
    put_f64(out, cfg.lr);
    put_f64(out, cfg.l2);
    put_le(out, static_cast<uint32_t>(cfg.epochs));
    put_le(out, cfg.seed);
    put_le(out, static_cast<uint32_t>(cfg.classes.size()));
    for (const auto& cls : cfg.classes) {
        put_le(out, static_cast<uint32_t>(cls.size()));
        put_bytes(out, cls.data(), cls.size());
    }
    for (const auto& f : model.filters)
        for (Eigen::Index r = 0; r < f.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < f.weights.cols(); ++c) put_f64(out, f.weights(r, c));
    for (const auto& f : model.filters) put_f64(out, f.bias);
    for (Eigen::Index r = 0; r < model.softmax_weights.rows(); ++r)
        for (Eigen::Index c = 0; c < model.softmax_weights.cols(); ++c)
            put_f64(out, model.softmax_weights(r, c));
    if (!out) throw std::runtime_error("write failed: " + path);
}

CnnModel load_model(const std::string& path) {
    Reader r{std::ifstream(path, std::ios::binary), path};
    if (!r.in) throw std::runtime_error("cannot open model file: " + path);

    char magic[4];
    r.get_bytes(magic, 4);
    if (std::string_view(magic, 4) != std::string_view(kMagic, 4))
        throw std::runtime_error(path + ": not a model file (bad magic)");
    const auto version = r.get_le<uint16_t>();
    if (version != kVersion)
        throw std::runtime_error(path + ": unsupported model version " + std::to_string(version));

    ModelConfig cfg;
    cfg.m = static_cast<int>(r.get_le<uint32_t>());
    cfg.h = static_cast<int>(r.get_le<uint32_t>());
    cfg.d = static_cast<int>(r.get_le<uint32_t>());
    const auto pooling = r.get_le<uint8_t>();
    const auto nonlin = r.get_le<uint8_t>();
    if (pooling > 1 || nonlin > 2) throw std::runtime_error(path + ": corrupt model file");
    cfg.pooling = pooling == 0 ? Pooling::Max : Pooling::Avg;
    cfg.nonlinearity = nonlin == 0 ? Nonlinearity::Relu
                       : nonlin == 1 ? Nonlinearity::Tanh : Nonlinearity::Identity;
    cfg.lr = r.get_f64();
    cfg.l2 = r.get_f64();
    cfg.epochs = static_cast<int>(r.get_le<uint32_t>());
    cfg.seed = r.get_le<uint64_t>();
    const auto n_classes = r.get_le<uint32_t>();
    if (n_classes < 2 || n_classes > 1'000'000) throw std::runtime_error(path + ": corrupt model file");
    for (uint32_t i = 0; i < n_classes; ++i) {
        const auto len = r.get_le<uint32_t>();
        if (len > 1'000'000) throw std::runtime_error(path + ": corrupt model file");
        std::string cls(len, '\0');
        r.get_bytes(cls.data(), len);
        cfg.classes.push_back(std::move(cls));
    }
    cfg.validate();

    CnnModel model;
    model.config = cfg;
    model.filters.reserve(static_cast<size_t>(cfg.m));
    for (int i = 0; i < cfg.m; ++i) {
        Filter f;
        f.weights.resize(cfg.h, cfg.d);
        for (Eigen::Index row = 0; row < cfg.h; ++row)
            for (Eigen::Index col = 0; col < cfg.d; ++col) f.weights(row, col) = r.get_f64();
        model.filters.push_back(std::move(f));
    }
    for (int i = 0; i < cfg.m; ++i) model.filters[static_cast<size_t>(i)].bias = r.get_f64();
    model.softmax_weights.resize(static_cast<Eigen::Index>(n_classes), cfg.m);
    for (Eigen::Index row = 0; row < model.softmax_weights.rows(); ++row)
        for (Eigen::Index col = 0; col < model.softmax_weights.cols(); ++col)
            model.softmax_weights(row, col) = r.get_f64();

    if (r.in.peek() != EOF) throw std::runtime_error(path + ": trailing bytes in model file");
    return model;
}

}  // namespace svcnn
