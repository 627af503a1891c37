#include <doctest.h>

#include <cmath>

#include "svcnn/eval.hpp"
#include "svcnn/model.hpp"
#include "svcnn/rng.hpp"
#include "test_util.hpp"

using namespace svcnn;

namespace {

ModelConfig small_config() {
    ModelConfig cfg;
    cfg.m = 3;
    cfg.h = 1;
    cfg.d = 4;
    cfg.classes = {"pos", "neg"};
    cfg.pooling = Pooling::Avg;
    cfg.nonlinearity = Nonlinearity::Relu;
    cfg.epochs = 5;
    cfg.seed = 11;
    return cfg;
}

bool models_identical(const CnnModel& a, const CnnModel& b) {
    if (a.filters.size() != b.filters.size()) return false;
    for (size_t i = 0; i < a.filters.size(); ++i) {
        if (a.filters[i].weights != b.filters[i].weights) return false;
        if (a.filters[i].bias != b.filters[i].bias) return false;
    }
    return a.softmax_weights == b.softmax_weights;
}

// Separable planted-keyword corpus plus an all-random embedding table.
struct PlantedFixture {
    Corpus corpus;
    Lexicon lexicon;
    EmbeddingTable table;

    explicit PlantedFixture(int texts_per_class = 150, double noise = 0.0)
        : table(10, 77) {
        SynthSpec spec;
        spec.keywords = {{"kwpos0"}, {"kwneg0"}};
        spec.background_vocab = 40;
        spec.min_len = 4;
        spec.max_len = 8;
        spec.texts_per_class = texts_per_class;
        spec.noise = noise;
        spec.seed = 5;
        auto [c, l] = generate_synthetic(spec);
        corpus = std::move(c);
        lexicon = std::move(l);
    }

    ModelConfig config() {
        ModelConfig cfg;
        cfg.m = 10;
        cfg.h = 1;
        cfg.d = 10;
        cfg.classes = corpus.classes;
        cfg.pooling = Pooling::Avg;
        cfg.lr = 0.1;
        cfg.epochs = 20;
        cfg.seed = 21;
        return cfg;
    }
};

}  // namespace

TEST_CASE("init_model is deterministic with the expected shapes") {
    ModelConfig cfg = small_config();
    CnnModel a = init_model(cfg);
    CnnModel b = init_model(cfg);
    CHECK(models_identical(a, b));

    cfg.seed = 12;
    CnnModel c = init_model(cfg);
    CHECK_FALSE(models_identical(a, c));

    CHECK(a.filters.size() == 3);
    CHECK(a.filters[0].weights.rows() == 1);
    CHECK(a.filters[0].weights.cols() == 4);
    CHECK(a.softmax_weights.rows() == 2);
    CHECK(a.softmax_weights.cols() == 3);
    for (const auto& f : a.filters)
        CHECK(f.weights.cwiseAbs().maxCoeff() <= 0.1);

    ModelConfig bad = cfg;
    bad.m = 0;
    CHECK_THROWS_AS(init_model(bad), std::invalid_argument);
}

TEST_CASE("forward pools the feature vector") {
    ModelConfig cfg = small_config();
    cfg.m = 1;
    cfg.d = 2;
    cfg.nonlinearity = Nonlinearity::Identity;
    CnnModel model = init_model(cfg);
    model.filters[0].weights << 1, 2;
    model.filters[0].bias = 0;
    Eigen::MatrixXd X(3, 2);
    X << 1, 0, 0, 1, 1, 1;  // conv gives [1, 2, 3]

    model.config.pooling = Pooling::Avg;
    ForwardTrace avg = model.forward(X);
    CHECK(avg.representation[0] == doctest::Approx(2.0));
    CHECK(avg.feature_vectors[0].size() == 3);

    model.config.pooling = Pooling::Max;
    ForwardTrace mx = model.forward(X);
    CHECK(mx.representation[0] == doctest::Approx(3.0));
    CHECK(mx.argmax[0] == 2);

    model.softmax_weights.setZero();
    ForwardTrace uniform = model.forward(X);
    CHECK(uniform.probabilities[0] == doctest::Approx(0.5));
    CHECK(uniform.probabilities[1] == doctest::Approx(0.5));
}

TEST_CASE("forward probabilities are normalized and traces complete") {
    auto rng = rng::engine(31);
    ModelConfig cfg = small_config();
    CnnModel model = init_model(cfg);
    for (int iter = 0; iter < 30; ++iter) {
        const auto n = 1 + rng::below(rng, 6);
        Eigen::MatrixXd X(static_cast<Eigen::Index>(n), cfg.d);
        for (Eigen::Index r = 0; r < X.rows(); ++r)
            for (Eigen::Index c = 0; c < X.cols(); ++c) X(r, c) = rng::uniform(rng, -1, 1);
        ForwardTrace trace = model.forward(X);
        CHECK(std::abs(trace.probabilities.sum() - 1.0) <= 1e-12);
        REQUIRE(trace.feature_vectors.size() == static_cast<size_t>(cfg.m));
        for (const auto& v : trace.feature_vectors)
            CHECK(v.size() == X.rows() - cfg.h + 1);
    }
}

TEST_CASE("permuting filters and U columns together leaves probabilities unchanged") {
    ModelConfig cfg = small_config();
    cfg.m = 4;
    CnnModel model = init_model(cfg);
    Eigen::MatrixXd X(3, 4);
    X << 0.2, -0.1, 0.4, 0.3, -0.5, 0.2, 0.1, 0.0, 0.3, 0.3, -0.2, 0.6;
    ForwardTrace before = model.forward(X);

    CnnModel permuted = model;
    const std::vector<int> perm{2, 0, 3, 1};
    for (int i = 0; i < 4; ++i) {
        permuted.filters[static_cast<size_t>(i)] = model.filters[static_cast<size_t>(perm[i])];
        permuted.softmax_weights.col(i) = model.softmax_weights.col(perm[i]);
    }
    ForwardTrace after = permuted.forward(X);
    CHECK((before.probabilities - after.probabilities).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("training separates the planted-keyword corpus") {
    PlantedFixture fx;
    std::vector<EpochStats> history;
    CnnModel model = train(fx.corpus, fx.table, fx.config(),
                           [&](const EpochStats& s) { history.push_back(s); });
    REQUIRE(history.size() == 20);
    CHECK(history.back().train_accuracy >= 0.99);
    CHECK(history[9].mean_loss < history[0].mean_loss);  // strictly lower by epoch 10

    // prediction is pure and lands on the planted class
    Prediction p1 = predict(model, fx.table, {"kwpos0", "bg3", "bg7"});
    Prediction p2 = predict(model, fx.table, {"kwpos0", "bg3", "bg7"});
    CHECK(p1.class_name == "pos");
    CHECK(p1.probability == p2.probability);
    CHECK(predict(model, fx.table, {"bg1", "kwneg0"}).class_name == "neg");
}

TEST_CASE("training is bitwise deterministic") {
    PlantedFixture fx(40);
    ModelConfig cfg = fx.config();
    cfg.epochs = 3;
    EmbeddingTable table2(10, 77);
    CnnModel a = train(fx.corpus, fx.table, cfg);
    CnnModel b = train(fx.corpus, table2, cfg);
    CHECK(models_identical(a, b));
}

TEST_CASE("one small step on one text lowers the loss") {
    EmbeddingTable table(6, 3);
    Corpus corpus;
    corpus.classes = {"a", "b"};
    corpus.texts.push_back({{"w1", "w2", "w3"}, "a", "t0"});

    ModelConfig cfg;
    cfg.m = 2;
    cfg.h = 1;
    cfg.d = 6;
    cfg.classes = corpus.classes;
    cfg.lr = 1e-3;
    cfg.epochs = 1;
    cfg.seed = 9;

    CnnModel before = init_model(cfg);
    Eigen::MatrixXd X = text_matrix(table, corpus.texts[0].tokens);
    const double loss_before = cross_entropy(before.forward(X).probabilities, 0);
    CnnModel after = train(corpus, table, cfg);
    const double loss_after = cross_entropy(after.forward(X).probabilities, 0);
    CHECK(loss_after < loss_before);
}

TEST_CASE("training skips texts shorter than the filter width") {
    EmbeddingTable table(4, 3);
    Corpus corpus;
    corpus.classes = {"a", "b"};
    corpus.texts.push_back({{"only"}, "a", "t0"});  // too short for h=2
    corpus.texts.push_back({{"two", "words"}, "a", "t1"});
    corpus.texts.push_back({{"more", "than", "two"}, "b", "t2"});

    ModelConfig cfg;
    cfg.m = 2;
    cfg.h = 2;
    cfg.d = 4;
    cfg.classes = corpus.classes;
    cfg.epochs = 1;
    cfg.seed = 4;

    size_t reported = 0;
    train(corpus, table, cfg, [&](const EpochStats& s) { reported = s.skipped_short; });
    CHECK(reported == 1);

    Corpus all_short;
    all_short.classes = corpus.classes;
    all_short.texts.push_back({{"x"}, "a", "t0"});
    all_short.texts.push_back({{"y"}, "b", "t1"});
    CHECK_THROWS_AS(train(all_short, table, cfg), std::invalid_argument);
}

TEST_CASE("predict breaks ties by class order") {
    ModelConfig cfg = small_config();
    CnnModel model = init_model(cfg);
    model.softmax_weights.setZero();
    EmbeddingTable table(4, 1);
    Prediction p = predict(model, table, {"anything"});
    CHECK(p.class_index == 0);
    CHECK(p.class_name == "pos");
    CHECK(p.probability == doctest::Approx(0.5));
}

TEST_CASE("model save/load round trip is bitwise exact") {
    TempDir tmp;
    PlantedFixture fx(40);
    ModelConfig cfg = fx.config();
    cfg.epochs = 2;
    cfg.pooling = Pooling::Max;
    cfg.nonlinearity = Nonlinearity::Tanh;
    CnnModel model = train(fx.corpus, fx.table, cfg);
    save_model(model, tmp.file("m.bin"));
    CnnModel back = load_model(tmp.file("m.bin"));

    CHECK(models_identical(model, back));
    CHECK(back.config.classes == model.config.classes);
    CHECK(back.config.pooling == Pooling::Max);
    CHECK(back.config.nonlinearity == Nonlinearity::Tanh);

    // forward outputs bitwise equal on random token sequences
    auto rng = rng::engine(55);
    for (int iter = 0; iter < 20; ++iter) {
        std::vector<std::string> tokens;
        const auto len = 1 + rng::below(rng, 9);
        for (uint64_t j = 0; j < len; ++j)
            tokens.push_back("bg" + std::to_string(rng::below(rng, 40)));
        Eigen::MatrixXd X = text_matrix(fx.table, tokens);
        ForwardTrace a = model.forward(X);
        ForwardTrace b = back.forward(X);
        CHECK(a.probabilities == b.probabilities);
        CHECK(a.representation == b.representation);
    }
}

TEST_CASE("model load rejects corrupt files") {
    TempDir tmp;
    ModelConfig cfg = small_config();
    CnnModel model = init_model(cfg);
    save_model(model, tmp.file("m.bin"));

    // truncate
    std::ifstream in(tmp.file("m.bin"), std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    tmp.write("trunc.bin", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_WITH_AS(load_model(tmp.file("trunc.bin")), doctest::Contains("truncated"),
                         std::runtime_error);

    tmp.write("magic.bin", "NOPE" + bytes.substr(4));
    CHECK_THROWS_WITH_AS(load_model(tmp.file("magic.bin")), doctest::Contains("magic"),
                         std::runtime_error);

    std::string trailing = bytes + "x";
    tmp.write("trail.bin", trailing);
    CHECK_THROWS_WITH_AS(load_model(tmp.file("trail.bin")), doctest::Contains("trailing"),
                         std::runtime_error);

    CHECK_THROWS_AS(load_model(tmp.file("missing.bin")), std::runtime_error);
}

TEST_CASE("dimension mismatch surfaces at extraction time") {
    TempDir tmp;
    ModelConfig cfg = small_config();  // d = 4
    CnnModel model = init_model(cfg);
    save_model(model, tmp.file("m.bin"));
    CnnModel back = load_model(tmp.file("m.bin"));
    EmbeddingTable wrong(7, 1);  // d = 7
    std::vector<TokenizedText> texts{{{"word", "another"}, "pos", "t0"}};
    CHECK_THROWS_WITH_AS(extract_corpus(back, wrong, texts, ClassSource::Gold, 1, true),
                         doctest::Contains("dimension"), std::invalid_argument);
}

TEST_CASE("optional embedding fine-tuning updates the table") {
    PlantedFixture fx(40);
    ModelConfig cfg = fx.config();
    cfg.epochs = 2;
    cfg.finetune_embeddings = true;
    EmbeddingTable frozen(10, 77);
    const Eigen::VectorXd before = frozen.lookup("kwpos0");
    train(fx.corpus, fx.table, cfg);
    const Eigen::VectorXd after = fx.table.lookup("kwpos0");
    CHECK(before != after);  // vectors moved
}
