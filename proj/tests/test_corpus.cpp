#include <doctest.h>

#include <algorithm>
#include <set>

#include "svcnn/corpus.hpp"
#include "svcnn/rng.hpp"
#include "test_util.hpp"

using namespace svcnn;

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

}  // namespace

TEST_CASE("tokenize lowercases and strips punctuation") {
    CHECK(tokenize("Do you need PROOF?") == std::vector<std::string>{"do", "you", "need", "proof"});
}

TEST_CASE("tokenize drops @-mentions and keeps hashtag words") {
    CHECK(tokenize("@user #racism is bad .") == std::vector<std::string>{"racism", "is", "bad"});
}

TEST_CASE("tokenize applies stop words") {
    StopwordSet stop{"the"};
    CHECK(tokenize("the end", &stop) == std::vector<std::string>{"end"});
}

TEST_CASE("tokenize edge cases") {
    CHECK(tokenize("").empty());
    CHECK(tokenize("   \t  ").empty());
    CHECK(tokenize("...  !!!").empty());
    CHECK(tokenize("don't stop-me a.b") == std::vector<std::string>{"don't", "stop-me", "a.b"});
    // untouched interior punctuation, stripped edges
    CHECK(tokenize("\"quoted\" (parens)") == std::vector<std::string>{"quoted", "parens"});
    // unicode whitespace and curly quotes
    CHECK(tokenize("caf\xc3\xa9\xc2\xa0\xe2\x80\x9cword\xe2\x80\x9d") ==
          std::vector<std::string>{"caf\xc3\xa9", "word"});
}

TEST_CASE("tokenize is idempotent on its own output") {
    auto rng = rng::engine(123);
    const std::string charset = "aAzZ09@#.!?'-\xc3\xa9 \t";
    for (int iter = 0; iter < 200; ++iter) {
        std::string raw;
        const auto len = rng::below(rng, 40);
        for (uint64_t i = 0; i < len; ++i) raw += charset[rng::below(rng, charset.size())];
        auto once = tokenize(raw);
        auto twice = tokenize(join_tokens(once));
        CHECK(once == twice);
    }
}

TEST_CASE("load_labeled_corpus parses label<TAB>text lines") {
    TempDir tmp;
    auto path = tmp.write("c.tsv", "pos\tgood fun movie\nneg\tdull mess\n");
    Corpus corpus = load_labeled_corpus(path);
    REQUIRE(corpus.texts.size() == 2);
    CHECK(corpus.classes == std::vector<std::string>{"pos", "neg"});
    CHECK(corpus.texts[0].tokens == std::vector<std::string>{"good", "fun", "movie"});
    CHECK(corpus.texts[1].label == "neg");
    CHECK(corpus.class_index("neg") == 1);
}

TEST_CASE("load_labeled_corpus rejects an empty file") {
    TempDir tmp;
    auto path = tmp.write("empty.tsv", "");
    CHECK_THROWS_WITH_AS(load_labeled_corpus(path), doctest::Contains("no texts"),
                         std::runtime_error);
}

TEST_CASE("load_labeled_corpus keeps texts whose junk tokens disappear") {
    TempDir tmp;
    auto path = tmp.write("c.tsv", "pos\t@u #x\n");
    Corpus corpus = load_labeled_corpus(path);
    REQUIRE(corpus.texts.size() == 1);
    CHECK(corpus.texts[0].tokens == std::vector<std::string>{"x"});
}

TEST_CASE("load_labeled_corpus reports malformed lines by number") {
    TempDir tmp;
    auto path = tmp.write("c.tsv", "pos\tfine here\nbroken line without tab\n");
    CHECK_THROWS_WITH_AS(load_labeled_corpus(path), doctest::Contains(":2:"), std::runtime_error);
}

TEST_CASE("load_labeled_corpus skips comments and counts empty texts") {
    TempDir tmp;
    auto path = tmp.write("c.tsv", "# a comment\npos\tgood stuff\nneg\t...\n\npos\tmore words\n");
    LoadStats stats;
    Corpus corpus = load_labeled_corpus(path, nullptr, 1, &stats);
    CHECK(corpus.texts.size() == 2);
    CHECK(stats.skipped_empty == 1);
}

TEST_CASE("load_labeled_corpus honors the min-token cutoff") {
    TempDir tmp;
    auto path = tmp.write("c.tsv", "pos\tone\nneg\ttwo words here and more\n");
    LoadStats stats;
    Corpus corpus = load_labeled_corpus(path, nullptr, 3, &stats);
    CHECK(corpus.texts.size() == 1);
    CHECK(stats.skipped_short == 1);
}

TEST_CASE("load_lexicon parses word/class pairs") {
    TempDir tmp;
    auto path = tmp.write("lex.tsv", "good\tpos\nbad\tneg\n");
    Lexicon lex = load_lexicon(path);
    CHECK(lex.entries.size() == 2);
    CHECK(lex.matches("good", "pos"));
    CHECK_FALSE(lex.matches("good", "neg"));
    CHECK_FALSE(lex.matches("unknown", "pos"));
}

TEST_CASE("load_lexicon keeps the last duplicate entry") {
    TempDir tmp;
    auto path = tmp.write("lex.tsv", "good\tpos\ngood\tneg\n");
    Lexicon lex = load_lexicon(path);
    CHECK(lex.entries.size() == 1);
    CHECK(lex.matches("good", "neg"));
    CHECK_FALSE(lex.matches("good", "pos"));
}

TEST_CASE("load_lexicon treats a bare word as a wildcard") {
    TempDir tmp;
    auto path = tmp.write("lex.tsv", "savages\n");
    Lexicon lex = load_lexicon(path);
    CHECK(lex.matches("savages", "pos"));
    CHECK(lex.matches("savages", "anything"));
}

TEST_CASE("lexicon round-trips through save and load") {
    TempDir tmp;
    Lexicon lex;
    lex.entries["good"] = "pos";
    lex.entries["bad"] = "neg";
    lex.entries["wild"] = std::nullopt;
    save_lexicon(lex, tmp.file("lex.tsv"));
    Lexicon back = load_lexicon(tmp.file("lex.tsv"));
    CHECK(back.entries == lex.entries);
}

namespace {

Corpus tiny_corpus(size_t n) {
    Corpus corpus;
    corpus.classes = {"a", "b"};
    for (size_t i = 0; i < n; ++i)
        corpus.texts.push_back({{"tok" + std::to_string(i)}, i % 2 ? "a" : "b",
                                "t" + std::to_string(i)});
    return corpus;
}

}  // namespace

TEST_CASE("kfold_split balances folds") {
    Corpus c100 = tiny_corpus(100);
    FoldPlan plan = kfold_split(c100, 10, 42);
    std::vector<int> sizes(10, 0);
    for (int a : plan.assignments) ++sizes[static_cast<size_t>(a)];
    for (int s : sizes) CHECK(s == 10);

    Corpus c101 = tiny_corpus(101);
    FoldPlan plan2 = kfold_split(c101, 10, 42);
    std::vector<int> sizes2(10, 0);
    for (int a : plan2.assignments) ++sizes2[static_cast<size_t>(a)];
    std::sort(sizes2.begin(), sizes2.end());
    CHECK(sizes2.front() == 10);
    CHECK(sizes2.back() == 11);
}

TEST_CASE("kfold_split is deterministic and validates k") {
    Corpus corpus = tiny_corpus(25);
    FoldPlan a = kfold_split(corpus, 5, 7);
    FoldPlan b = kfold_split(corpus, 5, 7);
    CHECK(a.assignments == b.assignments);
    FoldPlan c = kfold_split(corpus, 5, 8);
    CHECK(a.assignments != c.assignments);
    CHECK_THROWS_AS(kfold_split(corpus, 26, 7), std::invalid_argument);
    CHECK_THROWS_AS(kfold_split(corpus, 1, 7), std::invalid_argument);
}

TEST_CASE("folds partition the corpus") {
    Corpus corpus = tiny_corpus(53);
    FoldPlan plan = kfold_split(corpus, 7, 3);
    std::set<std::string> seen;
    size_t total = 0;
    for (int fold = 0; fold < 7; ++fold) {
        Corpus test = fold_subset(corpus, plan, fold, true);
        total += test.texts.size();
        for (const auto& t : test.texts) CHECK(seen.insert(t.id).second);  // pairwise disjoint
        Corpus train = fold_subset(corpus, plan, fold, false);
        CHECK(train.texts.size() + test.texts.size() == corpus.texts.size());
        CHECK(train.classes == corpus.classes);
    }
    CHECK(total == corpus.texts.size());
}

TEST_CASE("corpus round-trips through save and load") {
    TempDir tmp;
    auto path = tmp.write("c.tsv",
                          "pos\tGood, fun (MOVIE)!\nneg\t@user #dull mess...\npos\tanother one\n");
    Corpus corpus = load_labeled_corpus(path);
    save_corpus(corpus, tmp.file("back.tsv"));
    Corpus back = load_labeled_corpus(tmp.file("back.tsv"));
    REQUIRE(back.texts.size() == corpus.texts.size());
    CHECK(back.classes == corpus.classes);
    for (size_t i = 0; i < corpus.texts.size(); ++i) {
        CHECK(back.texts[i].tokens == corpus.texts[i].tokens);
        CHECK(back.texts[i].label == corpus.texts[i].label);
    }
}

TEST_CASE("builtin stop list contains common function words") {
    const StopwordSet& stop = builtin_stopwords();
    CHECK(stop.count("the"));
    CHECK(stop.count("and"));
    CHECK_FALSE(stop.count("racism"));
}
