#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace svcnn {

// One labeled short text: ordered lowercase tokens plus its class label.
struct TokenizedText {
    std::vector<std::string> tokens;
    std::string label;
    std::string id;
};

struct Corpus {
    std::vector<TokenizedText> texts;
    std::vector<std::string> classes;  // order of first appearance

    int class_index(const std::string& label) const;  // -1 if unknown
};

// Ground-truth task words. A word maps to a class, or to the wildcard
// (nullopt) meaning "task word for any class".
struct Lexicon {
    std::unordered_map<std::string, std::optional<std::string>> entries;

    bool matches(const std::string& word, const std::string& cls) const {
        auto it = entries.find(word);
        if (it == entries.end()) return false;
        return !it->second.has_value() || *it->second == cls;
    }
    bool empty() const { return entries.empty(); }
};

struct FoldPlan {
    int k = 0;
    std::vector<int> assignments;  // per-text fold index in [0, k)
};

using StopwordSet = std::unordered_set<std::string>;

// Bundled English stop list (see data/stopwords_en.txt for the same words).
const StopwordSet& builtin_stopwords();
StopwordSet load_stopwords(const std::string& path);

// Lowercases, strips punctuation from token edges, drops "@"-prefixed tokens
// and (optionally) stop words. Returns an empty sequence for blank input.
std::vector<std::string> tokenize(const std::string& raw,
                                  const StopwordSet* stopwords = nullptr);

struct LoadStats {
    size_t skipped_empty = 0;   // lines whose text tokenized to nothing
    size_t skipped_short = 0;   // below the min_tokens cutoff
};

// File format: UTF-8, one record per line, "label<TAB>raw text".
// Lines starting with '#' are comments; blank lines are ignored.
Corpus load_labeled_corpus(const std::string& path,
                           const StopwordSet* stopwords = nullptr,
                           size_t min_tokens = 1,
                           LoadStats* stats = nullptr);

// One raw text per line, no label column.
std::vector<TokenizedText> load_unlabeled_texts(const std::string& path,
                                                const StopwordSet* stopwords = nullptr,
                                                size_t min_tokens = 1,
                                                LoadStats* stats = nullptr);

void save_corpus(const Corpus& corpus, const std::string& path);

// File format: "word[<TAB>class]" per line; no class means wildcard.
// Duplicate words keep the last entry.
Lexicon load_lexicon(const std::string& path);
void save_lexicon(const Lexicon& lexicon, const std::string& path);

// Seeded shuffle then round-robin assignment; fold sizes differ by <= 1.
FoldPlan kfold_split(const Corpus& corpus, int k, uint64_t seed);

// Texts of `corpus` inside (test) or outside (train) fold `fold`.
// The class set is inherited unchanged so class indices stay stable.
Corpus fold_subset(const Corpus& corpus, const FoldPlan& plan, int fold, bool test);

}  // namespace svcnn
