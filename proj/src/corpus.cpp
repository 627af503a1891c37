#include "svcnn/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "svcnn/rng.hpp"

namespace svcnn {

namespace {

// Minimal UTF-8 cursor. Invalid bytes are passed through as single
// code points so malformed input degrades gracefully.
uint32_t next_codepoint(const std::string& s, size_t& i) {
    unsigned char b0 = s[i];
    if (b0 < 0x80) { i += 1; return b0; }
    auto cont = [&](size_t j) { return j < s.size() && (static_cast<unsigned char>(s[j]) & 0xc0) == 0x80; };
    if ((b0 & 0xe0) == 0xc0 && cont(i + 1)) {
        uint32_t cp = (b0 & 0x1fu) << 6 | (s[i + 1] & 0x3fu);
        i += 2;
        return cp;
    }
    if ((b0 & 0xf0) == 0xe0 && cont(i + 1) && cont(i + 2)) {
        uint32_t cp = (b0 & 0x0fu) << 12 | (s[i + 1] & 0x3fu) << 6 | (s[i + 2] & 0x3fu);
        i += 3;
        return cp;
    }
    if ((b0 & 0xf8) == 0xf0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
        uint32_t cp = (b0 & 0x07u) << 18 | (s[i + 1] & 0x3fu) << 12 | (s[i + 2] & 0x3fu) << 6 | (s[i + 3] & 0x3fu);
        i += 4;
        return cp;
    }
    i += 1;
    return b0;
}

void append_codepoint(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

bool is_space_cp(uint32_t cp) {
    switch (cp) {
        case ' ': case '\t': case '\n': case '\r': case '\f': case '\v':
        case 0x0085: case 0x00a0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202f: case 0x205f: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200a;
    }
}

bool is_punct_cp(uint32_t cp) {
    if (cp < 0x80) {
        char c = static_cast<char>(cp);
        return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
               (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
    }
    switch (cp) {
        case 0x2018: case 0x2019: case 0x201c: case 0x201d:  // curly quotes
        case 0x2013: case 0x2014: case 0x2026:               // dashes, ellipsis
        case 0x00a1: case 0x00bf: case 0x00ab: case 0x00bb:  // inverted marks, guillemets
            return true;
        default:
            return false;
    }
}

// One whitespace-delimited chunk -> zero or one token.
std::optional<std::string> normalize_token(const std::vector<uint32_t>& cps,
                                           const StopwordSet* stopwords) {
    if (cps.empty()) return std::nullopt;
    if (cps.front() == '@') return std::nullopt;
    size_t lo = 0, hi = cps.size();
    while (lo < hi && is_punct_cp(cps[lo])) ++lo;
    while (hi > lo && is_punct_cp(cps[hi - 1])) --hi;
    if (lo == hi) return std::nullopt;
    std::string out;
    for (size_t i = lo; i < hi; ++i) {
        uint32_t cp = cps[i];
        if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
        append_codepoint(out, cp);
    }
    if (stopwords && stopwords->count(out)) return std::nullopt;
    return out;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& raw, const StopwordSet* stopwords) {
    std::vector<std::string> tokens;
    std::vector<uint32_t> chunk;
    size_t i = 0;
    while (i < raw.size()) {
        uint32_t cp = next_codepoint(raw, i);
        if (is_space_cp(cp)) {
            if (auto tok = normalize_token(chunk, stopwords)) tokens.push_back(std::move(*tok));
            chunk.clear();
        } else {
            chunk.push_back(cp);
        }
    }
    if (auto tok = normalize_token(chunk, stopwords)) tokens.push_back(std::move(*tok));
    return tokens;
}

int Corpus::class_index(const std::string& label) const {
    for (size_t i = 0; i < classes.size(); ++i)
        if (classes[i] == label) return static_cast<int>(i);
    return -1;
}

namespace {

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return in;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

Corpus load_labeled_corpus(const std::string& path, const StopwordSet* stopwords,
                           size_t min_tokens, LoadStats* stats) {
    std::ifstream in = open_or_throw(path);
    Corpus corpus;
    std::unordered_map<std::string, int> seen_class;
    LoadStats local;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed line, expected \"label<TAB>text\"");
        std::string label = line.substr(0, tab);
        std::vector<std::string> tokens = tokenize(line.substr(tab + 1), stopwords);
        if (tokens.empty()) {
            ++local.skipped_empty;
            continue;
        }
        if (tokens.size() < min_tokens) {
            ++local.skipped_short;
            continue;
        }
        if (!seen_class.count(label)) {
            seen_class.emplace(label, static_cast<int>(corpus.classes.size()));
            corpus.classes.push_back(label);
        }
        corpus.texts.push_back({std::move(tokens), std::move(label), "L" + std::to_string(lineno)});
    }
    if (corpus.texts.empty()) throw std::runtime_error(path + ": no texts");
    if (stats) *stats = local;
    return corpus;
}

std::vector<TokenizedText> load_unlabeled_texts(const std::string& path,
                                                const StopwordSet* stopwords,
                                                size_t min_tokens, LoadStats* stats) {
    std::ifstream in = open_or_throw(path);
    std::vector<TokenizedText> texts;
    LoadStats local;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> tokens = tokenize(line, stopwords);
        if (tokens.empty()) {
            ++local.skipped_empty;
            continue;
        }
        if (tokens.size() < min_tokens) {
            ++local.skipped_short;
            continue;
        }
        texts.push_back({std::move(tokens), "", "L" + std::to_string(lineno)});
    }
    if (stats) *stats = local;
    return texts;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& text : corpus.texts) {
        out << text.label << '\t';
        for (size_t i = 0; i < text.tokens.size(); ++i) {
            if (i) out << ' ';
            out << text.tokens[i];
        }
        out << '\n';
    }
}

Lexicon load_lexicon(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    Lexicon lex;
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        size_t tab = line.find('\t');
        std::string word = tab == std::string::npos ? line : line.substr(0, tab);
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (word.empty()) continue;
        std::optional<std::string> cls;
        if (tab != std::string::npos && tab + 1 < line.size()) cls = line.substr(tab + 1);
        lex.entries[word] = std::move(cls);  // last entry wins
    }
    return lex;
}

void save_lexicon(const Lexicon& lexicon, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    std::vector<std::string> words;
    words.reserve(lexicon.entries.size());
    for (const auto& [word, cls] : lexicon.entries) words.push_back(word);
    std::sort(words.begin(), words.end());
    for (const auto& word : words) {
        const auto& cls = lexicon.entries.at(word);
        out << word;
        if (cls) out << '\t' << *cls;
        out << '\n';
    }
}

FoldPlan kfold_split(const Corpus& corpus, int k, uint64_t seed) {
    if (k < 2) throw std::invalid_argument("kfold_split: k must be >= 2");
    size_t n = corpus.texts.size();
    if (static_cast<size_t>(k) > n)
        throw std::invalid_argument("kfold_split: k exceeds text count");
    auto rng = rng::engine(rng::mix(seed, 0x666f6c64 /* "fold" */));
    std::vector<size_t> order = rng::permutation(n, rng);
    FoldPlan plan;
    plan.k = k;
    plan.assignments.assign(n, 0);
    for (size_t pos = 0; pos < n; ++pos)
        plan.assignments[order[pos]] = static_cast<int>(pos % static_cast<size_t>(k));
    return plan;
}

Corpus fold_subset(const Corpus& corpus, const FoldPlan& plan, int fold, bool test) {
    if (plan.assignments.size() != corpus.texts.size())
        throw std::invalid_argument("fold_subset: plan does not match corpus");
    Corpus out;
    out.classes = corpus.classes;
    for (size_t i = 0; i < corpus.texts.size(); ++i)
        if ((plan.assignments[i] == fold) == test) out.texts.push_back(corpus.texts[i]);
    return out;
}

}  // namespace svcnn
