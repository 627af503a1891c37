#include "svcnn/corpus.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace svcnn {

namespace {

// Standard English stop list (Snowball); mirrored in data/stopwords_en.txt.
constexpr const char* kStopwordsEn =
    "i me my myself we our ours ourselves you your yours yourself yourselves "
    "he him his himself she her hers herself it its itself they them their "
    "theirs themselves what which who whom this that these those am is are "
    "was were be been being have has had having do does did doing a an the "
    "and but if or because as until while of at by for with about against "
    "between into through during before after above below to from up down in "
    "out on off over under again further then once here there when where why "
    "how all any both each few more most other some such no nor not only own "
    "same so than too very s t can will just don should now";

}  // namespace

const StopwordSet& builtin_stopwords() {
    static const StopwordSet set = [] {
        StopwordSet s;
        std::istringstream in(kStopwordsEn);
        std::string w;
        while (in >> w) s.insert(w);
        return s;
    }();
    return set;
}

StopwordSet load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stopword file: " + path);
    StopwordSet set;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        for (const auto& tok : tokenize(line)) set.insert(tok);
    }
    return set;
}

}  // namespace svcnn
