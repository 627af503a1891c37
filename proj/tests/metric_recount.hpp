#pragma once

// Brute-force recount of the evaluation metrics, written as naive per-text
// loops so the eval module has something independent to agree with.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "svcnn/corpus.hpp"
#include "svcnn/scoring.hpp"

namespace recount {

struct Metrics {
    double accuracy_at_k = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline Metrics compute(const std::vector<svcnn::ExtractionRecord>& records,
                       const svcnn::Lexicon& lexicon, int k) {
    double acc_sum = 0.0;
    long hits_total = 0, selected_total = 0, gold_total = 0;
    for (const auto& rec : records) {
        std::set<std::string> chosen;
        int taken = 0;
        for (const auto& item : rec.selection.items) {
            if (taken >= k) break;
            ++taken;
            chosen.insert(item.surface);
        }
        long hits = 0;
        for (const auto& word : chosen)
            if (lexicon.matches(word, rec.gold)) ++hits;

        std::set<std::string> in_text(rec.tokens.begin(), rec.tokens.end());
        long gold = 0;
        for (const auto& word : in_text)
            if (lexicon.matches(word, rec.gold)) ++gold;

        acc_sum += static_cast<double>(hits) /
                   static_cast<double>(std::min(k, rec.n_positions));
        hits_total += hits;
        selected_total += taken;
        gold_total += gold;
    }
    Metrics out;
    out.accuracy_at_k = records.empty() ? 0.0 : acc_sum / static_cast<double>(records.size());
    out.precision = selected_total == 0 ? 0.0
                                        : static_cast<double>(hits_total) /
                                              static_cast<double>(selected_total);
    out.recall =
        gold_total == 0 ? 0.0 : static_cast<double>(hits_total) / static_cast<double>(gold_total);
    out.f1 = out.precision + out.recall > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

}  // namespace recount
