#pragma once

// Shared fixtures and brute-force oracles. Nothing in here calls into the
// statistics code it is used to check.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fbdforge/program.hpp"
#include "fbdforge/rational.hpp"

namespace fbdforge::testing {

inline Corpus c0() {
    return Corpus(Vocabulary::from_names({"AND", "MOVE", "NOT", "OR", "TON"}),
                  {{"P1", {"AND", "OR", "TON"}, std::nullopt},
                   {"P2", {"AND", "OR", "MOVE"}, std::nullopt},
                   {"P3", {"AND", "NOT", "OR"}, std::nullopt}});
}

inline const char* c0_jsonl() {
    return "{\"id\":\"P1\",\"symbols\":[\"AND\",\"OR\",\"TON\"]}\n"
           "{\"id\":\"P2\",\"symbols\":[\"AND\",\"OR\",\"MOVE\"]}\n"
           "{\"id\":\"P3\",\"symbols\":[\"AND\",\"NOT\",\"OR\"]}\n";
}

inline std::vector<std::string> symbol_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::string(1, static_cast<char>('A' + i)));
    return out;
}

// Random corpus: `max_programs` programs of length 1..max_len over the first
// `vocab_size` letters. Every vocabulary symbol is kept in the vocabulary
// even if unused.
inline Corpus random_corpus(std::mt19937_64& rng, std::size_t vocab_size, std::size_t max_programs,
                            std::size_t max_len) {
    const auto names = symbol_names(vocab_size);
    std::uniform_int_distribution<std::size_t> n_programs(1, max_programs);
    std::uniform_int_distribution<std::size_t> length(1, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, vocab_size - 1);
    std::vector<FbdProgram> programs;
    const auto n = n_programs(rng);
    for (std::size_t i = 0; i < n; ++i) {
        FbdProgram p;
        p.id = "R" + std::to_string(i);
        const auto len = length(rng);
        for (std::size_t j = 0; j < len; ++j) p.symbols.push_back(names[pick(rng)]);
        programs.push_back(std::move(p));
    }
    return Corpus(Vocabulary::from_names(names), std::move(programs));
}

// Next-symbol counts following `prefix` at the start of a program.
inline std::map<std::string, std::int64_t> brute_prefix_counts(const Corpus& corpus, const SymbolSeq& prefix) {
    std::map<std::string, std::int64_t> out;
    for (const auto& p : corpus.programs()) {
        if (p.symbols.size() <= prefix.size()) continue;
        if (!std::equal(prefix.begin(), prefix.end(), p.symbols.begin())) continue;
        ++out[p.symbols[prefix.size()]];
    }
    return out;
}

// (argmax symbol, probability) with the lexicographic tie-break.
inline std::pair<std::string, Rational> brute_argmax(const std::map<std::string, std::int64_t>& counts) {
    std::int64_t total = 0;
    for (const auto& [_, n] : counts) total += n;
    std::string best;
    std::int64_t best_n = 0;
    for (const auto& [s, n] : counts) {
        if (n > best_n) {
            best = s;
            best_n = n;
        }
    }
    return {best, Rational(best_n, total)};
}

// All distinct proper prefixes (including the empty one) that occur in the
// corpus and are followed by at least one symbol.
inline std::vector<SymbolSeq> corpus_prefixes(const Corpus& corpus) {
    std::vector<SymbolSeq> out;
    for (const auto& p : corpus.programs()) {
        for (std::size_t t = 0; t < p.symbols.size(); ++t)
            out.emplace_back(p.symbols.begin(), p.symbols.begin() + static_cast<std::ptrdiff_t>(t));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace fbdforge::testing
