#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fbdforge/distribution.hpp"
#include "fbdforge/program.hpp"
#include "fbdforge/rational.hpp"

namespace fbdforge {

enum class SmoothingMode { none, laplace };

struct Smoothing {
    SmoothingMode mode = SmoothingMode::none;
    Rational alpha{0};

    static Smoothing laplace(Rational alpha) { return {SmoothingMode::laplace, alpha}; }
    bool operator==(const Smoothing&) const = default;
};

using ContinuationCounts = std::map<std::string, std::int64_t>;
using ContextMap = std::map<SymbolSeq, ContinuationCounts>;

// Prefix -> next-symbol counts.
//
// `contexts` is keyed by design prefixes anchored at step 1 (the empty prefix
// holds first-symbol counts). `windows` holds the same statistics for every
// contiguous run of symbols that ends right before a position, regardless of
// where it starts; it is only consulted when a prefix was never observed and
// backoff is enabled.
class TransitionTable {
public:
    TransitionTable() = default;
    TransitionTable(Vocabulary vocab, ContextMap contexts, ContextMap windows,
                    Smoothing smoothing = {}, bool backoff = true);

    const Vocabulary& vocabulary() const noexcept { return vocab_; }
    const ContextMap& contexts() const noexcept { return contexts_; }
    const ContextMap& windows() const noexcept { return windows_; }
    const Smoothing& smoothing() const noexcept { return smoothing_; }
    bool backoff() const noexcept { return backoff_; }

    TransitionTable with_options(Smoothing smoothing, bool backoff) const;

    // Every stored count multiplied by `factor` (> 0).
    TransitionTable scaled(std::int64_t factor) const;

    struct Match {
        SymbolSeq context;
        const ContinuationCounts* counts = nullptr;
        bool anchored = true;
    };

    // Resolves the context used for `prefix`: the anchored prefix itself,
    // else (with backoff) the longest trailing window that was observed,
    // else the empty prefix. Throws UnknownSymbolError for symbols outside
    // the vocabulary and Error for an unseen prefix without backoff.
    Match match(const SymbolSeq& prefix) const;

    // Probability of `candidate` under an already-resolved context.
    Rational probability(const ContinuationCounts& counts, const std::string& candidate) const;

    bool operator==(const TransitionTable& o) const {
        return vocab_ == o.vocab_ && contexts_ == o.contexts_ && windows_ == o.windows_ &&
               smoothing_ == o.smoothing_ && backoff_ == o.backoff_;
    }

private:
    Vocabulary vocab_;
    ContextMap contexts_;
    ContextMap windows_;
    Smoothing smoothing_;
    bool backoff_ = true;
};

// Symbol frequencies over every position of every program. Throws
// InvalidArgument on an empty corpus.
ExactDistribution estimate_prior(const Corpus& corpus);

TransitionTable build_table(const Corpus& corpus, Smoothing smoothing = {}, bool backoff = true);

Rational conditional_prob(const TransitionTable& table, const SymbolSeq& prefix, const std::string& candidate);

struct RankedRecommendation {
    std::vector<std::pair<std::string, Rational>> entries;
    SymbolSeq context_used;
};

// Top-k continuations of `prefix`. An empty prefix ranks the prior.
RankedRecommendation recommend(const TransitionTable& table, const ExactDistribution& prior,
                               const SymbolSeq& prefix, std::size_t k);

// Persistence, version tag "fbdforge-table/1". Prefix keys are the symbols
// joined with U+001F.
void save_table(std::ostream& out, const TransitionTable& table);
TransitionTable load_table(std::istream& in);

}  // namespace fbdforge
