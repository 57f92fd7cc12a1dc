#include "fbdforge/transition_table.hpp"

#include <algorithm>

#include "fbdforge/errors.hpp"

namespace fbdforge {
namespace {

std::int64_t total_of(const ContinuationCounts& counts) {
    std::int64_t sum = 0;
    for (const auto& [_, n] : counts) sum += n;
    return sum;
}

void check_counts(const Vocabulary& vocab, const ContextMap& map) {
    for (const auto& [prefix, counts] : map) {
        for (const auto& s : prefix) {
            if (!vocab.contains(s)) throw UnknownSymbolError(s);
        }
        for (const auto& [s, n] : counts) {
            if (!vocab.contains(s)) throw UnknownSymbolError(s);
            if (n < 1) throw InvalidArgument("stored transition counts must be >= 1");
        }
    }
}

}  // namespace

TransitionTable::TransitionTable(Vocabulary vocab, ContextMap contexts, ContextMap windows, Smoothing smoothing,
                                 bool backoff)
    : vocab_(std::move(vocab)),
      contexts_(std::move(contexts)),
      windows_(std::move(windows)),
      smoothing_(smoothing),
      backoff_(backoff) {
    if (smoothing_.alpha < Rational(0)) throw InvalidArgument("smoothing alpha must be nonnegative");
    check_counts(vocab_, contexts_);
    check_counts(vocab_, windows_);
}

TransitionTable TransitionTable::with_options(Smoothing smoothing, bool backoff) const {
    TransitionTable t = *this;
    if (smoothing.alpha < Rational(0)) throw InvalidArgument("smoothing alpha must be nonnegative");
    t.smoothing_ = smoothing;
    t.backoff_ = backoff;
    return t;
}

TransitionTable TransitionTable::scaled(std::int64_t factor) const {
    if (factor < 1) throw InvalidArgument("scale factor must be positive");
    TransitionTable t = *this;
    for (auto* map : {&t.contexts_, &t.windows_}) {
        for (auto& [_, counts] : *map) {
            for (auto& [_, n] : counts) n *= factor;
        }
    }
    return t;
}

TransitionTable::Match TransitionTable::match(const SymbolSeq& prefix) const {
    for (const auto& s : prefix) {
        if (!vocab_.contains(s)) throw UnknownSymbolError(s);
    }
    if (auto it = contexts_.find(prefix); it != contexts_.end()) return {prefix, &it->second, true};
    if (!backoff_) throw Error("prefix was never observed and backoff is disabled");

    for (std::size_t len = prefix.size(); len >= 1; --len) {
        SymbolSeq window(prefix.end() - static_cast<std::ptrdiff_t>(len), prefix.end());
        if (auto it = windows_.find(window); it != windows_.end()) return {std::move(window), &it->second, false};
    }
    if (auto it = contexts_.find(SymbolSeq{}); it != contexts_.end()) return {SymbolSeq{}, &it->second, true};
    throw Error("transition table has no empty-prefix context");
}

Rational TransitionTable::probability(const ContinuationCounts& counts, const std::string& candidate) const {
    if (!vocab_.contains(candidate)) throw UnknownSymbolError(candidate);
    auto it = counts.find(candidate);
    const std::int64_t n = it == counts.end() ? 0 : it->second;
    const std::int64_t total = total_of(counts);
    if (smoothing_.mode == SmoothingMode::laplace) {
        const Rational denom = Rational(total) + smoothing_.alpha * static_cast<std::int64_t>(vocab_.size());
        if (denom == Rational(0)) return Rational(1, static_cast<std::int64_t>(vocab_.size()));
        return (Rational(n) + smoothing_.alpha) / denom;
    }
    if (total == 0) return Rational(0);
    return Rational(n, total);
}

ExactDistribution estimate_prior(const Corpus& corpus) {
    if (corpus.empty()) throw InvalidArgument("cannot estimate a prior from an empty corpus");
    std::map<std::string, std::int64_t> counts;
    std::int64_t total = 0;
    for (const auto& p : corpus.programs()) {
        for (const auto& s : p.symbols) {
            ++counts[s];
            ++total;
        }
    }
    std::map<std::string, Rational> probs;
    for (const auto& [s, n] : counts) probs[s] = Rational(n, total);
    return ExactDistribution(std::move(probs));
}

TransitionTable build_table(const Corpus& corpus, Smoothing smoothing, bool backoff) {
    if (corpus.empty()) throw InvalidArgument("cannot build a transition table from an empty corpus");
    ContextMap contexts;
    ContextMap windows;
    for (const auto& p : corpus.programs()) {
        const auto& s = p.symbols;
        for (std::size_t t = 0; t < s.size(); ++t) {
            ++contexts[SymbolSeq(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(t))][s[t]];
            for (std::size_t start = 0; start < t; ++start) {
                ++windows[SymbolSeq(s.begin() + static_cast<std::ptrdiff_t>(start),
                                    s.begin() + static_cast<std::ptrdiff_t>(t))][s[t]];
            }
        }
    }
    return TransitionTable(corpus.vocabulary(), std::move(contexts), std::move(windows), smoothing, backoff);
}

Rational conditional_prob(const TransitionTable& table, const SymbolSeq& prefix, const std::string& candidate) {
    if (!table.vocabulary().contains(candidate)) throw UnknownSymbolError(candidate);
    auto m = table.match(prefix);
    return table.probability(*m.counts, candidate);
}

RankedRecommendation recommend(const TransitionTable& table, const ExactDistribution& prior, const SymbolSeq& prefix,
                               std::size_t k) {
    if (k == 0) throw InvalidArgument("k must be >= 1");
    RankedRecommendation rec;
    std::vector<std::pair<std::string, Rational>> scored;
    if (prefix.empty()) {
        scored = prior.ranked();
    } else {
        auto m = table.match(prefix);
        rec.context_used = m.context;
        for (const auto& name : table.vocabulary().names()) {
            Rational p = table.probability(*m.counts, name);
            if (p > Rational(0)) scored.emplace_back(name, p);
        }
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    }
    if (scored.size() > k) scored.resize(k);
    rec.entries = std::move(scored);
    return rec;
}

}  // namespace fbdforge
