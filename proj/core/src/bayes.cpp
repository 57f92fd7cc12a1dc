#include "fbdforge/bayes.hpp"

#include <algorithm>

#include "fbdforge/errors.hpp"

namespace fbdforge {
namespace {

bool starts_with(const SymbolSeq& seq, const SymbolSeq& prefix) {
    return seq.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), seq.begin());
}

}  // namespace

PrefixFrequencies::PrefixFrequencies(const Corpus& corpus) : corpus_(&corpus) {}

Rational PrefixFrequencies::psi(const SymbolSeq& x, std::size_t population_step) const {
    if (x.size() > population_step) throw InvalidArgument("psi: prefix longer than population step");
    std::int64_t population = 0;
    std::int64_t hits = 0;
    for (const auto& p : corpus_->programs()) {
        if (p.length() < population_step) continue;
        ++population;
        if (starts_with(p.symbols, x)) ++hits;
    }
    if (population == 0) return Rational(0);
    return Rational(hits, population);
}

std::optional<Rational> PrefixFrequencies::likelihood(const SymbolSeq& b, const SymbolSeq& x) const {
    std::int64_t given = 0;
    std::int64_t joint = 0;
    for (const auto& p : corpus_->programs()) {
        if (!starts_with(p.symbols, x)) continue;
        ++given;
        if (starts_with(p.symbols, b)) ++joint;
    }
    if (given == 0) return std::nullopt;
    return Rational(joint, given);
}

std::optional<Rational> bayes_conditional(const PrefixFrequencies& freq, const SymbolSeq& prefix,
                                          const std::string& candidate) {
    const std::size_t step = prefix.size() + 1;
    SymbolSeq extended = prefix;
    extended.push_back(candidate);

    const Rational evidence = freq.psi(prefix, step);
    if (evidence == Rational(0)) return std::nullopt;
    const Rational joint = freq.psi(extended, step);
    if (joint == Rational(0)) return Rational(0);
    auto like = freq.likelihood(prefix, extended);
    if (!like) return std::nullopt;
    return *like * joint / evidence;
}

}  // namespace fbdforge
