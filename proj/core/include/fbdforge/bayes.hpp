#pragma once

#include <cstddef>
#include <optional>

#include "fbdforge/program.hpp"
#include "fbdforge/rational.hpp"

namespace fbdforge {

// Empirical frequencies of design prefixes, computed by scanning programs
// directly. This is the second route to the next-symbol conditional: instead
// of dividing transition counts, it goes through
//
//   Pr(next = a | prefix = b) = Pr(prefix = b | extended = b+a) * psi_i(b+a) / psi_{i-1}(b)
//
// where i = |b| + 1. All psi terms are taken over the programs that reach
// step i, i.e. conditioned on the engineer making another selection.
class PrefixFrequencies {
public:
    explicit PrefixFrequencies(const Corpus& corpus);

    // Fraction of programs of length >= `population_step` whose first
    // |x| symbols equal x. Requires |x| <= population_step.
    Rational psi(const SymbolSeq& x, std::size_t population_step) const;

    // Pr(first |b| symbols = b | first |x| symbols = x) over programs of
    // length >= |x|. nullopt when no program starts with x.
    std::optional<Rational> likelihood(const SymbolSeq& b, const SymbolSeq& x) const;

private:
    const Corpus* corpus_;
};

// nullopt whenever a denominator of the decomposition is zero.
std::optional<Rational> bayes_conditional(const PrefixFrequencies& freq, const SymbolSeq& prefix,
                                          const std::string& candidate);

}  // namespace fbdforge
