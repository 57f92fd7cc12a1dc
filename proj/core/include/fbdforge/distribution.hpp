#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fbdforge/rational.hpp"
#include "fbdforge/vocabulary.hpp"

namespace fbdforge {

// Categorical distribution over symbol names, floating point. Entries not
// stored have probability zero. Iteration order is lexicographic by name.
class SymbolDistribution {
public:
    SymbolDistribution() = default;
    // Throws InvalidArgument on negative entries or a total off by > 1e-6.
    explicit SymbolDistribution(std::map<std::string, double> probs);

    static SymbolDistribution uniform(const Vocabulary& vocab);

    double prob(const std::string& symbol) const;
    double total() const;
    const std::map<std::string, double>& probs() const noexcept { return probs_; }
    bool empty() const noexcept { return probs_.empty(); }

    // Highest probability; ties go to the lexicographically smallest name.
    std::optional<std::string> argmax() const;

    // Descending by probability, ties lexicographic. Zero entries are dropped.
    std::vector<std::pair<std::string, double>> ranked() const;

    bool operator==(const SymbolDistribution&) const = default;

private:
    std::map<std::string, double> probs_;
};

// Exact counterpart used by the counting statistics.
class ExactDistribution {
public:
    ExactDistribution() = default;
    // Throws InvalidArgument unless entries are nonnegative and sum to 1.
    explicit ExactDistribution(std::map<std::string, Rational> probs);

    Rational prob(const std::string& symbol) const;
    const std::map<std::string, Rational>& probs() const noexcept { return probs_; }
    bool empty() const noexcept { return probs_.empty(); }

    std::vector<std::pair<std::string, Rational>> ranked() const;
    SymbolDistribution to_double() const;

    bool operator==(const ExactDistribution&) const = default;

private:
    std::map<std::string, Rational> probs_;
};

// Zeroes every symbol outside `allowed` and renormalizes the rest. Returns an
// empty distribution when nothing with positive mass survives.
SymbolDistribution mask_and_renormalize(const SymbolDistribution& dist,
                                        const std::vector<std::string>& allowed);

}  // namespace fbdforge
