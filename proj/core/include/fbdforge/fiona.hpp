#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fbdforge/distribution.hpp"
#include "fbdforge/errors.hpp"
#include "fbdforge/program.hpp"
#include "fbdforge/transition_dataset.hpp"

namespace fbdforge::fiona {

using SymbolSet = std::set<std::string>;
using SymbolPair = std::pair<std::string, std::string>;

// Per-iteration exclusion sets e_1..e_k. Iteration i uses e_((i-1) mod k)+1;
// an empty schedule behaves like a single empty set.
class ExclusionSchedule {
public:
    ExclusionSchedule() = default;
    explicit ExclusionSchedule(std::vector<SymbolSet> exclusions) : exclusions_(std::move(exclusions)) {}

    const std::vector<SymbolSet>& exclusions() const noexcept { return exclusions_; }
    std::size_t size() const noexcept { return exclusions_.size(); }

    // 1-based iteration index.
    const SymbolSet& for_iteration(std::size_t i) const;

    // Every name must be in the vocabulary and every set must leave at
    // least two symbols. Throws InvalidArgument / UnknownSymbolError.
    void validate(const Vocabulary& vocab) const;

private:
    std::vector<SymbolSet> exclusions_;
};

// Schedule file: {"exclusions": [["C"], [], ["A","D"]]}
ExclusionSchedule load_schedule(std::istream& in);

// Ordered pairs (a, b), a != b, both outside the exclusion set, sorted
// lexicographically.
struct CandidatePairSet {
    std::vector<SymbolPair> pairs;

    std::size_t size() const noexcept { return pairs.size(); }
    bool empty() const noexcept { return pairs.empty(); }
};

class WeightedPairSet {
public:
    struct Entry {
        SymbolPair pair;
        double prob;
    };

    WeightedPairSet() = default;
    // Throws InvalidArgument unless probabilities are >= 0 and sum to 1
    // within 1e-9.
    explicit WeightedPairSet(std::vector<Entry> entries);

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    const std::vector<double>& cdf() const noexcept { return cdf_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

private:
    std::vector<Entry> entries_;
    std::vector<double> cdf_;
};

enum class DraftMode { chained, free };

struct SequenceDraft {
    SymbolSeq symbols;
    DraftMode mode = DraftMode::chained;
};

class ChainingViolation : public Error {
public:
    using Error::Error;
};

// Throws InvalidArgument when fewer than two symbols survive the exclusion.
CandidatePairSet enumerate_pairs(const Vocabulary& vocab, const SymbolSet& exclusion);

// Pair weight proportional to prior(a) * prior(b), renormalized over the
// surviving pairs. Throws InvalidArgument when every product is zero.
WeightedPairSet weight_pairs(const CandidatePairSet& pairs, const SymbolDistribution& prior);

// Inverse CDF: the first pair whose cumulative probability exceeds u.
const SymbolPair& sample_pair(const WeightedPairSet& weighted, double u);

SequenceDraft tau_extend(SequenceDraft draft, const SymbolPair& pair);

struct ContextDataset {
    std::vector<FbdProgram> programs;
    // by_step[t - 1] holds the step-t transitions of `programs`.
    std::vector<TransitionDataset> by_step;
};

struct ContextDatasetOptions {
    std::size_t n_sequences = 0;
    std::size_t max_len = 2;
    std::uint64_t seed = 0;
    DraftMode mode = DraftMode::chained;
};

// Grows `n_sequences` synthetic programs of exactly `max_len` symbols. Each
// sequence draws from its own generator derived from (seed, index), so the
// result is a pure function of the arguments. Program ids are
// "fiona-<seed>-<index>".
ContextDataset build_context_dataset(const Vocabulary& vocab, const ExclusionSchedule& schedule,
                                     const SymbolDistribution& prior, const ContextDatasetOptions& options);

}  // namespace fbdforge::fiona
