#pragma once

#include <string>
#include <vector>

#include "fbdforge/program.hpp"

namespace fbdforge {

enum class DataSource { corpus, fiona_context };

const char* to_string(DataSource source) noexcept;

struct TransitionItem {
    SymbolSeq prefix;
    std::string target;

    bool operator==(const TransitionItem&) const = default;
};

// (prefix, next symbol) pairs for one design step: every prefix has exactly
// `step` symbols.
struct TransitionDataset {
    explicit TransitionDataset(DesignStep step, DataSource source = DataSource::corpus, double weight = 1.0)
        : step(step), source(source), weight(weight) {}

    DesignStep step;
    std::vector<TransitionItem> items;
    DataSource source;
    // Per-source sample weight. Training multiplies context data by the
    // model spec's context_weight on top of this.
    double weight;

    bool empty() const noexcept { return items.empty(); }
    std::size_t size() const noexcept { return items.size(); }

    // Throws InvalidArgument / UnknownSymbolError on a bad item.
    void validate(const Vocabulary& vocab) const;

    bool operator==(const TransitionDataset&) const = default;
};

// One item per program longer than t: (first t symbols, symbol t+1).
TransitionDataset slice_transitions(const Corpus& corpus, DesignStep t, DataSource source = DataSource::corpus);

}  // namespace fbdforge
