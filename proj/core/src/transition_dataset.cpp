#include "fbdforge/transition_dataset.hpp"

#include <cmath>

#include "fbdforge/errors.hpp"

namespace fbdforge {

const char* to_string(DataSource source) noexcept {
    switch (source) {
        case DataSource::corpus: return "corpus";
        case DataSource::fiona_context: return "fiona-context";
    }
    return "corpus";
}

void TransitionDataset::validate(const Vocabulary& vocab) const {
    if (!(weight > 0.0) || !std::isfinite(weight)) throw InvalidArgument("dataset weight must be positive");
    for (const auto& item : items) {
        if (item.prefix.size() != step.value())
            throw InvalidArgument("transition prefix length " + std::to_string(item.prefix.size()) +
                                  " does not match step " + std::to_string(step.value()));
        for (const auto& s : item.prefix) {
            if (!vocab.contains(s)) throw UnknownSymbolError(s);
        }
        if (!vocab.contains(item.target)) throw UnknownSymbolError(item.target);
    }
}

TransitionDataset slice_transitions(const Corpus& corpus, DesignStep t, DataSource source) {
    TransitionDataset ds(t, source);
    const auto n = t.value();
    for (const auto& p : corpus.programs()) {
        if (p.length() <= n) continue;
        ds.items.push_back({SymbolSeq(p.symbols.begin(), p.symbols.begin() + static_cast<std::ptrdiff_t>(n)),
                            p.symbols[n]});
    }
    return ds;
}

}  // namespace fbdforge
