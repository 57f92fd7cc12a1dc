#include "fbdforge/fiona.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

#include <json.hpp>

#include "fbdforge/rng.hpp"

namespace fbdforge::fiona {
namespace {

const SymbolSet kNoExclusions;

// Dead-end restarts allowed per sequence before giving up.
constexpr std::size_t kMaxRestarts = 10000;

}  // namespace

const SymbolSet& ExclusionSchedule::for_iteration(std::size_t i) const {
    if (i == 0) throw InvalidArgument("iterations are 1-based");
    if (exclusions_.empty()) return kNoExclusions;
    return exclusions_[(i - 1) % exclusions_.size()];
}

void ExclusionSchedule::validate(const Vocabulary& vocab) const {
    for (std::size_t i = 0; i < exclusions_.size(); ++i) {
        for (const auto& s : exclusions_[i]) {
            if (!vocab.contains(s)) throw UnknownSymbolError(s);
        }
        if (vocab.size() - exclusions_[i].size() < 2)
            throw InvalidArgument("exclusion set " + std::to_string(i + 1) + " leaves fewer than 2 symbols");
    }
    if (vocab.size() < 2) throw InvalidArgument("pair enumeration needs at least 2 symbols");
}

ExclusionSchedule load_schedule(std::istream& in) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, std::string("malformed schedule JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("exclusions") || !j["exclusions"].is_array())
        throw ParseError(0, "schedule must be an object with an 'exclusions' array");
    std::vector<SymbolSet> sets;
    for (std::size_t i = 0; i < j["exclusions"].size(); ++i) {
        const auto& e = j["exclusions"][i];
        if (!e.is_array()) throw ParseError(i + 1, "exclusion " + std::to_string(i + 1) + " must be an array");
        SymbolSet set;
        for (const auto& s : e) {
            if (!s.is_string()) throw ParseError(i + 1, "exclusion " + std::to_string(i + 1) + " must hold strings");
            set.insert(s.get<std::string>());
        }
        sets.push_back(std::move(set));
    }
    return ExclusionSchedule(std::move(sets));
}

WeightedPairSet::WeightedPairSet(std::vector<Entry> entries) : entries_(std::move(entries)) {
    double sum = 0.0;
    cdf_.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (!(e.prob >= 0.0) || !std::isfinite(e.prob)) throw InvalidArgument("pair probabilities must be >= 0");
        sum += e.prob;
        cdf_.push_back(sum);
    }
    if (!entries_.empty()) {
        if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("pair probabilities sum to " + std::to_string(sum));
        cdf_.back() = 1.0;
    }
}

CandidatePairSet enumerate_pairs(const Vocabulary& vocab, const SymbolSet& exclusion) {
    std::vector<const std::string*> survivors;
    for (const auto& s : vocab.symbols()) {
        if (!exclusion.count(s.name)) survivors.push_back(&s.name);
    }
    if (survivors.size() < 2) throw InvalidArgument("exclusion set leaves fewer than 2 symbols");
    CandidatePairSet out;
    out.pairs.reserve(survivors.size() * (survivors.size() - 1));
    for (const auto* a : survivors) {
        for (const auto* b : survivors) {
            if (a != b) out.pairs.emplace_back(*a, *b);
        }
    }
    return out;
}

WeightedPairSet weight_pairs(const CandidatePairSet& pairs, const SymbolDistribution& prior) {
    if (pairs.empty()) throw InvalidArgument("no pairs to weight");
    std::vector<WeightedPairSet::Entry> entries;
    entries.reserve(pairs.size());
    double z = 0.0;
    for (const auto& pr : pairs.pairs) {
        const double w = prior.prob(pr.first) * prior.prob(pr.second);
        entries.push_back({pr, w});
        z += w;
    }
    if (!(z > 0.0)) throw InvalidArgument("prior assigns zero mass to every surviving pair");
    for (auto& e : entries) e.prob /= z;
    return WeightedPairSet(std::move(entries));
}

const SymbolPair& sample_pair(const WeightedPairSet& weighted, double u) {
    if (weighted.empty()) throw InvalidArgument("cannot sample from an empty pair set");
    if (!(u >= 0.0 && u < 1.0)) throw InvalidArgument("u must lie in [0, 1)");
    const auto& cdf = weighted.cdf();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return weighted.entries()[static_cast<std::size_t>(it - cdf.begin())].pair;
}

SequenceDraft tau_extend(SequenceDraft draft, const SymbolPair& pair) {
    auto& s = draft.symbols;
    if (s.empty()) {
        s = {pair.first, pair.second};
        return draft;
    }
    if (draft.mode == DraftMode::chained) {
        if (pair.first != s.back())
            throw ChainingViolation("pair (" + pair.first + ", " + pair.second + ") does not chain onto '" +
                                    s.back() + "'");
        s.push_back(pair.second);
        return draft;
    }
    if (pair.first != s.back()) s.push_back(pair.first);
    s.push_back(pair.second);
    return draft;
}

namespace {

SymbolSeq grow_sequence(const Vocabulary& vocab, const ExclusionSchedule& schedule, const SymbolDistribution& prior,
                        std::size_t max_len, DraftMode mode, SeededGenerator& gen) {
    for (std::size_t restart = 0; restart <= kMaxRestarts; ++restart) {
        SequenceDraft draft{{}, mode};
        bool dead_end = false;
        for (std::size_t iter = 1; draft.symbols.size() < max_len; ++iter) {
            const auto weighted = weight_pairs(enumerate_pairs(vocab, schedule.for_iteration(iter)), prior);
            bool extended = false;
            for (std::size_t attempt = 0; attempt < weighted.size() && !extended; ++attempt) {
                const auto& pair = sample_pair(weighted, gen.uniform01());
                if (mode == DraftMode::chained && !draft.symbols.empty() && pair.first != draft.symbols.back())
                    continue;
                draft = tau_extend(std::move(draft), pair);
                extended = true;
            }
            if (!extended) {
                dead_end = true;
                break;
            }
        }
        if (!dead_end) {
            draft.symbols.resize(max_len);
            return std::move(draft.symbols);
        }
    }
    throw Error("FIONA sequence building kept dead-ending; the exclusion schedule cannot be chained");
}

}  // namespace

ContextDataset build_context_dataset(const Vocabulary& vocab, const ExclusionSchedule& schedule,
                                     const SymbolDistribution& prior, const ContextDatasetOptions& options) {
    if (options.max_len < 2) throw InvalidArgument("max_len must be >= 2");
    schedule.validate(vocab);

    ContextDataset out;
    out.programs.reserve(options.n_sequences);
    for (std::size_t n = 0; n < options.n_sequences; ++n) {
        SeededGenerator gen(derive_seed(options.seed, n));
        FbdProgram p;
        p.id = "fiona-" + std::to_string(options.seed) + "-" + std::to_string(n);
        p.symbols = grow_sequence(vocab, schedule, prior, options.max_len, options.mode, gen);
        out.programs.push_back(std::move(p));
    }
    if (out.programs.empty()) return out;

    const Corpus synthetic(vocab, out.programs);
    for (std::size_t t = 1; t < options.max_len; ++t) {
        out.by_step.push_back(slice_transitions(synthetic, DesignStep(t), DataSource::fiona_context));
    }
    return out;
}

}  // namespace fbdforge::fiona
