#include "fbdforge/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fbdforge/errors.hpp"

namespace fbdforge {
namespace {

template <class P>
std::vector<std::pair<std::string, P>> rank_entries(const std::map<std::string, P>& probs) {
    std::vector<std::pair<std::string, P>> out;
    for (const auto& [name, p] : probs) {
        if (p > P(0)) out.emplace_back(name, p);
    }
    // Input is already name-ordered, so a stable sort keeps the lexicographic
    // tie-break.
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

}  // namespace

SymbolDistribution::SymbolDistribution(std::map<std::string, double> probs) : probs_(std::move(probs)) {
    double sum = 0.0;
    for (const auto& [name, p] : probs_) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("invalid probability for '" + name + "'");
        sum += p;
    }
    if (!probs_.empty() && std::abs(sum - 1.0) > 1e-6)
        throw InvalidArgument("distribution sums to " + std::to_string(sum));
}

SymbolDistribution SymbolDistribution::uniform(const Vocabulary& vocab) {
    std::map<std::string, double> probs;
    const double p = 1.0 / static_cast<double>(vocab.size());
    for (const auto& s : vocab.symbols()) probs[s.name] = p;
    return SymbolDistribution(std::move(probs));
}

double SymbolDistribution::prob(const std::string& symbol) const {
    auto it = probs_.find(symbol);
    return it == probs_.end() ? 0.0 : it->second;
}

double SymbolDistribution::total() const {
    double sum = 0.0;
    for (const auto& [_, p] : probs_) sum += p;
    return sum;
}

std::optional<std::string> SymbolDistribution::argmax() const {
    const std::string* best = nullptr;
    double best_p = -1.0;
    for (const auto& [name, p] : probs_) {
        if (p > best_p) {
            best = &name;
            best_p = p;
        }
    }
    if (!best || best_p <= 0.0) return std::nullopt;
    return *best;
}

std::vector<std::pair<std::string, double>> SymbolDistribution::ranked() const { return rank_entries(probs_); }

ExactDistribution::ExactDistribution(std::map<std::string, Rational> probs) : probs_(std::move(probs)) {
    Rational sum(0);
    for (const auto& [name, p] : probs_) {
        if (p < Rational(0)) throw InvalidArgument("negative probability for '" + name + "'");
        sum += p;
    }
    if (!probs_.empty() && sum != Rational(1))
        throw InvalidArgument("exact distribution sums to " + fbdforge::to_string(sum));
}

Rational ExactDistribution::prob(const std::string& symbol) const {
    auto it = probs_.find(symbol);
    return it == probs_.end() ? Rational(0) : it->second;
}

std::vector<std::pair<std::string, Rational>> ExactDistribution::ranked() const { return rank_entries(probs_); }

SymbolDistribution ExactDistribution::to_double() const {
    std::map<std::string, double> probs;
    for (const auto& [name, p] : probs_) probs[name] = fbdforge::to_double(p);
    return SymbolDistribution(std::move(probs));
}

SymbolDistribution mask_and_renormalize(const SymbolDistribution& dist, const std::vector<std::string>& allowed) {
    std::set<std::string> keep(allowed.begin(), allowed.end());
    std::map<std::string, double> kept;
    double mass = 0.0;
    for (const auto& [name, p] : dist.probs()) {
        if (p > 0.0 && keep.count(name)) {
            kept[name] = p;
            mass += p;
        }
    }
    if (kept.empty() || mass <= 0.0) return {};
    for (auto& [_, p] : kept) p /= mass;
    return SymbolDistribution(std::move(kept));
}

}  // namespace fbdforge
