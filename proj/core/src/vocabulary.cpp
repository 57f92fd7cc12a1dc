#include "fbdforge/vocabulary.hpp"

#include <algorithm>
#include <cstdio>

#include "fbdforge/errors.hpp"

namespace fbdforge {

Vocabulary::Vocabulary(std::vector<SymbolDef> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.empty()) throw InvalidArgument("vocabulary is empty");
    std::sort(symbols_.begin(), symbols_.end(),
              [](const SymbolDef& a, const SymbolDef& b) { return a.name < b.name; });
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        if (symbols_[i].name.empty()) throw InvalidArgument("vocabulary contains an empty symbol name");
        if (i > 0 && symbols_[i].name == symbols_[i - 1].name)
            throw InvalidArgument("duplicate symbol '" + symbols_[i].name + "' in vocabulary");
    }
}

Vocabulary Vocabulary::from_names(std::span<const std::string> names) {
    std::vector<SymbolDef> defs;
    defs.reserve(names.size());
    for (const auto& n : names) defs.push_back(SymbolDef{n, std::nullopt, std::nullopt});
    return Vocabulary(std::move(defs));
}

Vocabulary Vocabulary::from_names(std::initializer_list<std::string_view> names) {
    std::vector<std::string> owned(names.begin(), names.end());
    return from_names(std::span<const std::string>(owned));
}

std::vector<std::string> Vocabulary::names() const {
    std::vector<std::string> out;
    out.reserve(symbols_.size());
    for (const auto& s : symbols_) out.push_back(s.name);
    return out;
}

std::optional<std::size_t> Vocabulary::find(std::string_view name) const noexcept {
    auto it = std::lower_bound(symbols_.begin(), symbols_.end(), name,
                               [](const SymbolDef& s, std::string_view n) { return s.name < n; });
    if (it == symbols_.end() || it->name != name) return std::nullopt;
    return static_cast<std::size_t>(it - symbols_.begin());
}

bool Vocabulary::contains(std::string_view name) const noexcept { return find(name).has_value(); }

std::size_t Vocabulary::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw UnknownSymbolError(std::string(name));
}

std::uint64_t Vocabulary::hash() const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (const auto& s : symbols_) {
        for (unsigned char c : s.name) mix(c);
        mix(0x1f);
    }
    return h;
}

std::string Vocabulary::hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

}  // namespace fbdforge
