#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fbdforge {

// One FBD design element. Blocks and connectors are not distinguished.
struct SymbolDef {
    std::string name;
    std::optional<std::string> category;
    std::optional<std::string> notes;

    bool operator==(const SymbolDef&) const = default;
};

// The symbol universe. Symbols are kept sorted by name so that every index,
// tie-break and cumulative sum downstream has exactly one ordering.
class Vocabulary {
public:
    Vocabulary() = default;

    // Throws InvalidArgument on an empty list, an empty name or a duplicate.
    explicit Vocabulary(std::vector<SymbolDef> symbols);

    static Vocabulary from_names(std::span<const std::string> names);
    static Vocabulary from_names(std::initializer_list<std::string_view> names);

    std::size_t size() const noexcept { return symbols_.size(); }
    bool empty() const noexcept { return symbols_.empty(); }

    const std::vector<SymbolDef>& symbols() const noexcept { return symbols_; }
    const SymbolDef& operator[](std::size_t i) const { return symbols_[i]; }
    const std::string& name(std::size_t i) const { return symbols_[i].name; }
    std::vector<std::string> names() const;

    bool contains(std::string_view name) const noexcept;
    std::optional<std::size_t> find(std::string_view name) const noexcept;

    // Throws UnknownSymbolError.
    std::size_t index_of(std::string_view name) const;

    // FNV-1a over the ordered names; used to pair persisted models with the
    // vocabulary they were trained on.
    std::uint64_t hash() const noexcept;
    std::string hash_hex() const;

    bool operator==(const Vocabulary&) const = default;

private:
    std::vector<SymbolDef> symbols_;
};

}  // namespace fbdforge
