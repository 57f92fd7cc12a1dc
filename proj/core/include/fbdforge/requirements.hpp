#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fbdforge/program.hpp"

namespace fbdforge {

struct RequirementEntry {
    std::string entity_type;
    std::int64_t count = 1;
    std::map<std::string, std::string> attributes;

    bool operator==(const RequirementEntry&) const = default;
};

struct RequirementDoc {
    std::vector<RequirementEntry> entries;
};

struct SymbolMultiplier {
    std::string symbol;
    std::int64_t multiplier = 1;
};

// entity type -> symbols it calls for, per unit of the entity.
class MappingRuleTable {
public:
    MappingRuleTable() = default;
    explicit MappingRuleTable(std::map<std::string, std::vector<SymbolMultiplier>> rules);

    const std::map<std::string, std::vector<SymbolMultiplier>>& rules() const noexcept { return rules_; }

    // Throws UnknownSymbolError for the first symbol outside `vocab`.
    void check_against(const Vocabulary& vocab) const;

private:
    std::map<std::string, std::vector<SymbolMultiplier>> rules_;
};

// {"entries":[{"entity_type":str,"count":int,"attributes":{...}}]}
// Throws ParseError carrying the 1-based entry index.
RequirementDoc parse_requirements(std::istream& in);
RequirementDoc parse_requirements_file(const std::string& path);

// {"rules":{"valve":[{"symbol":"BOOL_GATE","multiplier":1}]}}
MappingRuleTable parse_rules(std::istream& in);
MappingRuleTable parse_rules_file(const std::string& path);

struct DerivedMultiset {
    SymbolMultiset multiset;
    // Entity types skipped in non-strict mode.
    std::vector<std::string> unmapped;
};

// Sums count * multiplier per symbol. In strict mode an entity type without
// a rule throws Error naming it.
DerivedMultiset derive_multiset(const RequirementDoc& doc, const MappingRuleTable& rules, bool strict = true);

}  // namespace fbdforge
