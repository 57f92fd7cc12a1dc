#include "fbdforge/requirements.hpp"

#include <fstream>
#include <istream>

#include <json.hpp>

#include "fbdforge/errors.hpp"

namespace fbdforge {
namespace {

using nlohmann::json;

json parse_json(std::istream& in, const char* what) {
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("malformed ") + what + " JSON: " + e.what());
    }
}

}  // namespace

MappingRuleTable::MappingRuleTable(std::map<std::string, std::vector<SymbolMultiplier>> rules)
    : rules_(std::move(rules)) {
    for (const auto& [entity, symbols] : rules_) {
        if (entity.empty()) throw InvalidArgument("rule with an empty entity type");
        for (const auto& sm : symbols) {
            if (sm.symbol.empty()) throw InvalidArgument("rule for '" + entity + "' names an empty symbol");
            if (sm.multiplier < 1) throw InvalidArgument("rule for '" + entity + "' has a multiplier below 1");
        }
    }
}

void MappingRuleTable::check_against(const Vocabulary& vocab) const {
    for (const auto& [_, symbols] : rules_) {
        for (const auto& sm : symbols) {
            if (!vocab.contains(sm.symbol)) throw UnknownSymbolError(sm.symbol);
        }
    }
}

RequirementDoc parse_requirements(std::istream& in) {
    const json j = parse_json(in, "requirements");
    if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
        throw ParseError(0, "requirements must be an object with an 'entries' array");
    RequirementDoc doc;
    const auto& entries = j["entries"];
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const auto where = "requirement entry " + std::to_string(i + 1) + ": ";
        if (!e.is_object()) throw ParseError(i + 1, where + "must be an object");
        if (!e.contains("entity_type") || !e["entity_type"].is_string() ||
            e["entity_type"].get<std::string>().empty())
            throw ParseError(i + 1, where + "missing nonempty string 'entity_type'");
        if (!e.contains("count") || !e["count"].is_number_integer())
            throw ParseError(i + 1, where + "missing integer 'count'");
        RequirementEntry entry;
        entry.entity_type = e["entity_type"].get<std::string>();
        entry.count = e["count"].get<std::int64_t>();
        if (entry.count < 1) throw ParseError(i + 1, where + "count must be positive");
        if (e.contains("attributes") && !e["attributes"].is_null()) {
            if (!e["attributes"].is_object()) throw ParseError(i + 1, where + "'attributes' must be an object");
            for (auto it = e["attributes"].begin(); it != e["attributes"].end(); ++it)
                entry.attributes[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
        }
        doc.entries.push_back(std::move(entry));
    }
    return doc;
}

RequirementDoc parse_requirements_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open requirements file '" + path + "'");
    return parse_requirements(in);
}

MappingRuleTable parse_rules(std::istream& in) {
    const json j = parse_json(in, "rule table");
    if (!j.is_object() || !j.contains("rules") || !j["rules"].is_object())
        throw ParseError(0, "rule table must be an object with a 'rules' object");
    std::map<std::string, std::vector<SymbolMultiplier>> rules;
    std::size_t index = 0;
    for (auto it = j["rules"].begin(); it != j["rules"].end(); ++it) {
        ++index;
        if (!it.value().is_array()) throw ParseError(index, "rule '" + it.key() + "' must be an array");
        auto& out = rules[it.key()];
        for (const auto& r : it.value()) {
            if (!r.is_object() || !r.contains("symbol") || !r["symbol"].is_string())
                throw ParseError(index, "rule '" + it.key() + "' entry needs a string 'symbol'");
            std::int64_t mult = 1;
            if (r.contains("multiplier")) {
                if (!r["multiplier"].is_number_integer())
                    throw ParseError(index, "rule '" + it.key() + "' multiplier must be an integer");
                mult = r["multiplier"].get<std::int64_t>();
            }
            if (mult < 1) throw ParseError(index, "rule '" + it.key() + "' multiplier must be positive");
            out.push_back({r["symbol"].get<std::string>(), mult});
        }
    }
    return MappingRuleTable(std::move(rules));
}

MappingRuleTable parse_rules_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open rule table '" + path + "'");
    return parse_rules(in);
}

DerivedMultiset derive_multiset(const RequirementDoc& doc, const MappingRuleTable& rules, bool strict) {
    DerivedMultiset out;
    for (const auto& entry : doc.entries) {
        if (entry.count < 1) throw InvalidArgument("requirement count must be positive");
        auto it = rules.rules().find(entry.entity_type);
        if (it == rules.rules().end()) {
            if (strict) throw Error("no mapping rule for entity type '" + entry.entity_type + "'");
            out.unmapped.push_back(entry.entity_type);
            continue;
        }
        for (const auto& sm : it->second) out.multiset.add(sm.symbol, entry.count * sm.multiplier);
    }
    return out;
}

}  // namespace fbdforge
