#include <istream>
#include <ostream>

#include <json.hpp>

#include "fbdforge/errors.hpp"
#include "fbdforge/transition_table.hpp"

namespace fbdforge {
namespace {

using nlohmann::json;

constexpr const char* kTableVersion = "fbdforge-table/1";
constexpr char kSeparator = '\x1f';

std::string join_prefix(const SymbolSeq& prefix) {
    std::string key;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (i > 0) key += kSeparator;
        key += prefix[i];
    }
    return key;
}

SymbolSeq split_prefix(const std::string& key) {
    SymbolSeq out;
    if (key.empty()) return out;
    std::size_t start = 0;
    while (true) {
        auto pos = key.find(kSeparator, start);
        out.push_back(key.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

json context_map_to_json(const ContextMap& map) {
    json j = json::object();
    for (const auto& [prefix, counts] : map) j[join_prefix(prefix)] = counts;
    return j;
}

ContextMap context_map_from_json(const json& j) {
    ContextMap map;
    for (auto it = j.begin(); it != j.end(); ++it) {
        map[split_prefix(it.key())] = it.value().get<ContinuationCounts>();
    }
    return map;
}

Rational parse_rational(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(text));
    return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
}

}  // namespace

void save_table(std::ostream& out, const TransitionTable& table) {
    json j;
    j["version"] = kTableVersion;
    j["vocabulary"] = table.vocabulary().names();
    j["smoothing"] = {{"mode", table.smoothing().mode == SmoothingMode::laplace ? "laplace" : "none"},
                      {"alpha", to_string(table.smoothing().alpha)}};
    j["backoff"] = table.backoff();
    j["contexts"] = context_map_to_json(table.contexts());
    j["windows"] = context_map_to_json(table.windows());
    out << j.dump() << '\n';
}

TransitionTable load_table(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("malformed table JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("version", "") != kTableVersion)
        throw ParseError(0, std::string("expected table version ") + kTableVersion);
    try {
        auto names = j.at("vocabulary").get<std::vector<std::string>>();
        Smoothing smoothing;
        const auto& sm = j.at("smoothing");
        smoothing.mode = sm.at("mode").get<std::string>() == "laplace" ? SmoothingMode::laplace : SmoothingMode::none;
        smoothing.alpha = parse_rational(sm.at("alpha").get<std::string>());
        return TransitionTable(Vocabulary::from_names(names), context_map_from_json(j.at("contexts")),
                               context_map_from_json(j.value("windows", json::object())), smoothing,
                               j.value("backoff", true));
    } catch (const json::exception& e) {
        throw ParseError(0, std::string("invalid table document: ") + e.what());
    }
}

}  // namespace fbdforge
