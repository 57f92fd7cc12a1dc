#include "fbdforge/corpus_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "fbdforge/errors.hpp"

namespace fbdforge {
namespace {

using nlohmann::json;

FbdProgram parse_program_line(const std::string& line, std::size_t lineno) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(lineno, "line " + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
    auto fail = [lineno](const std::string& msg) -> ParseError {
        return ParseError(lineno, "line " + std::to_string(lineno) + ": " + msg);
    };
    if (!j.is_object()) throw fail("record must be a JSON object");
    if (!j.contains("id") || !j["id"].is_string()) throw fail("missing string field 'id'");
    if (!j.contains("symbols") || !j["symbols"].is_array()) throw fail("missing array field 'symbols'");

    FbdProgram p;
    p.id = j["id"].get<std::string>();
    if (p.id.empty()) throw fail("empty program id");
    for (const auto& s : j["symbols"]) {
        if (!s.is_string()) throw fail("symbols must be strings");
        p.symbols.push_back(s.get<std::string>());
    }
    if (p.symbols.empty()) throw fail("program '" + p.id + "' is empty");
    if (j.contains("task") && !j["task"].is_null()) {
        if (!j["task"].is_string()) throw fail("'task' must be a string");
        p.task = j["task"].get<std::string>();
    }
    return p;
}

std::vector<FbdProgram> read_programs(std::istream& in, const Vocabulary* vocab) {
    std::vector<FbdProgram> programs;
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto p = parse_program_line(line, lineno);
        if (!ids.insert(p.id).second)
            throw ParseError(lineno, "line " + std::to_string(lineno) + ": duplicate program id '" + p.id + "'");
        if (vocab) {
            for (const auto& s : p.symbols) {
                if (!vocab->contains(s)) throw UnknownSymbolError(s);
            }
        }
        programs.push_back(std::move(p));
    }
    if (programs.empty()) throw ParseError(0, "empty corpus");
    return programs;
}

json symbol_to_json(const SymbolDef& s) {
    json j = {{"name", s.name}};
    if (s.category) j["category"] = *s.category;
    if (s.notes) j["notes"] = *s.notes;
    return j;
}

}  // namespace

Corpus load_corpus(std::istream& in) {
    auto programs = read_programs(in, nullptr);
    std::set<std::string> names;
    for (const auto& p : programs) names.insert(p.symbols.begin(), p.symbols.end());
    std::vector<std::string> ordered(names.begin(), names.end());
    return Corpus(Vocabulary::from_names(ordered), std::move(programs));
}

Corpus load_corpus(std::istream& in, const Vocabulary& vocab) {
    auto programs = read_programs(in, &vocab);
    return Corpus(vocab, std::move(programs));
}

Corpus load_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open corpus file '" + path + "'");
    return load_corpus(in);
}

Corpus load_corpus_file(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open corpus file '" + path + "'");
    return load_corpus(in, vocab);
}

std::string program_to_line(const FbdProgram& program) {
    json j = {{"id", program.id}, {"symbols", program.symbols}};
    if (program.task) j["task"] = *program.task;
    return j.dump();
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
    for (const auto& p : corpus.programs()) out << program_to_line(p) << '\n';
}

Vocabulary load_vocabulary(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("malformed vocabulary JSON: ") + e.what());
    }
    if (!j.is_array()) throw ParseError(0, "vocabulary must be a JSON array");
    std::vector<SymbolDef> defs;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        auto where = "vocabulary entry " + std::to_string(i + 1) + ": ";
        if (!e.is_object() || !e.contains("name") || !e["name"].is_string())
            throw ParseError(i + 1, where + "missing string field 'name'");
        SymbolDef d{e["name"].get<std::string>(), std::nullopt, std::nullopt};
        if (e.contains("category") && e["category"].is_string()) d.category = e["category"].get<std::string>();
        if (e.contains("notes") && e["notes"].is_string()) d.notes = e["notes"].get<std::string>();
        defs.push_back(std::move(d));
    }
    return Vocabulary(std::move(defs));
}

Vocabulary load_vocabulary_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open vocabulary file '" + path + "'");
    return load_vocabulary(in);
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
    json j = json::array();
    for (const auto& s : vocab.symbols()) j.push_back(symbol_to_json(s));
    out << j.dump(2) << '\n';
}

}  // namespace fbdforge
