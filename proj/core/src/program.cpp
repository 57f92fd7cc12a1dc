#include "fbdforge/program.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "fbdforge/errors.hpp"

namespace fbdforge {

DesignStep::DesignStep(std::size_t t) : t_(t) {
    if (t == 0) throw InvalidArgument("design step must be >= 1");
}

SymbolMultiset::SymbolMultiset(std::map<std::string, std::int64_t> counts) : counts_(std::move(counts)) {
    for (const auto& [name, n] : counts_) {
        if (n < 1) throw InvalidArgument("multiset count for '" + name + "' must be >= 1");
    }
}

void SymbolMultiset::add(const std::string& symbol, std::int64_t n) {
    if (n < 1) throw InvalidArgument("multiset increment must be >= 1");
    counts_[symbol] += n;
}

bool SymbolMultiset::take(const std::string& symbol) {
    auto it = counts_.find(symbol);
    if (it == counts_.end()) return false;
    if (--it->second == 0) counts_.erase(it);
    return true;
}

std::int64_t SymbolMultiset::count(const std::string& symbol) const {
    auto it = counts_.find(symbol);
    return it == counts_.end() ? 0 : it->second;
}

std::int64_t SymbolMultiset::total() const {
    std::int64_t sum = 0;
    for (const auto& [_, n] : counts_) sum += n;
    return sum;
}

void SymbolMultiset::check_against(const Vocabulary& vocab) const {
    for (const auto& [name, _] : counts_) {
        if (!vocab.contains(name)) throw UnknownSymbolError(name);
    }
}

std::string ValidationReport::summary() const {
    if (ok()) return "ok";
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i > 0) os << "; ";
        const auto& v = violations[i];
        if (v.position > 0) os << "position " << v.position << ": ";
        os << v.message;
    }
    return os.str();
}

ValidationReport validate_program(const FbdProgram& program, const Vocabulary& vocab) {
    ValidationReport report;
    if (program.symbols.empty()) {
        report.violations.push_back({0, "", "empty program"});
        return report;
    }
    for (std::size_t i = 0; i < program.symbols.size(); ++i) {
        const auto& s = program.symbols[i];
        if (!vocab.contains(s)) report.violations.push_back({i + 1, s, "unknown symbol " + s});
    }
    return report;
}

SymbolMultiset multiset_of(const FbdProgram& program) {
    SymbolMultiset ms;
    for (const auto& s : program.symbols) ms.add(s);
    return ms;
}

Corpus::Corpus(Vocabulary vocabulary, std::vector<FbdProgram> programs)
    : vocabulary_(std::move(vocabulary)), programs_(std::move(programs)) {
    if (vocabulary_.empty()) throw InvalidArgument("corpus vocabulary is empty");
    std::set<std::string> ids;
    for (const auto& p : programs_) {
        if (!ids.insert(p.id).second) throw InvalidArgument("duplicate program id '" + p.id + "'");
        auto report = validate_program(p, vocabulary_);
        if (!report.ok()) throw InvalidArgument("program '" + p.id + "': " + report.summary());
    }
}

std::size_t Corpus::max_length() const noexcept {
    std::size_t n = 0;
    for (const auto& p : programs_) n = std::max(n, p.length());
    return n;
}

}  // namespace fbdforge
