#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fbdforge/vocabulary.hpp"

namespace fbdforge {

using SymbolSeq = std::vector<std::string>;

// Discrete design time. Advances by one each time a symbol is appended.
class DesignStep {
public:
    explicit DesignStep(std::size_t t);

    std::size_t value() const noexcept { return t_; }
    bool operator==(const DesignStep&) const = default;
    auto operator<=>(const DesignStep&) const = default;

private:
    std::size_t t_;
};

// A symbol multiset (repetitions allowed). Counts are always >= 1; a symbol
// with nothing left is erased.
class SymbolMultiset {
public:
    SymbolMultiset() = default;
    explicit SymbolMultiset(std::map<std::string, std::int64_t> counts);

    void add(const std::string& symbol, std::int64_t n = 1);
    // Removes one occurrence; returns false when none was present.
    bool take(const std::string& symbol);

    std::int64_t count(const std::string& symbol) const;
    std::int64_t total() const;
    bool empty() const noexcept { return counts_.empty(); }
    const std::map<std::string, std::int64_t>& counts() const noexcept { return counts_; }

    // Throws UnknownSymbolError for the first name missing from `vocab`.
    void check_against(const Vocabulary& vocab) const;

    bool operator==(const SymbolMultiset&) const = default;

private:
    std::map<std::string, std::int64_t> counts_;
};

struct FbdProgram {
    std::string id;
    SymbolSeq symbols;
    std::optional<std::string> task;

    std::size_t length() const noexcept { return symbols.size(); }
    bool operator==(const FbdProgram&) const = default;
};

struct Violation {
    // 1-based position of the offending symbol; 0 for whole-program problems.
    std::size_t position = 0;
    std::string symbol;
    std::string message;

    bool operator==(const Violation&) const = default;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    std::string summary() const;
};

ValidationReport validate_program(const FbdProgram& program, const Vocabulary& vocab);

SymbolMultiset multiset_of(const FbdProgram& program);

class Corpus {
public:
    Corpus() = default;

    // Validates every program and id uniqueness; throws Error on failure.
    Corpus(Vocabulary vocabulary, std::vector<FbdProgram> programs);

    const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
    const std::vector<FbdProgram>& programs() const noexcept { return programs_; }
    std::size_t size() const noexcept { return programs_.size(); }
    bool empty() const noexcept { return programs_.empty(); }
    std::size_t max_length() const noexcept;

    bool operator==(const Corpus&) const = default;

private:
    Vocabulary vocabulary_;
    std::vector<FbdProgram> programs_;
};

}  // namespace fbdforge
