#include <random>

#include <gtest/gtest.h>

#include "fbdforge/errors.hpp"
#include "fbdforge/program.hpp"
#include "fixtures.hpp"

namespace fbdforge {
namespace {

TEST(Vocabulary, SortsNamesAndRejectsDuplicates) {
    auto v = Vocabulary::from_names({"OR", "AND", "NOT"});
    EXPECT_EQ(v.names(), (std::vector<std::string>{"AND", "NOT", "OR"}));
    EXPECT_EQ(v.index_of("NOT"), 1u);
    EXPECT_THROW(v.index_of("XOR"), UnknownSymbolError);
    EXPECT_THROW(Vocabulary::from_names({"AND", "AND"}), InvalidArgument);
    EXPECT_THROW(Vocabulary::from_names({""}), InvalidArgument);
    EXPECT_THROW(Vocabulary(std::vector<SymbolDef>{}), InvalidArgument);
}

TEST(Vocabulary, HashDependsOnNamesOnly) {
    auto a = Vocabulary::from_names({"A", "B"});
    auto b = Vocabulary(std::vector<SymbolDef>{{"B", "timer", std::nullopt}, {"A", std::nullopt, "x"}});
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_NE(a.hash(), Vocabulary::from_names({"A", "C"}).hash());
    EXPECT_EQ(a.hash_hex().size(), 16u);
}

TEST(ValidateProgram, AcceptsKnownSymbols) {
    auto v = Vocabulary::from_names({"AND", "OR", "NOT"});
    EXPECT_TRUE(validate_program({"p", {"AND", "OR"}, std::nullopt}, v).ok());
}

TEST(ValidateProgram, ReportsUnknownSymbolWithPosition) {
    auto v = Vocabulary::from_names({"AND", "OR"});
    auto r = validate_program({"p", {"AND", "XYZ"}, std::nullopt}, v);
    ASSERT_EQ(r.violations.size(), 1u);
    EXPECT_EQ(r.violations[0].position, 2u);
    EXPECT_EQ(r.violations[0].symbol, "XYZ");
}

TEST(ValidateProgram, ReportsEmptyProgram) {
    auto r = validate_program({"p", {}, std::nullopt}, Vocabulary::from_names({"AND"}));
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.violations[0].message, "empty program");
}

TEST(ValidateProgram, IsPure) {
    auto v = Vocabulary::from_names({"AND", "OR"});
    FbdProgram p{"p", {"AND", "Q", "OR", "R"}, std::nullopt};
    auto first = validate_program(p, v);
    auto second = validate_program(p, v);
    EXPECT_EQ(first.violations, second.violations);
    EXPECT_EQ(first.violations.size(), 2u);
}

TEST(MultisetOf, CountsOccurrences) {
    EXPECT_EQ(multiset_of({"p", {"AND", "OR", "AND"}, std::nullopt}).counts(),
              (std::map<std::string, std::int64_t>{{"AND", 2}, {"OR", 1}}));
    EXPECT_EQ(multiset_of({"p", {"NOT"}, std::nullopt}).counts(), (std::map<std::string, std::int64_t>{{"NOT", 1}}));
    EXPECT_EQ(multiset_of({"p", {"AND", "OR", "TON"}, std::nullopt}).counts(),
              (std::map<std::string, std::int64_t>{{"AND", 1}, {"OR", 1}, {"TON", 1}}));
}

TEST(MultisetOf, TotalEqualsProgramLength) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        auto corpus = testing::random_corpus(rng, 4, 5, 8);
        for (const auto& p : corpus.programs()) EXPECT_EQ(multiset_of(p).total(), static_cast<std::int64_t>(p.length()));
    }
}

TEST(SymbolMultiset, TakeErasesExhaustedSymbols) {
    SymbolMultiset m({{"A", 2}});
    EXPECT_TRUE(m.take("A"));
    EXPECT_EQ(m.count("A"), 1);
    EXPECT_TRUE(m.take("A"));
    EXPECT_TRUE(m.empty());
    EXPECT_FALSE(m.take("A"));
    EXPECT_THROW(SymbolMultiset({{"A", 0}}), InvalidArgument);
}

TEST(Corpus, RejectsDuplicateIdsAndInvalidPrograms) {
    auto v = Vocabulary::from_names({"A"});
    EXPECT_THROW(Corpus(v, {{"P1", {"A"}, std::nullopt}, {"P1", {"A"}, std::nullopt}}), InvalidArgument);
    EXPECT_THROW(Corpus(v, {{"P1", {"B"}, std::nullopt}}), InvalidArgument);
}

TEST(DesignStep, MustBePositive) {
    EXPECT_THROW(DesignStep(0), InvalidArgument);
    EXPECT_EQ(DesignStep(3).value(), 3u);
}

}  // namespace
}  // namespace fbdforge
