#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fbdforge/errors.hpp"
#include "fbdforge/transition_table.hpp"
#include "fixtures.hpp"

namespace fbdforge {
namespace {

using R = Rational;

TEST(EstimatePrior, CanonicalCorpus) {
    auto prior = estimate_prior(testing::c0());
    EXPECT_EQ(prior.probs(), (std::map<std::string, R>{
                                 {"AND", R(3, 9)}, {"OR", R(3, 9)}, {"NOT", R(1, 9)}, {"TON", R(1, 9)}, {"MOVE", R(1, 9)}}));
}

TEST(EstimatePrior, SmallCases) {
    auto v = Vocabulary::from_names({"AND", "OR"});
    EXPECT_EQ(estimate_prior(Corpus(v, {{"a", {"AND"}, std::nullopt}})).prob("AND"), R(1));
    auto two = estimate_prior(Corpus(v, {{"a", {"AND", "OR"}, std::nullopt}, {"b", {"AND", "OR"}, std::nullopt}}));
    EXPECT_EQ(two.prob("AND"), R(1, 2));
    EXPECT_EQ(two.prob("OR"), R(1, 2));
    EXPECT_THROW(estimate_prior(Corpus(v, {})), InvalidArgument);
}

TEST(BuildTable, CanonicalContexts) {
    auto table = build_table(testing::c0());
    const auto& ctx = table.contexts();
    EXPECT_EQ(ctx.at({"AND"}), (ContinuationCounts{{"OR", 2}, {"NOT", 1}}));
    EXPECT_EQ(ctx.at({"AND", "OR"}), (ContinuationCounts{{"TON", 1}, {"MOVE", 1}}));
    EXPECT_EQ(ctx.at({}), (ContinuationCounts{{"AND", 3}}));
}

TEST(BuildTable, TwoSymbolProgram) {
    auto table = build_table(Corpus(Vocabulary::from_names({"A", "B"}), {{"p", {"A", "B"}, std::nullopt}}));
    EXPECT_EQ(table.contexts().size(), 2u);
    EXPECT_EQ(table.contexts().at({}), (ContinuationCounts{{"A", 1}}));
    EXPECT_EQ(table.contexts().at({"A"}), (ContinuationCounts{{"B", 1}}));
}

TEST(BuildTable, SingleSymbolProgramsStillFillEmptyPrefix) {
    auto table = build_table(
        Corpus(Vocabulary::from_names({"A", "B"}), {{"p", {"A"}, std::nullopt}, {"q", {"B"}, std::nullopt}}));
    EXPECT_EQ(table.contexts().size(), 1u);
    EXPECT_EQ(table.contexts().at({}), (ContinuationCounts{{"A", 1}, {"B", 1}}));
}

TEST(ConditionalProb, CanonicalExamples) {
    auto table = build_table(testing::c0());
    EXPECT_EQ(conditional_prob(table, {"AND"}, "OR"), R(2, 3));
    EXPECT_EQ(conditional_prob(table, {"AND"}, "TON"), R(0));
    EXPECT_EQ(conditional_prob(table, {"OR"}, "TON"), R(1, 2));
    EXPECT_EQ(table.match({"OR"}).context, (SymbolSeq{"OR"}));
}

TEST(ConditionalProb, BacksOffToLongestObservedWindow) {
    auto table = build_table(testing::c0());
    // [TON, AND, OR] never occurs; its trailing window [AND, OR] does.
    auto m = table.match({"TON", "AND", "OR"});
    EXPECT_EQ(m.context, (SymbolSeq{"AND", "OR"}));
    EXPECT_FALSE(m.anchored);
    // Nothing ever follows TON, so only the empty prefix remains.
    EXPECT_EQ(table.match({"TON"}).context, SymbolSeq{});
    EXPECT_EQ(conditional_prob(table, {"TON"}, "AND"), R(1));
}

TEST(ConditionalProb, Errors) {
    auto table = build_table(testing::c0());
    EXPECT_THROW(conditional_prob(table, {"AND"}, "XYZ"), UnknownSymbolError);
    EXPECT_THROW(conditional_prob(table, {"XYZ"}, "AND"), UnknownSymbolError);
    auto strict = table.with_options({}, false);
    EXPECT_THROW(conditional_prob(strict, {"OR"}, "TON"), Error);
    EXPECT_EQ(conditional_prob(strict, {"AND"}, "OR"), R(2, 3));
}

TEST(ConditionalProb, LaplaceSmoothing) {
    auto table = build_table(testing::c0(), Smoothing::laplace(R(1)));
    // (2 + 1) / (3 + 5)
    EXPECT_EQ(conditional_prob(table, {"AND"}, "OR"), R(3, 8));
    EXPECT_EQ(conditional_prob(table, {"AND"}, "TON"), R(1, 8));
}

TEST(ConditionalProb, LaplaceConvergesToUnsmoothedAsAlphaShrinks) {
    auto base = build_table(testing::c0());
    R prev_gap(1);
    for (std::int64_t d : {10, 100, 1000, 100000}) {
        auto smoothed = base.with_options(Smoothing::laplace(R(1, d)), true);
        R gap = conditional_prob(base, {"AND"}, "OR") - conditional_prob(smoothed, {"AND"}, "OR");
        if (gap < R(0)) gap = -gap;
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
    }
    EXPECT_LT(to_double(prev_gap), 1e-4);
}

TEST(Recommend, CanonicalExamples) {
    auto corpus = testing::c0();
    auto table = build_table(corpus);
    auto prior = estimate_prior(corpus);

    auto r1 = recommend(table, prior, {"AND"}, 2);
    ASSERT_EQ(r1.entries.size(), 2u);
    EXPECT_EQ(r1.entries[0], (std::pair<std::string, R>{"OR", R(2, 3)}));
    EXPECT_EQ(r1.entries[1], (std::pair<std::string, R>{"NOT", R(1, 3)}));
    EXPECT_EQ(r1.context_used, (SymbolSeq{"AND"}));

    auto r2 = recommend(table, prior, {"AND", "OR"}, 1);
    ASSERT_EQ(r2.entries.size(), 1u);
    EXPECT_EQ(r2.entries[0], (std::pair<std::string, R>{"MOVE", R(1, 2)}));

    auto r3 = recommend(table, prior, {}, 1);
    ASSERT_EQ(r3.entries.size(), 1u);
    EXPECT_EQ(r3.entries[0], (std::pair<std::string, R>{"AND", R(1, 3)}));
}

TEST(Recommend, ReturnsFewerThanKWhenFewContinuations) {
    auto corpus = testing::c0();
    auto r = recommend(build_table(corpus), estimate_prior(corpus), {"AND"}, 10);
    EXPECT_EQ(r.entries.size(), 2u);
    EXPECT_THROW(recommend(build_table(corpus), estimate_prior(corpus), {"AND"}, 0), InvalidArgument);
}

TEST(TransitionTableProperties, ContextsNormalize) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto corpus = testing::random_corpus(rng, 4, 6, 5);
        auto table = build_table(corpus);
        for (const auto& [prefix, counts] : table.contexts()) {
            R sum(0);
            for (const auto& name : corpus.vocabulary().names()) sum += conditional_prob(table, prefix, name);
            EXPECT_EQ(sum, R(1));
        }
        auto smoothed = table.with_options(Smoothing::laplace(R(1, 3)), true);
        for (const auto& [prefix, counts] : table.contexts()) {
            R sum(0);
            for (const auto& name : corpus.vocabulary().names()) sum += conditional_prob(smoothed, prefix, name);
            EXPECT_EQ(sum, R(1));
        }
    }
}

TEST(TransitionTableProperties, ScalingCountsKeepsRankings) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        auto corpus = testing::random_corpus(rng, 5, 6, 5);
        auto table = build_table(corpus);
        auto prior = estimate_prior(corpus);
        for (std::int64_t factor : {2, 7}) {
            auto scaled = table.scaled(factor);
            for (const auto& prefix : testing::corpus_prefixes(corpus)) {
                if (prefix.empty()) continue;
                auto a = recommend(table, prior, prefix, 5);
                auto b = recommend(scaled, prior, prefix, 5);
                EXPECT_EQ(a.entries, b.entries);
            }
        }
    }
}

TEST(TransitionTableProperties, TopOneMatchesBruteForce) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        auto corpus = testing::random_corpus(rng, 4, 6, 5);
        auto table = build_table(corpus);
        auto prior = estimate_prior(corpus);
        for (const auto& prefix : testing::corpus_prefixes(corpus)) {
            if (prefix.empty()) continue;
            auto rec = recommend(table, prior, prefix, 1);
            auto [best, p] = testing::brute_argmax(testing::brute_prefix_counts(corpus, prefix));
            ASSERT_EQ(rec.entries.size(), 1u);
            EXPECT_EQ(rec.entries[0].first, best);
            EXPECT_EQ(rec.entries[0].second, p);
        }
    }
}

TEST(TablePersistence, RoundTrip) {
    auto table = build_table(testing::c0(), Smoothing::laplace(R(1, 2)), false);
    std::stringstream ss;
    save_table(ss, table);
    EXPECT_NE(ss.str().find("fbdforge-table/1"), std::string::npos);
    EXPECT_EQ(load_table(ss), table);
    std::istringstream wrong(R"({"version":"other"})");
    EXPECT_THROW(load_table(wrong), ParseError);
}

}  // namespace
}  // namespace fbdforge
