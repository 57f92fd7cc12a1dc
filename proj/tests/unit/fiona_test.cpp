#include <algorithm>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "fbdforge/fiona.hpp"
#include "fbdforge/rng.hpp"
#include "fixtures.hpp"

namespace fbdforge::fiona {
namespace {

Vocabulary abc() { return Vocabulary::from_names({"A", "B", "C"}); }

TEST(EnumeratePairs, Examples) {
    EXPECT_EQ(enumerate_pairs(abc(), {"C"}).pairs, (std::vector<SymbolPair>{{"A", "B"}, {"B", "A"}}));
    EXPECT_EQ(enumerate_pairs(abc(), {}).size(), 6u);
    EXPECT_EQ(enumerate_pairs(Vocabulary::from_names({"A", "B", "C", "D"}), {"C", "D"}).pairs,
              (std::vector<SymbolPair>{{"A", "B"}, {"B", "A"}}));
    EXPECT_THROW(enumerate_pairs(abc(), {"B", "C"}), InvalidArgument);
}

TEST(EnumeratePairs, MatchesBruteForceOverAllSubsets) {
    for (std::size_t n = 2; n <= 6; ++n) {
        const auto names = testing::symbol_names(n);
        const auto vocab = Vocabulary::from_names(names);
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            SymbolSet excl;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1u << i)) excl.insert(names[i]);
            const auto m = n - excl.size();
            if (m < 2) {
                EXPECT_THROW(enumerate_pairs(vocab, excl), InvalidArgument);
                continue;
            }
            std::vector<SymbolPair> brute;
            for (const auto& a : names)
                for (const auto& b : names)
                    if (a != b && !excl.count(a) && !excl.count(b)) brute.emplace_back(a, b);
            auto got = enumerate_pairs(vocab, excl);
            EXPECT_EQ(got.pairs, brute);
            EXPECT_EQ(got.size(), m * (m - 1));
        }
    }
}

TEST(WeightPairs, Examples) {
    CandidatePairSet two{{{"A", "B"}, {"B", "A"}}};
    auto uniform = weight_pairs(two, SymbolDistribution({{"A", 0.5}, {"B", 0.5}}));
    EXPECT_DOUBLE_EQ(uniform.entries()[0].prob, 0.5);
    EXPECT_DOUBLE_EQ(uniform.entries()[1].prob, 0.5);

    auto skewed = weight_pairs(two, SymbolDistribution({{"A", 2.0 / 3}, {"B", 1.0 / 3}}));
    EXPECT_NEAR(skewed.entries()[0].prob, 0.5, 1e-12);
    EXPECT_NEAR(skewed.entries()[1].prob, 0.5, 1e-12);
    EXPECT_NEAR(skewed.cdf()[0], 0.5, 1e-12);
    EXPECT_EQ(skewed.cdf()[1], 1.0);

    // Products 1/8 x4 and 1/16 x2 total 5/8.
    auto three = weight_pairs(enumerate_pairs(abc(), {}),
                              SymbolDistribution({{"A", 0.5}, {"B", 0.25}, {"C", 0.25}}));
    for (const auto& e : three.entries()) {
        const bool has_a = e.pair.first == "A" || e.pair.second == "A";
        EXPECT_NEAR(e.prob, has_a ? 0.2 : 0.1, 1e-12) << e.pair.first << e.pair.second;
    }
}

TEST(WeightPairs, Errors) {
    CandidatePairSet two{{{"A", "B"}, {"B", "A"}}};
    EXPECT_THROW(weight_pairs(two, SymbolDistribution({{"C", 1.0}})), InvalidArgument);
    EXPECT_THROW(weight_pairs(CandidatePairSet{}, SymbolDistribution({{"A", 1.0}})), InvalidArgument);
}

TEST(WeightPairs, ExcludedSymbolsCarryNoMass) {
    auto vocab = Vocabulary::from_names({"A", "B", "C", "D"});
    auto w = weight_pairs(enumerate_pairs(vocab, {"D"}), SymbolDistribution::uniform(vocab));
    double sum = 0;
    for (const auto& e : w.entries()) {
        EXPECT_NE(e.pair.first, "D");
        EXPECT_NE(e.pair.second, "D");
        sum += e.prob;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(SamplePair, Examples) {
    WeightedPairSet half({{{"A", "B"}, 0.5}, {{"B", "A"}, 0.5}});
    EXPECT_EQ(sample_pair(half, 0.25), (SymbolPair{"A", "B"}));
    EXPECT_EQ(sample_pair(half, 0.75), (SymbolPair{"B", "A"}));
    EXPECT_EQ(sample_pair(half, 0.5), (SymbolPair{"B", "A"}));
    WeightedPairSet one({{{"A", "B"}, 1.0}});
    EXPECT_EQ(sample_pair(one, 0.999), (SymbolPair{"A", "B"}));
    EXPECT_EQ(sample_pair(one, 0.0), (SymbolPair{"A", "B"}));
}

TEST(SamplePair, SkipsZeroWeightEntries) {
    WeightedPairSet w({{{"A", "B"}, 0.0}, {{"A", "C"}, 1.0}});
    EXPECT_EQ(sample_pair(w, 0.0), (SymbolPair{"A", "C"}));
}

TEST(SamplePair, SeededDrawsMatchWeights) {
    auto w = weight_pairs(enumerate_pairs(abc(), {}), SymbolDistribution({{"A", 0.5}, {"B", 0.3}, {"C", 0.2}}));
    SeededGenerator gen(5);
    std::vector<double> freq(w.size(), 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const auto& p = sample_pair(w, gen.uniform01());
        for (std::size_t j = 0; j < w.size(); ++j)
            if (w.entries()[j].pair == p) freq[j] += 1.0 / draws;
    }
    for (std::size_t j = 0; j < w.size(); ++j) EXPECT_NEAR(freq[j], w.entries()[j].prob, 0.01);
}

TEST(TauExtend, Examples) {
    EXPECT_EQ(tau_extend({{"A", "B"}, DraftMode::chained}, {"B", "C"}).symbols, (SymbolSeq{"A", "B", "C"}));
    EXPECT_THROW(tau_extend({{"A", "B"}, DraftMode::chained}, {"C", "D"}), ChainingViolation);
    EXPECT_EQ(tau_extend({{"A", "B"}, DraftMode::free}, {"C", "D"}).symbols, (SymbolSeq{"A", "B", "C", "D"}));
    EXPECT_EQ(tau_extend({{"A", "B"}, DraftMode::free}, {"B", "D"}).symbols, (SymbolSeq{"A", "B", "D"}));
    EXPECT_EQ(tau_extend({{}, DraftMode::chained}, {"A", "B"}).symbols, (SymbolSeq{"A", "B"}));
}

TEST(ExclusionScheduleTest, CyclesAndValidates) {
    ExclusionSchedule s({{"C"}, {}, {"A"}});
    EXPECT_EQ(s.for_iteration(1), (SymbolSet{"C"}));
    EXPECT_EQ(s.for_iteration(2), SymbolSet{});
    EXPECT_EQ(s.for_iteration(4), (SymbolSet{"C"}));
    EXPECT_TRUE(ExclusionSchedule().for_iteration(7).empty());
    EXPECT_NO_THROW(s.validate(abc()));
    EXPECT_THROW(ExclusionSchedule(std::vector<SymbolSet>{{"X"}}).validate(abc()), UnknownSymbolError);
    EXPECT_THROW(ExclusionSchedule(std::vector<SymbolSet>{{"A", "B"}}).validate(abc()), InvalidArgument);
}

TEST(ExclusionScheduleTest, LoadsJson) {
    std::istringstream in(R"({"exclusions": [["C"], [], ["A","D"]]})");
    auto s = load_schedule(in);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.exclusions()[2], (SymbolSet{"A", "D"}));
    std::istringstream bad("{\"exclusions\": 3}");
    EXPECT_THROW(load_schedule(bad), ParseError);
}

TEST(BuildContextDataset, TwoSymbolsAlternateAndAreDeterministic) {
    auto vocab = Vocabulary::from_names({"A", "B"});
    ContextDatasetOptions opt{1, 3, 17, DraftMode::chained};
    auto prior = SymbolDistribution::uniform(vocab);
    auto a = build_context_dataset(vocab, {}, prior, opt);
    ASSERT_EQ(a.programs.size(), 1u);
    const auto& s = a.programs[0].symbols;
    EXPECT_TRUE(s == (SymbolSeq{"A", "B", "A"}) || s == (SymbolSeq{"B", "A", "B"}));
    EXPECT_EQ(a.programs[0].id, "fiona-17-0");
    auto b = build_context_dataset(vocab, {}, prior, opt);
    EXPECT_EQ(a.programs, b.programs);
    EXPECT_EQ(a.by_step, b.by_step);

    std::set<SymbolSeq> seen;
    for (std::uint64_t seed = 0; seed < 32; ++seed)
        seen.insert(build_context_dataset(vocab, {}, prior, {1, 3, seed, DraftMode::chained}).programs[0].symbols);
    EXPECT_EQ(seen.size(), 2u);
}

TEST(BuildContextDataset, ExcludedSymbolNeverEntersAtItsIteration) {
    ExclusionSchedule s({{"C"}});
    auto vocab = abc();
    auto ds = build_context_dataset(vocab, s, SymbolDistribution::uniform(vocab), {50, 2, 3, DraftMode::chained});
    ASSERT_EQ(ds.programs.size(), 50u);
    for (const auto& p : ds.programs) EXPECT_EQ(std::count(p.symbols.begin(), p.symbols.end(), "C"), 0);
}

TEST(BuildContextDataset, EmptyAndErrors) {
    auto vocab = abc();
    auto prior = SymbolDistribution::uniform(vocab);
    auto empty = build_context_dataset(vocab, {}, prior, {0, 3, 1, DraftMode::chained});
    EXPECT_TRUE(empty.programs.empty());
    for (const auto& d : empty.by_step) EXPECT_TRUE(d.empty());
    EXPECT_THROW(build_context_dataset(vocab, {}, prior, {1, 1, 1, DraftMode::chained}), InvalidArgument);
    EXPECT_THROW(build_context_dataset(vocab, ExclusionSchedule(std::vector<SymbolSet>{{"A", "B"}}), prior, {1, 3, 1, DraftMode::chained}),
                 InvalidArgument);
}

TEST(BuildContextDataset, ChainedPairsBelongToSomeIterationAndSlicesLineUp) {
    auto vocab = Vocabulary::from_names({"A", "B", "C", "D", "E"});
    ExclusionSchedule s({{"A"}, {"B", "C"}, {}});
    auto prior = SymbolDistribution({{"A", 0.4}, {"B", 0.3}, {"C", 0.1}, {"D", 0.1}, {"E", 0.1}});
    auto ds = build_context_dataset(vocab, s, prior, {40, 5, 11, DraftMode::chained});
    std::set<SymbolPair> allowed;
    for (const auto& e : s.exclusions())
        for (const auto& p : enumerate_pairs(vocab, e).pairs) allowed.insert(p);
    for (const auto& p : ds.programs) {
        ASSERT_EQ(p.symbols.size(), 5u);
        for (std::size_t i = 0; i + 1 < p.symbols.size(); ++i)
            EXPECT_TRUE(allowed.count({p.symbols[i], p.symbols[i + 1]}));
    }
    ASSERT_EQ(ds.by_step.size(), 4u);
    for (std::size_t t = 1; t <= 4; ++t) {
        const auto& d = ds.by_step[t - 1];
        EXPECT_EQ(d.step.value(), t);
        EXPECT_EQ(d.source, DataSource::fiona_context);
        EXPECT_EQ(d.size(), 40u);
        for (const auto& item : d.items) EXPECT_EQ(item.prefix.size(), t);
    }
}

}  // namespace
}  // namespace fbdforge::fiona
