#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "fbdforge/corpus_io.hpp"
#include "fbdforge/service.hpp"
#include "fixtures.hpp"

namespace fbdforge::service {
namespace {

using nlohmann::json;

std::shared_ptr<const Snapshot> c0_snapshot() {
    auto corpus = testing::c0();
    auto snap = std::make_shared<Snapshot>();
    snap->vocabulary = corpus.vocabulary();
    snap->table = build_table(corpus);
    snap->prior = estimate_prior(corpus);
    ActionModelSpec spec;
    spec.backend = Backend::count;
    snap->federation = train_federation(corpus, {}, spec, 2);
    return snap;
}

TEST(WireProbability, TenSignificantDigits) {
    EXPECT_EQ(wire_probability(2.0 / 3), 0.6666666667);
    EXPECT_EQ(wire_probability(1.0 / 3), 0.3333333333);
    EXPECT_EQ(wire_probability(0.5), 0.5);
}

TEST(Recommend, CanonicalBody) {
    Service svc({}, c0_snapshot());
    auto r = svc.handle_recommend(R"({"prefix":["AND"],"k":2})");
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(r.body,
              R"({"context_used":["AND"],"ranked":[{"prob":0.6666666667,"symbol":"OR"},{"prob":0.3333333333,"symbol":"NOT"}]})");
    EXPECT_EQ(json::parse(r.body),
              json::parse(R"({"ranked":[{"symbol":"OR","prob":0.6666666667},{"symbol":"NOT","prob":0.3333333333}],"context_used":["AND"]})"));
}

TEST(Recommend, EmptyPrefixRanksPrior) {
    Service svc({}, c0_snapshot());
    auto j = json::parse(svc.handle_recommend(R"({"prefix":[],"k":1})").body);
    ASSERT_EQ(j["ranked"].size(), 1u);
    EXPECT_EQ(j["ranked"][0]["symbol"], "AND");
}

TEST(Recommend, Errors) {
    Service svc({}, c0_snapshot());
    auto unknown = svc.handle_recommend(R"({"prefix":["XYZ"],"k":1})");
    EXPECT_EQ(unknown.status, 400);
    EXPECT_EQ(json::parse(unknown.body)["symbol"], "XYZ");
    EXPECT_EQ(svc.handle_recommend("[1,2").status, 400);
    EXPECT_EQ(svc.handle_recommend(R"({"prefix":"AND"})").status, 400);
    EXPECT_EQ(svc.handle_recommend(R"({"prefix":["AND"],"k":0})").status, 400);
    Service empty({});
    EXPECT_EQ(empty.handle_recommend(R"({"prefix":["AND"],"k":1})").status, 409);
    EXPECT_EQ(empty.handle_generate(R"({})").status, 409);
}

TEST(Generate, BudgetedArgmax) {
    Service svc({}, c0_snapshot());
    auto r = svc.handle_generate(R"({"budget":{"AND":1,"OR":1,"TON":1},"max_steps":3})");
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(json::parse(r.body)["symbols"], json::parse(R"(["AND","OR","TON"])"));
    EXPECT_EQ(svc.handle_generate(R"({"budget":{"XYZ":1}})").status, 400);
    EXPECT_EQ(svc.handle_generate(R"({"mode":"beam"})").status, 400);
}

TEST(Accept, AppendsToLog) {
    const auto log = std::filesystem::temp_directory_path() / "fbdforge_accept_test.jsonl";
    std::filesystem::remove(log);
    ServiceConfig cfg;
    cfg.request_log_path = log.string();
    Service svc(cfg, c0_snapshot());
    EXPECT_EQ(svc.handle_accept(R"({"prefix":["AND"],"symbol":"OR","accepted_top":true})").status, 200);
    EXPECT_EQ(svc.handle_accept(R"({"prefix":[],"symbol":"AND"})").status, 200);
    EXPECT_EQ(svc.handle_accept(R"({"prefix":[],"symbol":"XYZ"})").status, 400);
    std::ifstream in(log);
    std::string line;
    std::vector<json> lines;
    while (std::getline(in, line)) lines.push_back(json::parse(line));
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0]["symbol"], "OR");
    EXPECT_EQ(lines[0]["accepted_top"], true);
    std::filesystem::remove(log);
}

TEST(Metadata, VocabularyAndHealth) {
    Service svc({}, c0_snapshot());
    auto v = json::parse(svc.handle_vocabulary().body);
    ASSERT_EQ(v["symbols"].size(), 5u);
    EXPECT_EQ(v["symbols"][0]["name"], "AND");
    auto h = json::parse(svc.handle_health().body);
    EXPECT_EQ(h["status"], "ok");
    EXPECT_EQ(h["max_steps"], 2);
    EXPECT_EQ(Service({}).handle_vocabulary().status, 409);
}

TEST(Snapshot, LoadAndAtomicSwap) {
    const auto path = std::filesystem::temp_directory_path() / "fbdforge_service_c0.jsonl";
    { std::ofstream(path) << testing::c0_jsonl(); }
    ServiceConfig cfg;
    cfg.corpus_path = path.string();
    Service svc(cfg);
    EXPECT_EQ(svc.handle_recommend(R"({"prefix":["AND"],"k":1})").status, 409);
    auto before = svc.snapshot();
    svc.reload();
    EXPECT_NE(svc.snapshot(), before);
    EXPECT_EQ(svc.handle_recommend(R"({"prefix":["AND"],"k":1})").status, 200);
    EXPECT_EQ(svc.snapshot()->federation->max_steps(), 2u);
    std::filesystem::remove(path);
}

TEST(Concurrency, IdenticalRequestsAgreeDuringSwaps) {
    Service svc({}, c0_snapshot());
    const auto expected = svc.handle_recommend(R"({"prefix":["AND"],"k":2})").body;
    std::atomic<bool> done{false};
    std::thread swapper([&] {
        while (!done) svc.publish(c0_snapshot());
    });
    std::vector<std::future<bool>> readers;
    for (int i = 0; i < 4; ++i)
        readers.push_back(std::async(std::launch::async, [&] {
            for (int j = 0; j < 200; ++j)
                if (svc.handle_recommend(R"({"prefix":["AND"],"k":2})").body != expected) return false;
            return true;
        }));
    for (auto& r : readers) EXPECT_TRUE(r.get());
    done = true;
    swapper.join();
}

TEST(Http, ServesOverLoopback) {
    ServiceConfig cfg;
    cfg.port = 0;
    Service svc(cfg, c0_snapshot());
    const int port = svc.start();
    ASSERT_GT(port, 0);
    httplib::Client client("127.0.0.1", port);
    auto res = client.Post("/recommend", R"({"prefix":["AND"],"k":2})", "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(json::parse(res->body)["ranked"][0]["symbol"], "OR");
    auto bad = client.Post("/recommend", R"({"prefix":["XYZ"]})", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    auto health = client.Get("/health");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    svc.stop();
    EXPECT_FALSE(client.Get("/health"));
}

}  // namespace
}  // namespace fbdforge::service
