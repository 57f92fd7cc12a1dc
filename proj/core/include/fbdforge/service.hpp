#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "fbdforge/action_model.hpp"
#include "fbdforge/federation.hpp"
#include "fbdforge/transition_table.hpp"

namespace fbdforge::service {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::string> corpus_path;
    std::optional<std::string> federation_path;
    // Used when a federation has to be trained from the corpus at load time.
    ActionModelSpec spec = [] {
        ActionModelSpec s;
        s.backend = Backend::count;
        return s;
    }();
    Smoothing smoothing;
    bool backoff = true;
    std::optional<std::string> request_log_path;

    // Throws InvalidArgument on an unusable address or missing paths.
    void validate() const;
};

// Everything a request can read. Immutable once published.
struct Snapshot {
    std::optional<Vocabulary> vocabulary;
    std::optional<TransitionTable> table;
    std::optional<ExactDistribution> prior;
    std::optional<Federation> federation;
};

// Loads the corpus (table + prior) and federation named by `cfg`. Without a
// federation path a count federation is trained from the corpus.
std::shared_ptr<const Snapshot> load_snapshot(const ServiceConfig& cfg);

struct Response {
    int status = 200;
    std::string body;
};

class Service {
public:
    explicit Service(ServiceConfig cfg, std::shared_ptr<const Snapshot> snapshot = nullptr);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    std::shared_ptr<const Snapshot> snapshot() const;
    void publish(std::shared_ptr<const Snapshot> next);
    // Rebuilds the snapshot from the configured paths and publishes it.
    void reload();

    Response handle_recommend(const std::string& body) const;
    Response handle_generate(const std::string& body) const;
    Response handle_accept(const std::string& body);
    Response handle_vocabulary() const;
    Response handle_health() const;

    // Binds and serves on a background thread; returns the bound port
    // (useful with port 0). Throws Error if the address cannot be bound.
    int start();
    void stop();

private:
    struct Http;

    ServiceConfig cfg_;
    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const Snapshot> snapshot_;
    std::mutex log_mutex_;
    std::unique_ptr<Http> http_;
};

// Probabilities on the wire carry 10 significant digits.
double wire_probability(double p);

}  // namespace fbdforge::service
