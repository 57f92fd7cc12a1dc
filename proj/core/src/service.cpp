#include "fbdforge/service.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "fbdforge/corpus_io.hpp"
#include "fbdforge/errors.hpp"

namespace fbdforge::service {
namespace {

using nlohmann::json;

Response json_response(int status, const json& body) { return {status, body.dump()}; }

Response error_response(int status, const std::string& message, const std::optional<std::string>& symbol = {}) {
    json body = {{"error", message}};
    if (symbol) body["symbol"] = *symbol;
    return json_response(status, body);
}

std::optional<json> parse_body(const std::string& body) {
    try {
        return json::parse(body);
    } catch (const json::parse_error&) {
        return std::nullopt;
    }
}

std::optional<SymbolSeq> read_symbols(const json& j, const char* key) {
    if (!j.contains(key)) return SymbolSeq{};
    const auto& arr = j[key];
    if (!arr.is_array()) return std::nullopt;
    SymbolSeq out;
    for (const auto& s : arr) {
        if (!s.is_string()) return std::nullopt;
        out.push_back(s.get<std::string>());
    }
    return out;
}

}  // namespace

double wire_probability(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", p);
    return std::strtod(buf, nullptr);
}

void ServiceConfig::validate() const {
    if (host.empty()) throw InvalidArgument("listen host is empty");
    if (port < 0 || port > 65535) throw InvalidArgument("listen port out of range");
    for (const auto* p : {&corpus_path, &federation_path}) {
        if (*p && !std::ifstream(**p).good() && !std::filesystem::is_directory(**p))
            throw InvalidArgument("cannot read '" + **p + "'");
    }
}

std::shared_ptr<const Snapshot> load_snapshot(const ServiceConfig& cfg) {
    auto snap = std::make_shared<Snapshot>();
    std::optional<Corpus> corpus;
    if (cfg.corpus_path) {
        corpus = load_corpus_file(*cfg.corpus_path);
        snap->vocabulary = corpus->vocabulary();
        snap->table = build_table(*corpus, cfg.smoothing, cfg.backoff);
        snap->prior = estimate_prior(*corpus);
    }
    if (cfg.federation_path) {
        snap->federation = load_federation(*cfg.federation_path);
        if (snap->vocabulary && !(*snap->vocabulary == snap->federation->vocabulary()))
            throw InvalidArgument("corpus and federation vocabularies differ");
        snap->vocabulary = snap->federation->vocabulary();
    } else if (corpus) {
        const std::size_t n = std::max<std::size_t>(1, corpus->max_length() - 1);
        snap->federation = train_federation(*corpus, {}, cfg.spec, n);
    }
    return snap;
}

struct Service::Http {
    httplib::Server server;
    std::thread worker;
};

Service::Service(ServiceConfig cfg, std::shared_ptr<const Snapshot> snapshot)
    : cfg_(std::move(cfg)), snapshot_(std::move(snapshot)) {
    if (!snapshot_) snapshot_ = std::make_shared<Snapshot>();
}

Service::~Service() { stop(); }

std::shared_ptr<const Snapshot> Service::snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
}

void Service::publish(std::shared_ptr<const Snapshot> next) {
    if (!next) throw InvalidArgument("cannot publish an empty snapshot");
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(next);
}

void Service::reload() { publish(load_snapshot(cfg_)); }

Response Service::handle_recommend(const std::string& body) const {
    const auto snap = snapshot();
    if (!snap->table || !snap->prior) return error_response(409, "no model loaded");
    auto req = parse_body(body);
    if (!req || !req->is_object()) return error_response(400, "request body must be a JSON object");
    auto prefix = read_symbols(*req, "prefix");
    if (!prefix) return error_response(400, "'prefix' must be an array of symbol names");
    std::size_t k = 1;
    if (req->contains("k")) {
        if (!(*req)["k"].is_number_integer() || (*req)["k"].get<long long>() < 1)
            return error_response(400, "'k' must be a positive integer");
        k = (*req)["k"].get<std::size_t>();
    }
    try {
        auto rec = recommend(*snap->table, *snap->prior, *prefix, k);
        json ranked = json::array();
        for (const auto& [symbol, p] : rec.entries)
            ranked.push_back({{"symbol", symbol}, {"prob", wire_probability(to_double(p))}});
        return json_response(200, {{"ranked", ranked}, {"context_used", rec.context_used}});
    } catch (const UnknownSymbolError& e) {
        return error_response(400, e.what(), e.symbol());
    } catch (const Error& e) {
        return error_response(400, e.what());
    }
}

Response Service::handle_generate(const std::string& body) const {
    const auto snap = snapshot();
    if (!snap->federation) return error_response(409, "no model loaded");
    auto req = parse_body(body);
    if (!req || !req->is_object()) return error_response(400, "request body must be a JSON object");
    GenerationConfig cfg;
    cfg.max_steps = snap->federation->max_steps() + 1;
    auto prefix = read_symbols(*req, "prefix");
    if (!prefix) return error_response(400, "'prefix' must be an array of symbol names");
    cfg.prefix = *prefix;
    try {
        if (req->contains("mode")) {
            const auto mode = (*req)["mode"].get<std::string>();
            if (mode == "sample") cfg.mode = GenerationMode::sample;
            else if (mode != "argmax") return error_response(400, "'mode' must be argmax or sample");
        }
        if (req->contains("seed")) cfg.seed = (*req)["seed"].get<std::uint64_t>();
        if (req->contains("max_steps")) cfg.max_steps = (*req)["max_steps"].get<std::size_t>();
        if (req->contains("budget")) {
            SymbolMultiset budget;
            for (auto it = (*req)["budget"].begin(); it != (*req)["budget"].end(); ++it)
                budget.add(it.key(), it.value().get<std::int64_t>());
            cfg.budget = std::move(budget);
        }
    } catch (const nlohmann::json::exception&) {
        return error_response(400, "malformed generate request");
    } catch (const InvalidArgument& e) {
        return error_response(400, e.what());
    }
    try {
        auto program = generate(*snap->federation, cfg);
        return json_response(200, {{"id", program.id}, {"symbols", program.symbols}});
    } catch (const UnknownSymbolError& e) {
        return error_response(400, e.what(), e.symbol());
    } catch (const Error& e) {
        return error_response(400, e.what());
    }
}

Response Service::handle_accept(const std::string& body) {
    auto req = parse_body(body);
    if (!req || !req->is_object() || !req->contains("symbol") || !(*req)["symbol"].is_string())
        return error_response(400, "accept requires a 'symbol'");
    auto prefix = read_symbols(*req, "prefix");
    if (!prefix) return error_response(400, "'prefix' must be an array of symbol names");
    const auto snap = snapshot();
    if (snap->vocabulary) {
        for (const auto& s : *prefix) {
            if (!snap->vocabulary->contains(s)) return error_response(400, "unknown symbol '" + s + "'", s);
        }
        const auto chosen = (*req)["symbol"].get<std::string>();
        if (!snap->vocabulary->contains(chosen)) return error_response(400, "unknown symbol '" + chosen + "'", chosen);
    }
    if (cfg_.request_log_path) {
        json line = {{"prefix", *prefix}, {"symbol", (*req)["symbol"]}};
        if (req->contains("accepted_top")) line["accepted_top"] = (*req)["accepted_top"];
        std::lock_guard lock(log_mutex_);
        std::ofstream log(*cfg_.request_log_path, std::ios::app);
        if (!log) return error_response(500, "cannot append to request log");
        log << line.dump() << '\n';
    }
    return json_response(200, {{"logged", cfg_.request_log_path.has_value()}});
}

Response Service::handle_vocabulary() const {
    const auto snap = snapshot();
    if (!snap->vocabulary) return error_response(409, "no model loaded");
    json symbols = json::array();
    for (const auto& s : snap->vocabulary->symbols()) {
        json e = {{"name", s.name}};
        if (s.category) e["category"] = *s.category;
        if (s.notes) e["notes"] = *s.notes;
        symbols.push_back(std::move(e));
    }
    return json_response(200, {{"symbols", symbols}});
}

Response Service::handle_health() const {
    const auto snap = snapshot();
    return json_response(200, {{"status", "ok"},
                               {"table_loaded", snap->table.has_value()},
                               {"federation_loaded", snap->federation.has_value()},
                               {"max_steps", snap->federation ? snap->federation->max_steps() : 0}});
}

int Service::start() {
    if (http_) throw Error("service is already running");
    cfg_.validate();
    http_ = std::make_unique<Http>();
    auto& srv = http_->server;
    auto reply = [](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    srv.Post("/recommend", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, handle_recommend(req.body));
    });
    srv.Post("/generate", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, handle_generate(req.body));
    });
    srv.Post("/accept", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, handle_accept(req.body));
    });
    srv.Get("/vocabulary", [this, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, handle_vocabulary());
    });
    srv.Get("/health", [this, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, handle_health());
    });

    int port = cfg_.port;
    if (port == 0) {
        port = srv.bind_to_any_port(cfg_.host);
    } else if (!srv.bind_to_port(cfg_.host, port)) {
        port = -1;
    }
    if (port < 0) {
        http_.reset();
        throw Error("cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port));
    }
    http_->worker = std::thread([this] { http_->server.listen_after_bind(); });
    return port;
}

void Service::stop() {
    if (!http_) return;
    http_->server.stop();
    if (http_->worker.joinable()) http_->worker.join();
    http_.reset();
}

}  // namespace fbdforge::service
