#include <istream>
#include <ostream>

#include <json.hpp>

#include "fbdforge/action_model.hpp"
#include "fbdforge/errors.hpp"

namespace fbdforge {
namespace {

using nlohmann::json;

constexpr const char* kModelVersion = "fbdforge-model/1";
constexpr char kSeparator = '\x1f';

std::string join(const SymbolSeq& prefix) {
    std::string key;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (i > 0) key += kSeparator;
        key += prefix[i];
    }
    return key;
}

SymbolSeq split(const std::string& key) {
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

json spec_to_json(const ActionModelSpec& s) {
    return {{"backend", to_string(s.backend)}, {"hidden_size", s.hidden_size},
            {"embedding_dim", s.embedding_dim}, {"epochs", s.epochs},
            {"learning_rate", s.learning_rate}, {"batch_size", s.batch_size},
            {"init_seed", s.init_seed},         {"context_weight", s.context_weight}};
}

ActionModelSpec spec_from_json(const json& j) {
    ActionModelSpec s;
    s.backend = parse_backend(j.at("backend").get<std::string>());
    s.hidden_size = j.at("hidden_size").get<std::size_t>();
    s.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    s.epochs = j.at("epochs").get<std::size_t>();
    s.learning_rate = j.at("learning_rate").get<double>();
    s.batch_size = j.at("batch_size").get<std::size_t>();
    s.init_seed = j.at("init_seed").get<std::uint64_t>();
    s.context_weight = j.at("context_weight").get<double>();
    return s;
}

json tensor(std::vector<std::size_t> shape, const std::vector<double>& data) {
    return {{"shape", std::move(shape)}, {"data", data}};
}

std::vector<double> read_tensor(const json& j, std::vector<std::size_t> expected) {
    if (j.at("shape").get<std::vector<std::size_t>>() != expected) throw ParseError(0, "tensor shape mismatch");
    auto data = j.at("data").get<std::vector<double>>();
    std::size_t n = 1;
    for (auto d : expected) n *= d;
    if (data.size() != n) throw ParseError(0, "tensor size does not match its shape");
    return data;
}

}  // namespace

void save_model(std::ostream& out, const ActionModel& model) {
    json j;
    j["version"] = kModelVersion;
    j["backend"] = to_string(model.backend());
    j["step"] = model.step().value();
    j["spec"] = spec_to_json(model.spec());
    j["vocabulary"] = model.vocabulary().names();
    j["vocabulary_hash"] = model.vocabulary().hash_hex();

    json params = json::object();
    if (const auto* counts = model.counts()) {
        json c = json::object();
        for (const auto& [prefix, targets] : *counts) c[join(prefix)] = targets;
        params["counts"] = std::move(c);
    } else if (const auto* p = model.lstm()) {
        const auto& [V, D, H] = p->shape;
        params["vocab"] = V;
        params["embedding_dim"] = D;
        params["hidden_size"] = H;
        params["embedding"] = tensor({V, D}, p->embedding);
        params["w_gates"] = tensor({4 * H, D + H}, p->w_gates);
        params["b_gates"] = tensor({4 * H}, p->b_gates);
        params["w_out"] = tensor({V, H}, p->w_out);
        params["b_out"] = tensor({V}, p->b_out);
    } else if (const auto* prior = model.prior()) {
        params["prior"] = prior->probs();
    }
    j["parameters"] = std::move(params);
    out << j.dump() << '\n';
}

ActionModel load_model(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("malformed model JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("version", "") != kModelVersion)
        throw ParseError(0, std::string("expected model version ") + kModelVersion);
    try {
        auto vocab = Vocabulary::from_names(j.at("vocabulary").get<std::vector<std::string>>());
        if (vocab.hash_hex() != j.at("vocabulary_hash").get<std::string>())
            throw ParseError(0, "model vocabulary hash mismatch");
        auto spec = spec_from_json(j.at("spec"));
        DesignStep step(j.at("step").get<std::size_t>());
        const auto& params = j.at("parameters");
        switch (parse_backend(j.at("backend").get<std::string>())) {
            case Backend::count: {
                CountTable counts;
                for (auto it = params.at("counts").begin(); it != params.at("counts").end(); ++it)
                    counts[split(it.key())] = it.value().get<std::map<std::string, double>>();
                return ActionModel::count_model(spec, step, std::move(vocab), std::move(counts));
            }
            case Backend::rnn: {
                nn::LstmShape shape{params.at("vocab").get<std::size_t>(),
                                    params.at("embedding_dim").get<std::size_t>(),
                                    params.at("hidden_size").get<std::size_t>()};
                const auto& [V, D, H] = shape;
                nn::LstmParams p;
                p.shape = shape;
                p.embedding = read_tensor(params.at("embedding"), {V, D});
                p.w_gates = read_tensor(params.at("w_gates"), {4 * H, D + H});
                p.b_gates = read_tensor(params.at("b_gates"), {4 * H});
                p.w_out = read_tensor(params.at("w_out"), {V, H});
                p.b_out = read_tensor(params.at("b_out"), {V});
                return ActionModel::rnn_model(spec, step, std::move(vocab), std::move(p));
            }
            case Backend::prior:
                return ActionModel::prior_model(
                    spec, step, std::move(vocab),
                    SymbolDistribution(params.at("prior").get<std::map<std::string, double>>()));
        }
    } catch (const json::exception& e) {
        throw ParseError(0, std::string("invalid model document: ") + e.what());
    }
    throw ParseError(0, "unreachable backend");
}

}  // namespace fbdforge
