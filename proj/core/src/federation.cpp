#include "fbdforge/federation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <map>

#include <json.hpp>

#include "fbdforge/errors.hpp"
#include "fbdforge/rng.hpp"
#include "fbdforge/transition_table.hpp"

namespace fbdforge {
namespace {

constexpr const char* kFederationVersion = "fbdforge-federation/1";

// Floor applied before taking logs so that zero-probability hits report a
// large finite NLL.
constexpr double kProbFloor = 1e-12;

std::string select(const SymbolDistribution& dist, GenerationMode mode, SeededGenerator& gen) {
    if (mode == GenerationMode::argmax) return *dist.argmax();
    const double u = gen.uniform01();
    double cum = 0.0;
    const std::string* last = nullptr;
    for (const auto& [name, p] : dist.probs()) {
        if (p <= 0.0) continue;
        cum += p;
        last = &name;
        if (u < cum) return name;
    }
    return *last;
}

std::vector<std::string> ranked_vocabulary(const SymbolDistribution& dist, const Vocabulary& vocab) {
    std::vector<std::string> names = vocab.names();
    std::stable_sort(names.begin(), names.end(),
                     [&dist](const std::string& a, const std::string& b) { return dist.prob(a) > dist.prob(b); });
    return names;
}

}  // namespace

Federation::Federation(Vocabulary vocab, SymbolDistribution prior, std::vector<ActionModel> models)
    : vocab_(std::move(vocab)), prior_(std::move(prior)), models_(std::move(models)) {
    if (models_.empty()) throw InvalidArgument("a federation needs at least one step model");
    for (std::size_t i = 0; i < models_.size(); ++i) {
        if (models_[i].step().value() != i + 1)
            throw InvalidArgument("federation model " + std::to_string(i + 1) + " has step " +
                                  std::to_string(models_[i].step().value()));
        if (!(models_[i].vocabulary() == vocab_)) throw InvalidArgument("federation models disagree on vocabulary");
    }
    for (const auto& [name, _] : prior_.probs()) {
        if (!vocab_.contains(name)) throw UnknownSymbolError(name);
    }
}

const ActionModel& Federation::model(std::size_t t) const {
    if (t == 0 || t > models_.size()) throw InvalidArgument("no federation model for step " + std::to_string(t));
    return models_[t - 1];
}

Backend Federation::backend() const noexcept {
    for (const auto& m : models_) {
        if (m.backend() != Backend::prior) return m.backend();
    }
    return Backend::prior;
}

Federation train_federation(const Corpus& corpus, const std::vector<TransitionDataset>& context,
                            const ActionModelSpec& spec, std::size_t max_steps) {
    if (corpus.empty()) throw InvalidArgument("cannot train a federation on an empty corpus");
    if (max_steps == 0) throw InvalidArgument("federation size must be >= 1");
    spec.validate();

    std::map<std::size_t, TransitionDataset> context_by_step;
    for (const auto& ds : context) {
        const auto t = ds.step.value();
        if (t > max_steps)
            throw InvalidArgument("context dataset for step " + std::to_string(t) + " exceeds federation size " +
                                  std::to_string(max_steps));
        auto [it, fresh] = context_by_step.try_emplace(t, ds);
        if (!fresh) it->second.items.insert(it->second.items.end(), ds.items.begin(), ds.items.end());
    }

    const auto prior = estimate_prior(corpus).to_double();
    const auto& vocab = corpus.vocabulary();

    auto train_step = [&](std::size_t t) {
        auto task = slice_transitions(corpus, DesignStep(t));
        if (task.empty()) return ActionModel::prior_model(spec, DesignStep(t), vocab, prior);
        auto it = context_by_step.find(t);
        const TransitionDataset* ctx = it == context_by_step.end() ? nullptr : &it->second;
        return train(spec, vocab, task, ctx).model;
    };

    // Step models share nothing mutable, so recurrent training fans out.
    const auto policy = spec.backend == Backend::rnn && std::thread::hardware_concurrency() > 1
                            ? std::launch::async
                            : std::launch::deferred;
    std::vector<std::future<ActionModel>> jobs;
    jobs.reserve(max_steps);
    for (std::size_t t = 1; t <= max_steps; ++t) jobs.push_back(std::async(policy, train_step, t));
    std::vector<ActionModel> models;
    models.reserve(max_steps);
    for (auto& j : jobs) models.push_back(j.get());
    return Federation(vocab, prior, std::move(models));
}

FbdProgram generate(const Federation& fed, const GenerationConfig& cfg) {
    if (cfg.max_steps == 0) throw InvalidArgument("max_steps must be >= 1");
    std::optional<SymbolMultiset> budget = cfg.budget;
    if (budget) {
        if (budget->empty()) throw InvalidArgument("generation budget is empty");
        budget->check_against(fed.vocabulary());
    }
    for (const auto& s : cfg.prefix) {
        if (!fed.vocabulary().contains(s)) throw UnknownSymbolError(s);
    }

    SeededGenerator gen(cfg.seed);
    FbdProgram out;
    out.id = "gen-" + std::to_string(cfg.seed);
    out.symbols = cfg.prefix;
    const std::size_t limit = std::min(cfg.max_steps, fed.max_steps() + 1);

    while (out.symbols.size() < limit) {
        const std::size_t t = out.symbols.size();
        SymbolDistribution dist = t == 0 ? fed.prior() : fed.model(t).predict(out.symbols);
        if (budget) {
            std::vector<std::string> allowed;
            for (const auto& [name, _] : budget->counts()) allowed.push_back(name);
            dist = mask_and_renormalize(dist, allowed);
        }
        if (!dist.argmax()) {
            if (t == 0) throw InvalidArgument("every symbol is masked at step 1");
            break;
        }
        auto chosen = select(dist, cfg.mode, gen);
        if (budget) budget->take(chosen);
        out.symbols.push_back(std::move(chosen));
        if (budget && budget->empty() && cfg.end_on_budget_exhaustion) break;
    }
    if (out.symbols.empty()) throw InvalidArgument("generation produced no symbols");
    return out;
}

std::vector<StepMetrics> evaluate_federation(const Federation& fed, const Corpus& held_out, std::size_t k) {
    if (k == 0) throw InvalidArgument("k must be >= 1");
    for (const auto& p : held_out.programs()) {
        auto report = validate_program(p, fed.vocabulary());
        if (!report.ok()) throw InvalidArgument("held-out program '" + p.id + "': " + report.summary());
    }
    std::vector<StepMetrics> out;
    for (std::size_t t = 1; t <= fed.max_steps(); ++t) {
        auto data = slice_transitions(held_out, DesignStep(t));
        if (data.empty()) continue;
        StepMetrics m;
        m.step = t;
        m.samples = data.size();
        std::size_t hit1 = 0, hitk = 0;
        double nll = 0.0;
        for (const auto& item : data.items) {
            auto dist = fed.model(t).predict(item.prefix);
            auto ranking = ranked_vocabulary(dist, fed.vocabulary());
            auto pos = std::find(ranking.begin(), ranking.end(), item.target) - ranking.begin();
            if (pos == 0) ++hit1;
            if (static_cast<std::size_t>(pos) < k) ++hitk;
            nll += -std::log(std::max(dist.prob(item.target), kProbFloor));
        }
        const double n = static_cast<double>(data.size());
        m.top1 = static_cast<double>(hit1) / n;
        m.topk = static_cast<double>(hitk) / n;
        m.mean_nll = nll / n;
        out.push_back(m);
    }
    return out;
}

void save_federation(const Federation& fed, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& m : fed.models()) {
        std::ofstream os(dir / ("step-" + std::to_string(m.step().value()) + ".json"));
        if (!os) throw Error("cannot write federation model into '" + dir.string() + "'");
        save_model(os, m);
    }
    nlohmann::json manifest;
    manifest["version"] = kFederationVersion;
    manifest["N"] = fed.max_steps();
    manifest["vocabulary_hash"] = fed.vocabulary().hash_hex();
    manifest["backend"] = to_string(fed.backend());
    manifest["vocabulary"] = fed.vocabulary().names();
    manifest["prior"] = fed.prior().probs();
    // Manifest last: a directory with a manifest is complete.
    const auto tmp = dir / "manifest.json.tmp";
    {
        std::ofstream os(tmp);
        if (!os) throw Error("cannot write federation manifest into '" + dir.string() + "'");
        os << manifest.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, dir / "manifest.json");
}

Federation load_federation(const std::filesystem::path& dir) {
    std::ifstream ms(dir / "manifest.json");
    if (!ms) throw Error("no federation manifest in '" + dir.string() + "'");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(ms);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, std::string("malformed federation manifest: ") + e.what());
    }
    if (manifest.value("version", "") != kFederationVersion)
        throw ParseError(0, std::string("expected federation version ") + kFederationVersion);
    try {
        auto vocab = Vocabulary::from_names(manifest.at("vocabulary").get<std::vector<std::string>>());
        if (vocab.hash_hex() != manifest.at("vocabulary_hash").get<std::string>())
            throw ParseError(0, "federation vocabulary hash mismatch");
        const auto n = manifest.at("N").get<std::size_t>();
        std::vector<ActionModel> models;
        for (std::size_t t = 1; t <= n; ++t) {
            std::ifstream is(dir / ("step-" + std::to_string(t) + ".json"));
            if (!is) throw Error("federation is missing the step-" + std::to_string(t) + " model");
            models.push_back(load_model(is));
        }
        SymbolDistribution prior(manifest.at("prior").get<std::map<std::string, double>>());
        return Federation(std::move(vocab), std::move(prior), std::move(models));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("invalid federation manifest: ") + e.what());
    }
}

}  // namespace fbdforge
