#include "fbdforge/action_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "fbdforge/errors.hpp"
#include "fbdforge/rng.hpp"

namespace fbdforge {
namespace {

struct EncodedItem {
    std::vector<std::size_t> tokens;
    std::size_t target;
    double weight;
};

std::vector<EncodedItem> encode(const Vocabulary& vocab, const TransitionDataset& data, double weight) {
    std::vector<EncodedItem> out;
    out.reserve(data.size());
    for (const auto& item : data.items) {
        EncodedItem e;
        e.tokens.reserve(item.prefix.size());
        for (const auto& s : item.prefix) e.tokens.push_back(vocab.index_of(s));
        e.target = vocab.index_of(item.target);
        e.weight = weight;
        out.push_back(std::move(e));
    }
    return out;
}

double source_weight(const ActionModelSpec& spec, const TransitionDataset& data) {
    return data.source == DataSource::fiona_context ? spec.context_weight * data.weight : data.weight;
}

void check_prefix(const ActionModel& m, const SymbolSeq& prefix) {
    for (const auto& s : prefix) {
        if (!m.vocabulary().contains(s)) throw UnknownSymbolError(s);
    }
    if (m.backend() != Backend::prior && prefix.size() != m.step().value())
        throw InvalidArgument("prefix has " + std::to_string(prefix.size()) + " symbols; step-" +
                              std::to_string(m.step().value()) + " model expects " +
                              std::to_string(m.step().value()));
}

// One phase of mini-batch gradient descent. `phase` separates the shuffling
// streams of pretraining and task training.
void run_sgd(nn::LstmParams& params, const std::vector<EncodedItem>& items, const ActionModelSpec& spec,
             std::uint64_t phase, ErrorSurface& surface) {
    nn::LstmParams grads = nn::LstmParams::zeros(params.shape);
    std::vector<std::size_t> order(items.size());
    for (std::size_t epoch = 1; epoch <= spec.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        SeededGenerator gen(derive_seed(derive_seed(spec.init_seed, phase), epoch));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[gen.below(i)]);

        std::size_t batch = 0;
        for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
            const std::size_t end = std::min(order.size(), start + spec.batch_size);
            const double n = static_cast<double>(end - start);
            grads.fill(0.0);
            double loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const auto& it = items[order[k]];
                loss += nn::accumulate_gradients(params, it.tokens, it.target, it.weight / n, grads);
            }
            params.add_scaled(grads, -spec.learning_rate);
            surface.grid.push_back({epoch, ++batch, loss / n});
        }
    }
}

CountTable tabulate(const TransitionDataset& data, double weight, CountTable counts = {}) {
    for (const auto& item : data.items) counts[item.prefix][item.target] += weight;
    return counts;
}

double mean_nll(const ActionModel& model, const TransitionDataset& data) {
    double sum = 0.0;
    for (const auto& item : data.items) {
        sum += -std::log(std::max(model.predict(item.prefix).prob(item.target), 1e-300));
    }
    return sum / static_cast<double>(data.size());
}

void constant_surface(ErrorSurface& s, std::size_t epochs, double loss) {
    for (std::size_t e = 1; e <= epochs; ++e) s.grid.push_back({e, 1, loss});
}

double weighted_loss(const nn::LstmParams& params, const std::vector<EncodedItem>& items) {
    const double n = static_cast<double>(items.size());
    double loss = 0.0;
    for (const auto& it : items) {
        auto probs = nn::predict_probs(params, it.tokens);
        loss += it.weight / n * -std::log(probs[it.target]);
    }
    return loss;
}

}  // namespace

const char* to_string(Backend backend) noexcept {
    switch (backend) {
        case Backend::count: return "count";
        case Backend::rnn: return "rnn";
        case Backend::prior: return "prior";
    }
    return "rnn";
}

Backend parse_backend(const std::string& name) {
    if (name == "count") return Backend::count;
    if (name == "rnn") return Backend::rnn;
    if (name == "prior") return Backend::prior;
    throw InvalidArgument("unknown backend '" + name + "'");
}

void ActionModelSpec::validate() const {
    if (hidden_size == 0 || embedding_dim == 0 || epochs == 0 || batch_size == 0)
        throw InvalidArgument("model sizes, epochs and batch size must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw InvalidArgument("learning rate must be positive");
    if (!(context_weight > 0.0) || !std::isfinite(context_weight))
        throw InvalidArgument("context weight must be positive");
}

ActionModel ActionModel::count_model(ActionModelSpec spec, DesignStep step, Vocabulary vocab, CountTable counts) {
    spec.backend = Backend::count;
    return ActionModel(std::move(spec), step, std::move(vocab), std::move(counts));
}

ActionModel ActionModel::rnn_model(ActionModelSpec spec, DesignStep step, Vocabulary vocab, nn::LstmParams params) {
    if (params.shape.vocab != vocab.size()) throw InvalidArgument("LSTM output size does not match vocabulary");
    spec.backend = Backend::rnn;
    spec.hidden_size = params.shape.hidden;
    spec.embedding_dim = params.shape.embedding;
    return ActionModel(std::move(spec), step, std::move(vocab), std::move(params));
}

ActionModel ActionModel::prior_model(ActionModelSpec spec, DesignStep step, Vocabulary vocab,
                                     SymbolDistribution prior) {
    spec.backend = Backend::prior;
    return ActionModel(std::move(spec), step, std::move(vocab), std::move(prior));
}

Backend ActionModel::backend() const noexcept {
    switch (params_.index()) {
        case 0: return Backend::count;
        case 1: return Backend::rnn;
        default: return Backend::prior;
    }
}

SymbolDistribution ActionModel::predict(const SymbolSeq& prefix) const {
    check_prefix(*this, prefix);
    std::map<std::string, double> probs;
    if (const auto* table = counts()) {
        auto it = table->find(prefix);
        double total = 0.0;
        if (it != table->end()) {
            for (const auto& [_, w] : it->second) total += w;
        }
        if (total <= 0.0) return SymbolDistribution::uniform(vocab_);
        for (const auto& s : vocab_.symbols()) {
            auto jt = it->second.find(s.name);
            probs[s.name] = jt == it->second.end() ? 0.0 : jt->second / total;
        }
        return SymbolDistribution(std::move(probs));
    }
    if (const auto* params = lstm()) {
        std::vector<std::size_t> tokens;
        tokens.reserve(prefix.size());
        for (const auto& s : prefix) tokens.push_back(vocab_.index_of(s));
        auto p = nn::predict_probs(*params, tokens);
        for (std::size_t v = 0; v < vocab_.size(); ++v) probs[vocab_.name(v)] = p[v];
        return SymbolDistribution(std::move(probs));
    }
    return *prior();
}

double ErrorSurface::epoch_mean(std::size_t epoch) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& p : grid) {
        if (p.epoch == epoch) {
            sum += p.loss;
            ++n;
        }
    }
    if (n == 0) throw InvalidArgument("error surface has no rows for epoch " + std::to_string(epoch));
    return sum / static_cast<double>(n);
}

TrainResult train(const ActionModelSpec& spec, const Vocabulary& vocab, const TransitionDataset& task,
                  const TransitionDataset* context) {
    spec.validate();
    if (task.empty()) throw InvalidArgument("task dataset is empty");
    task.validate(vocab);
    if (context) {
        if (context->step != task.step) throw InvalidArgument("context dataset step does not match task step");
        try {
            context->validate(vocab);
        } catch (const UnknownSymbolError& e) {
            throw InvalidArgument("vocabulary mismatch between datasets: " + std::string(e.what()));
        }
    }

    const std::size_t t = task.step.value();
    ErrorSurface surface{{}, t, spec.backend, context != nullptr, spec.init_seed};
    std::optional<ErrorSurface> pre;

    switch (spec.backend) {
        case Backend::count: {
            CountTable counts;
            if (context && !context->empty()) {
                counts = tabulate(*context, source_weight(spec, *context));
                auto pre_model = ActionModel::count_model(spec, task.step, vocab, counts);
                pre.emplace(ErrorSurface{{}, t, Backend::count, false, spec.init_seed});
                constant_surface(*pre, spec.epochs, mean_nll(pre_model, *context));
            }
            counts = tabulate(task, source_weight(spec, task), std::move(counts));
            auto model = ActionModel::count_model(spec, task.step, vocab, std::move(counts));
            constant_surface(surface, spec.epochs, mean_nll(model, task));
            return {std::move(model), std::move(surface), std::move(pre)};
        }
        case Backend::rnn: {
            auto params = nn::LstmParams::initialize({vocab.size(), spec.embedding_dim, spec.hidden_size},
                                                     spec.init_seed);
            if (context && !context->empty()) {
                pre.emplace(ErrorSurface{{}, t, Backend::rnn, false, spec.init_seed});
                run_sgd(params, encode(vocab, *context, source_weight(spec, *context)), spec, 1, *pre);
            }
            run_sgd(params, encode(vocab, task, source_weight(spec, task)), spec, 2, surface);
            return {ActionModel::rnn_model(spec, task.step, vocab, std::move(params)), std::move(surface),
                    std::move(pre)};
        }
        case Backend::prior: break;
    }
    throw InvalidArgument("the prior backend is not trainable");
}

double gradient_check(const ActionModelSpec& spec, const Vocabulary& vocab, const TransitionDataset& sample,
                      double epsilon) {
    if (spec.backend != Backend::rnn) throw InvalidArgument("gradient check needs the rnn backend");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("invalid perturbation epsilon");
    spec.validate();
    if (sample.empty() || sample.size() > 4) throw InvalidArgument("gradient check sample must hold 1 to 4 items");
    sample.validate(vocab);

    auto params = nn::LstmParams::initialize({vocab.size(), spec.embedding_dim, spec.hidden_size}, spec.init_seed);
    const auto items = encode(vocab, sample, source_weight(spec, sample));
    const double n = static_cast<double>(items.size());

    auto analytic = nn::LstmParams::zeros(params.shape);
    for (const auto& it : items) nn::accumulate_gradients(params, it.tokens, it.target, it.weight / n, analytic);

    double worst = 0.0;
    auto tensors = params.tensors();
    auto grads = analytic.tensors();
    for (std::size_t k = 0; k < nn::LstmParams::kTensorCount; ++k) {
        auto& values = *tensors[k];
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + epsilon;
            const double up = weighted_loss(params, items);
            values[i] = saved - epsilon;
            const double down = weighted_loss(params, items);
            values[i] = saved;
            const double numeric = (up - down) / (2.0 * epsilon);
            const double a = (*grads[k])[i];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            worst = std::max(worst, std::abs(a - numeric) / denom);
        }
    }
    return worst;
}

void export_error_surface(std::ostream& out, const ErrorSurface& surface) {
    out << "#step=" << surface.step << '\n'
        << "#backend=" << to_string(surface.backend) << '\n'
        << "#pretrained=" << (surface.pretrained ? "true" : "false") << '\n'
        << "#seed=" << surface.seed << '\n'
        << "epoch,batch,loss\n";
    char buf[32];
    for (const auto& p : surface.grid) {
        auto res = std::to_chars(buf, buf + sizeof buf, p.loss);
        out << p.epoch << ',' << p.batch << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf))
            << '\n';
    }
}

std::string export_error_surface(const ErrorSurface& surface) {
    std::ostringstream os;
    export_error_surface(os, surface);
    return os.str();
}

}  // namespace fbdforge
