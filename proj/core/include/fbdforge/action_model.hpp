#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fbdforge/distribution.hpp"
#include "fbdforge/lstm.hpp"
#include "fbdforge/program.hpp"
#include "fbdforge/transition_dataset.hpp"

namespace fbdforge {

// `prior` models ignore the prefix and return a fixed distribution; they
// stand in for design steps that had no training data.
enum class Backend { count, rnn, prior };

const char* to_string(Backend backend) noexcept;
Backend parse_backend(const std::string& name);

struct ActionModelSpec {
    Backend backend = Backend::rnn;
    std::size_t hidden_size = 50;
    std::size_t embedding_dim = 16;
    std::size_t epochs = 50;
    double learning_rate = 0.05;
    std::size_t batch_size = 16;
    std::uint64_t init_seed = 0;
    double context_weight = 0.5;

    // Throws InvalidArgument on nonpositive sizes or rates.
    void validate() const;

    bool operator==(const ActionModelSpec&) const = default;
};

// Weighted prefix -> target tallies of the count backend.
using CountTable = std::map<SymbolSeq, std::map<std::string, double>>;

class ActionModel {
public:
    static ActionModel count_model(ActionModelSpec spec, DesignStep step, Vocabulary vocab, CountTable counts);
    static ActionModel rnn_model(ActionModelSpec spec, DesignStep step, Vocabulary vocab, nn::LstmParams params);
    static ActionModel prior_model(ActionModelSpec spec, DesignStep step, Vocabulary vocab, SymbolDistribution prior);

    Backend backend() const noexcept;
    const ActionModelSpec& spec() const noexcept { return spec_; }
    DesignStep step() const noexcept { return step_; }
    const Vocabulary& vocabulary() const noexcept { return vocab_; }

    // Distribution over the full vocabulary for the next symbol. Throws
    // InvalidArgument when |prefix| != step (prior models accept any
    // length) and UnknownSymbolError for symbols outside the vocabulary.
    SymbolDistribution predict(const SymbolSeq& prefix) const;

    const CountTable* counts() const noexcept { return std::get_if<CountTable>(&params_); }
    const nn::LstmParams* lstm() const noexcept { return std::get_if<nn::LstmParams>(&params_); }
    const SymbolDistribution* prior() const noexcept { return std::get_if<SymbolDistribution>(&params_); }

    bool operator==(const ActionModel&) const = default;

private:
    using Params = std::variant<CountTable, nn::LstmParams, SymbolDistribution>;

    ActionModel(ActionModelSpec spec, DesignStep step, Vocabulary vocab, Params params)
        : spec_(std::move(spec)), step_(step), vocab_(std::move(vocab)), params_(std::move(params)) {}

    ActionModelSpec spec_;
    DesignStep step_;
    Vocabulary vocab_;
    Params params_;
};

struct ErrorSurface {
    struct Point {
        std::size_t epoch;
        std::size_t batch;
        double loss;  // mean negative log-likelihood of the batch, nats

        bool operator==(const Point&) const = default;
    };

    std::vector<Point> grid;
    std::size_t step = 1;
    Backend backend = Backend::rnn;
    bool pretrained = false;
    std::uint64_t seed = 0;

    std::size_t epochs() const noexcept { return grid.empty() ? 0 : grid.back().epoch; }
    // Mean of the batch losses recorded for `epoch` (1-based).
    double epoch_mean(std::size_t epoch) const;
    double final_epoch_mean() const { return epoch_mean(epochs()); }

    bool operator==(const ErrorSurface&) const = default;
};

struct TrainResult {
    ActionModel model;
    ErrorSurface surface;
    std::optional<ErrorSurface> pretraining_surface;
};

// Trains the step model. With `context`, the model first runs spec.epochs
// over the context transitions (weighted by spec.context_weight) and then
// spec.epochs over `task` starting from those parameters.
TrainResult train(const ActionModelSpec& spec, const Vocabulary& vocab, const TransitionDataset& task,
                  const TransitionDataset* context = nullptr);

// Maximum relative error between backpropagated and central-difference
// gradients of the mean weighted loss on `sample`, over every parameter of a
// freshly initialized network.
double gradient_check(const ActionModelSpec& spec, const Vocabulary& vocab, const TransitionDataset& sample,
                      double epsilon);

// CSV `epoch,batch,loss` preceded by `#key=value` metadata lines.
void export_error_surface(std::ostream& out, const ErrorSurface& surface);
std::string export_error_surface(const ErrorSurface& surface);

// Versioned JSON, "fbdforge-model/1".
void save_model(std::ostream& out, const ActionModel& model);
ActionModel load_model(std::istream& in);

}  // namespace fbdforge
