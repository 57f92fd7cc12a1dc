#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "fbdforge/action_model.hpp"
#include "fbdforge/distribution.hpp"
#include "fbdforge/program.hpp"
#include "fbdforge/transition_dataset.hpp"

namespace fbdforge {

// One action model per design step. The model at step t reads a length-t
// prefix and proposes symbol t+1; the prior proposes symbol 1.
class Federation {
public:
    // Throws InvalidArgument unless models are non-empty, ordered by step
    // 1..N and share `vocab`.
    Federation(Vocabulary vocab, SymbolDistribution prior, std::vector<ActionModel> models);

    const Vocabulary& vocabulary() const noexcept { return vocab_; }
    const SymbolDistribution& prior() const noexcept { return prior_; }
    const std::vector<ActionModel>& models() const noexcept { return models_; }
    std::size_t max_steps() const noexcept { return models_.size(); }

    // 1-based.
    const ActionModel& model(std::size_t t) const;

    // Backend of the trained (non-fallback) models; `prior` if every step
    // fell back.
    Backend backend() const noexcept;

private:
    Vocabulary vocab_;
    SymbolDistribution prior_;
    std::vector<ActionModel> models_;
};

// `context` may hold datasets for any of the steps 1..N; several datasets
// for one step are concatenated.
Federation train_federation(const Corpus& corpus, const std::vector<TransitionDataset>& context,
                            const ActionModelSpec& spec, std::size_t max_steps);

enum class GenerationMode { argmax, sample };

struct GenerationConfig {
    GenerationMode mode = GenerationMode::argmax;
    std::optional<SymbolMultiset> budget;
    std::size_t max_steps = 1;
    std::uint64_t seed = 0;
    bool end_on_budget_exhaustion = true;
    // Symbols already placed by the engineer. They do not draw on the
    // budget, which is taken to be what remains.
    SymbolSeq prefix;
};

// Auto-accepts one symbol per design step. Stops at max_steps symbols (or
// N+1, whichever is smaller), when the budget runs out, or when masking
// leaves nothing selectable.
FbdProgram generate(const Federation& fed, const GenerationConfig& cfg);

struct StepMetrics {
    std::size_t step = 0;
    std::size_t samples = 0;
    double top1 = 0.0;
    double topk = 0.0;
    double mean_nll = 0.0;
};

std::vector<StepMetrics> evaluate_federation(const Federation& fed, const Corpus& held_out, std::size_t k);

// Directory layout: manifest.json ("fbdforge-federation/1") plus
// step-<t>.json per model.
void save_federation(const Federation& fed, const std::filesystem::path& dir);
Federation load_federation(const std::filesystem::path& dir);

}  // namespace fbdforge
