#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fbdforge::nn {

struct LstmShape {
    std::size_t vocab = 0;
    std::size_t embedding = 0;
    std::size_t hidden = 0;

    bool operator==(const LstmShape&) const = default;
};

// Symbol embeddings feeding one LSTM layer whose final hidden state is
// projected to vocabulary logits.
//
// Row-major layouts:
//   embedding  vocab x embedding
//   w_gates    4*hidden x (embedding + hidden), gate blocks in order i, f, g, o
//   b_gates    4*hidden
//   w_out      vocab x hidden
//   b_out      vocab
struct LstmParams {
    LstmShape shape;
    std::vector<double> embedding;
    std::vector<double> w_gates;
    std::vector<double> b_gates;
    std::vector<double> w_out;
    std::vector<double> b_out;

    static LstmParams zeros(const LstmShape& shape);
    // Standard normal embeddings, Uniform(-1/sqrt(hidden), 1/sqrt(hidden))
    // weights, forget-gate bias 1.
    static LstmParams initialize(const LstmShape& shape, std::uint64_t seed);

    static constexpr std::size_t kTensorCount = 5;
    std::array<std::vector<double>*, kTensorCount> tensors();
    std::array<const std::vector<double>*, kTensorCount> tensors() const;

    std::size_t parameter_count() const;

    void fill(double value);
    // this += scale * other
    void add_scaled(const LstmParams& other, double scale);

    bool operator==(const LstmParams&) const = default;
};

// Softmax over the vocabulary after reading `tokens` (symbol indices).
std::vector<double> predict_probs(const LstmParams& params, std::span<const std::size_t> tokens);

// Adds weight * d(-log p[target]) / d(params) into `grads` and returns the
// unweighted negative log-likelihood.
double accumulate_gradients(const LstmParams& params, std::span<const std::size_t> tokens, std::size_t target,
                            double weight, LstmParams& grads);

}  // namespace fbdforge::nn
