#include "fbdforge/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fbdforge/errors.hpp"
#include "fbdforge/rng.hpp"

namespace fbdforge::nn {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct StepCache {
    std::vector<double> input;  // [embedding ; h_prev]
    std::vector<double> i, f, g, o;
    std::vector<double> c_prev, c, tanh_c;
};

struct ForwardPass {
    std::vector<StepCache> steps;
    std::vector<double> h;
    std::vector<double> probs;
};

ForwardPass run_forward(const LstmParams& p, std::span<const std::size_t> tokens) {
    const auto& [V, D, H] = p.shape;
    const std::size_t in = D + H;
    ForwardPass fp;
    fp.steps.reserve(tokens.size());
    std::vector<double> h(H, 0.0), c(H, 0.0);
    std::vector<double> z(4 * H);

    for (std::size_t tok : tokens) {
        if (tok >= V) throw InvalidArgument("token index out of range");
        StepCache sc;
        sc.input.resize(in);
        std::copy_n(p.embedding.begin() + static_cast<std::ptrdiff_t>(tok * D), D, sc.input.begin());
        std::copy(h.begin(), h.end(), sc.input.begin() + static_cast<std::ptrdiff_t>(D));

        for (std::size_t r = 0; r < 4 * H; ++r) {
            double acc = p.b_gates[r];
            const double* row = &p.w_gates[r * in];
            for (std::size_t k = 0; k < in; ++k) acc += row[k] * sc.input[k];
            z[r] = acc;
        }
        sc.i.resize(H);
        sc.f.resize(H);
        sc.g.resize(H);
        sc.o.resize(H);
        sc.c_prev = c;
        sc.c.resize(H);
        sc.tanh_c.resize(H);
        for (std::size_t j = 0; j < H; ++j) {
            sc.i[j] = sigmoid(z[j]);
            sc.f[j] = sigmoid(z[H + j]);
            sc.g[j] = std::tanh(z[2 * H + j]);
            sc.o[j] = sigmoid(z[3 * H + j]);
            sc.c[j] = sc.f[j] * c[j] + sc.i[j] * sc.g[j];
            sc.tanh_c[j] = std::tanh(sc.c[j]);
            h[j] = sc.o[j] * sc.tanh_c[j];
        }
        c = sc.c;
        fp.steps.push_back(std::move(sc));
    }

    fp.probs.resize(V);
    double max_logit = -INFINITY;
    for (std::size_t v = 0; v < V; ++v) {
        double acc = p.b_out[v];
        const double* row = &p.w_out[v * H];
        for (std::size_t j = 0; j < H; ++j) acc += row[j] * h[j];
        fp.probs[v] = acc;
        max_logit = std::max(max_logit, acc);
    }
    double z_sum = 0.0;
    for (auto& x : fp.probs) {
        x = std::exp(x - max_logit);
        z_sum += x;
    }
    for (auto& x : fp.probs) x /= z_sum;
    fp.h = std::move(h);
    return fp;
}

}  // namespace

LstmParams LstmParams::zeros(const LstmShape& shape) {
    if (shape.vocab == 0 || shape.embedding == 0 || shape.hidden == 0)
        throw InvalidArgument("LSTM dimensions must be positive");
    LstmParams p;
    p.shape = shape;
    const auto& [V, D, H] = shape;
    p.embedding.assign(V * D, 0.0);
    p.w_gates.assign(4 * H * (D + H), 0.0);
    p.b_gates.assign(4 * H, 0.0);
    p.w_out.assign(V * H, 0.0);
    p.b_out.assign(V, 0.0);
    return p;
}

LstmParams LstmParams::initialize(const LstmShape& shape, std::uint64_t seed) {
    LstmParams p = zeros(shape);
    SeededGenerator gen(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
    auto uniform = [&gen](double a) { return (2.0 * gen.uniform01() - 1.0) * a; };
    // Box-Muller on our own uniforms keeps the draw identical across standard libraries.
    auto normal = [&gen] {
        const double u1 = 1.0 - gen.uniform01();
        const double u2 = gen.uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    };
    for (auto& x : p.embedding) x = normal();
    for (auto& x : p.w_gates) x = uniform(scale);
    for (auto& x : p.w_out) x = uniform(scale);
    for (std::size_t j = 0; j < shape.hidden; ++j) p.b_gates[shape.hidden + j] = 1.0;
    return p;
}

std::array<std::vector<double>*, LstmParams::kTensorCount> LstmParams::tensors() {
    return {&embedding, &w_gates, &b_gates, &w_out, &b_out};
}

std::array<const std::vector<double>*, LstmParams::kTensorCount> LstmParams::tensors() const {
    return {&embedding, &w_gates, &b_gates, &w_out, &b_out};
}

std::size_t LstmParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto* t : tensors()) n += t->size();
    return n;
}

void LstmParams::fill(double value) {
    for (auto* t : tensors()) std::fill(t->begin(), t->end(), value);
}

void LstmParams::add_scaled(const LstmParams& other, double scale) {
    if (!(shape == other.shape)) throw InvalidArgument("LSTM shape mismatch");
    auto dst = tensors();
    auto src = other.tensors();
    for (std::size_t k = 0; k < kTensorCount; ++k) {
        auto& d = *dst[k];
        const auto& s = *src[k];
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
    }
}

std::vector<double> predict_probs(const LstmParams& params, std::span<const std::size_t> tokens) {
    return run_forward(params, tokens).probs;
}

double accumulate_gradients(const LstmParams& p, std::span<const std::size_t> tokens, std::size_t target,
                            double weight, LstmParams& grads) {
    const auto& [V, D, H] = p.shape;
    if (target >= V) throw InvalidArgument("target index out of range");
    if (!(grads.shape == p.shape)) throw InvalidArgument("gradient buffer shape mismatch");
    const std::size_t in = D + H;
    auto fp = run_forward(p, tokens);
    const double nll = -std::log(std::max(fp.probs[target], 1e-300));

    std::vector<double> dlogits = fp.probs;
    dlogits[target] -= 1.0;
    for (auto& x : dlogits) x *= weight;

    std::vector<double> dh(H, 0.0);
    for (std::size_t v = 0; v < V; ++v) {
        grads.b_out[v] += dlogits[v];
        double* grow = &grads.w_out[v * H];
        const double* row = &p.w_out[v * H];
        for (std::size_t j = 0; j < H; ++j) {
            grow[j] += dlogits[v] * fp.h[j];
            dh[j] += row[j] * dlogits[v];
        }
    }

    std::vector<double> dc(H, 0.0);
    std::vector<double> dz(4 * H);
    std::vector<double> dinput(in);
    for (std::size_t t = tokens.size(); t-- > 0;) {
        const auto& sc = fp.steps[t];
        for (std::size_t j = 0; j < H; ++j) {
            const double d_o = dh[j] * sc.tanh_c[j];
            dc[j] += dh[j] * sc.o[j] * (1.0 - sc.tanh_c[j] * sc.tanh_c[j]);
            const double d_i = dc[j] * sc.g[j];
            const double d_g = dc[j] * sc.i[j];
            const double d_f = dc[j] * sc.c_prev[j];
            dz[j] = d_i * sc.i[j] * (1.0 - sc.i[j]);
            dz[H + j] = d_f * sc.f[j] * (1.0 - sc.f[j]);
            dz[2 * H + j] = d_g * (1.0 - sc.g[j] * sc.g[j]);
            dz[3 * H + j] = d_o * sc.o[j] * (1.0 - sc.o[j]);
            dc[j] *= sc.f[j];
        }
        std::fill(dinput.begin(), dinput.end(), 0.0);
        for (std::size_t r = 0; r < 4 * H; ++r) {
            grads.b_gates[r] += dz[r];
            double* grow = &grads.w_gates[r * in];
            const double* row = &p.w_gates[r * in];
            for (std::size_t k = 0; k < in; ++k) {
                grow[k] += dz[r] * sc.input[k];
                dinput[k] += row[k] * dz[r];
            }
        }
        double* gemb = &grads.embedding[tokens[t] * D];
        for (std::size_t k = 0; k < D; ++k) gemb[k] += dinput[k];
        for (std::size_t j = 0; j < H; ++j) dh[j] = dinput[D + j];
    }
    return nll;
}

}  // namespace fbdforge::nn
