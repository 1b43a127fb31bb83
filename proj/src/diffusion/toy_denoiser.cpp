#include "faithfill/diffusion/toy_denoiser.hpp"

#include "faithfill/core/error.hpp"
#include "faithfill/core/rng.hpp"
#include "faithfill/simd/kernels.hpp"

#include <cctype>
#include <cmath>
#include <string>

namespace faithfill::diffusion {
namespace {

constexpr std::size_t kControlInputs = 5;  // masked latent (4) + mask (1)

std::vector<double> random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double std_dev) {
    std::vector<double> m(rows * cols);
    for (double& v : m) v = rng.normal() * std_dev;
    return m;
}

std::vector<double> transpose(std::span<const double> m, std::size_t rows, std::size_t cols) {
    std::vector<double> t(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = m[r * cols + c];
    }
    return t;
}

/// out (m x n) += scale * left^T right, with left (rows x m), right (rows x n).
void accumulate_tn(std::span<const double> left, std::span<const double> right, std::size_t rows, std::size_t m,
                   std::size_t n, double scale, std::span<double> out) {
    for (std::size_t p = 0; p < rows; ++p) {
        const auto right_row = right.subspan(p * n, n);
        for (std::size_t i = 0; i < m; ++i) {
            const double coeff = scale * left[p * m + i];
            if (coeff != 0.0) simd::axpy(coeff, right_row, out.subspan(i * n, n));
        }
    }
}

void add_row_bias(std::span<double> m, std::size_t rows, std::span<const double> bias) {
    const std::size_t cols = bias.size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) m[r * cols + c] += bias[c];
    }
}

std::uint64_t hash_token(std::string_view token) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : token) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

struct ToyDenoiser::Activations {
    std::size_t pixels = 0;
    std::vector<double> features;   // P x 11
    std::vector<double> control;    // P x 5 (empty when the branch is off)
    std::vector<double> condition;  // D
    std::vector<double> hidden1;    // P x H, after tanh
    std::vector<double> hidden2;    // P x H, after tanh
    std::vector<double> output;     // P x 4
};

ToyDenoiser::ToyDenoiser(ToyDenoiserConfig config) : config_(config), codec_(config.latent_factor) {
    const std::size_t h = config_.hidden;
    const std::size_t d = config_.condition_width;
    if (h < 2 || d < 2) throw ValidationError("toy denoiser needs hidden and condition widths >= 2");

    Rng rng(config_.base_seed);
    w_in_ = random_matrix(rng, h, kFeatures, 1.0 / std::sqrt(static_cast<double>(kFeatures)));
    b_in_ = random_matrix(rng, h, 1, 0.1);
    w_cond_ = random_matrix(rng, h, d, 1.0 / std::sqrt(static_cast<double>(d)));
    w_mid_ = random_matrix(rng, h, h, 1.0 / std::sqrt(static_cast<double>(h)));
    b_mid_ = random_matrix(rng, h, 1, 0.1);
    w_out_ = random_matrix(rng, kLatentChannels, h, 1.0 / std::sqrt(static_cast<double>(h)));
    b_out_ = random_matrix(rng, kLatentChannels, 1, 0.1);
    w_text_ = random_matrix(rng, d, d, 1.0 / std::sqrt(static_cast<double>(d)));
    w_control_ = random_matrix(rng, h, kControlInputs, 0.5 / std::sqrt(static_cast<double>(kControlInputs)));

    reset_lora();
}

void ToyDenoiser::reset_lora() {
    Rng rng(config_.lora_seed);
    lora_ = {};
    lora_.backend = descriptor();
    lora_.layers.push_back(
        make_lora_layer("unet.in", config_.hidden, kFeatures, config_.lora_rank, config_.lora_scale, rng));
    lora_.layers.push_back(
        make_lora_layer("unet.mid", config_.hidden, config_.hidden, config_.lora_rank, config_.lora_scale, rng));
    lora_.layers.push_back(make_lora_layer("text.proj", config_.condition_width, config_.condition_width,
                                           config_.text_lora_rank, config_.lora_scale, rng));
}

std::string ToyDenoiser::descriptor() const {
    return "toy;hidden=" + std::to_string(config_.hidden) + ";cond=" + std::to_string(config_.condition_width) +
           ";factor=" + std::to_string(config_.latent_factor) + ";base_seed=" + std::to_string(config_.base_seed) +
           ";control=" + (config_.control_branch ? "1" : "0");
}

PromptEmbedding ToyDenoiser::encode_prompt(std::string_view prompt) const {
    const std::size_t d = config_.condition_width;
    PromptEmbedding out{std::string(prompt), std::vector<double>(d, 0.0), {}};
    std::size_t tokens = 0;
    std::string token;
    const auto flush = [&] {
        if (token.empty()) return;
        Rng rng(hash_token(token));
        for (double& v : out.token_features) v += rng.normal() / std::sqrt(static_cast<double>(d));
        ++tokens;
        token.clear();
    };
    for (char ch : prompt) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else {
            flush();
        }
    }
    flush();
    if (tokens > 0) {
        for (double& v : out.token_features) v /= static_cast<double>(tokens);
    }
    out.vector = condition_vector(out.token_features);
    return out;
}

std::vector<double> ToyDenoiser::condition_vector(std::span<const double> token_features) const {
    const std::size_t d = config_.condition_width;
    std::vector<double> cond(d);
    simd::matmul_nt(token_features, 1, d, w_text_, d, cond);
    apply_lora_batch(token_features, 1, lora_.layer("text.proj"), cond);
    return cond;
}

ToyDenoiser::Activations ToyDenoiser::forward(const DenoiserInput& input) const {
    const LatentTensor& z = input.noisy;
    if (z.channels() != kLatentChannels) throw ValidationError("toy denoiser expects 4 latent channels");
    require_same_shape(z, input.masked_latent, "toy denoiser masked latent");
    if (input.mask.size() != z.pixels()) throw ValidationError("toy denoiser: mask size does not match latent");
    if (input.condition.token_features.size() != config_.condition_width) {
        throw ValidationError("toy denoiser: condition width mismatch");
    }

    const std::size_t p = z.pixels();
    const std::size_t h = config_.hidden;
    const double signal = std::sqrt(input.alpha);
    const double noise = std::sqrt(1.0 - input.alpha);

    Activations act;
    act.pixels = p;
    act.features.resize(p * kFeatures);
    const auto zd = z.data();
    const auto md = input.masked_latent.data();
    for (std::size_t i = 0; i < p; ++i) {
        double* f = &act.features[i * kFeatures];
        for (std::size_t c = 0; c < kLatentChannels; ++c) {
            f[c] = zd[i * kLatentChannels + c];
            f[kLatentChannels + c] = md[i * kLatentChannels + c];
        }
        f[8] = input.mask[i];
        f[9] = signal;
        f[10] = noise;
    }

    // The condition is recomputed from the pooled tokens so the text adapter's
    // current state is always the one being differentiated.
    act.condition = condition_vector(input.condition.token_features);
    std::vector<double> cond_bias(h);
    simd::matmul_nt(act.condition, 1, config_.condition_width, w_cond_, h, cond_bias);
    for (std::size_t j = 0; j < h; ++j) cond_bias[j] += b_in_[j];

    act.hidden1.resize(p * h);
    simd::matmul_nt(act.features, p, kFeatures, w_in_, h, act.hidden1);
    apply_lora_batch(act.features, p, lora_.layer("unet.in"), act.hidden1);
    add_row_bias(act.hidden1, p, cond_bias);
    for (double& v : act.hidden1) v = std::tanh(v);

    act.hidden2.resize(p * h);
    simd::matmul_nt(act.hidden1, p, h, w_mid_, h, act.hidden2);
    apply_lora_batch(act.hidden1, p, lora_.layer("unet.mid"), act.hidden2);
    add_row_bias(act.hidden2, p, b_mid_);
    if (config_.control_branch) {
        act.control.resize(p * kControlInputs);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t c = 0; c < kControlInputs; ++c) act.control[i * kControlInputs + c] = act.features[i * kFeatures + 4 + c];
        }
        std::vector<double> control_out(p * h);
        simd::matmul_nt(act.control, p, kControlInputs, w_control_, h, control_out);
        simd::axpy(1.0, control_out, act.hidden2);
    }
    for (double& v : act.hidden2) v = std::tanh(v);

    act.output.resize(p * kLatentChannels);
    simd::matmul_nt(act.hidden2, p, h, w_out_, kLatentChannels, act.output);
    add_row_bias(act.output, p, b_out_);
    return act;
}

LatentTensor ToyDenoiser::predict_noise(const DenoiserInput& input) const {
    Activations act = forward(input);
    LatentTensor out(kLatentChannels, input.noisy.height(), input.noisy.width());
    std::copy(act.output.begin(), act.output.end(), out.data().begin());
    return out;
}

void ToyDenoiser::accumulate_lora_gradients(const DenoiserInput& input, const LatentTensor& output_grad,
                                            LoraGradients& grads) const {
    require_same_shape(input.noisy, output_grad, "toy denoiser output gradient");
    if (grads.layers.size() != lora_.layers.size()) throw ValidationError("gradient buffer does not match LoRA layers");
    const Activations act = forward(input);
    const std::size_t p = act.pixels;
    const std::size_t h = config_.hidden;
    const std::size_t d = config_.condition_width;
    const auto g_out = output_grad.data();

    const LoraLayer& in_layer = lora_.layers[0];
    const LoraLayer& mid_layer = lora_.layers[1];
    const LoraLayer& text_layer = lora_.layers[2];
    LoraLayerGrad& in_grad = grads.layers[0];
    LoraLayerGrad& mid_grad = grads.layers[1];
    LoraLayerGrad& text_grad = grads.layers[2];

    // Output head (frozen): d hidden2 = g W_out, through tanh.
    std::vector<double> delta2(p * h);
    simd::matmul_nt(g_out, p, kLatentChannels, transpose(w_out_, kLatentChannels, h), h, delta2);
    for (std::size_t i = 0; i < delta2.size(); ++i) delta2[i] *= 1.0 - act.hidden2[i] * act.hidden2[i];

    // Mid layer LoRA: W_eff = W_mid + s B A.
    const std::size_t r_mid = mid_layer.rank;
    std::vector<double> u2(p * r_mid);  // hidden1 A^T
    simd::matmul_nt(act.hidden1, p, h, mid_layer.a, r_mid, u2);
    std::vector<double> v2(p * r_mid);  // delta2 B
    simd::matmul_nt(delta2, p, h, transpose(mid_layer.b, h, r_mid), r_mid, v2);
    accumulate_tn(delta2, u2, p, h, r_mid, mid_layer.scale, mid_grad.b);
    accumulate_tn(v2, act.hidden1, p, r_mid, h, mid_layer.scale, mid_grad.a);

    // d hidden1 = delta2 W_eff, through tanh.
    std::vector<double> delta1(p * h);
    simd::matmul_nt(delta2, p, h, transpose(w_mid_, h, h), h, delta1);
    std::vector<double> lora_back(p * h);
    simd::matmul_nt(v2, p, r_mid, transpose(mid_layer.a, r_mid, h), h, lora_back);
    simd::axpy(mid_layer.scale, lora_back, delta1);
    for (std::size_t i = 0; i < delta1.size(); ++i) delta1[i] *= 1.0 - act.hidden1[i] * act.hidden1[i];

    // Input layer LoRA.
    const std::size_t r_in = in_layer.rank;
    std::vector<double> u1(p * r_in);
    simd::matmul_nt(act.features, p, kFeatures, in_layer.a, r_in, u1);
    std::vector<double> v1(p * r_in);
    simd::matmul_nt(delta1, p, h, transpose(in_layer.b, h, r_in), r_in, v1);
    accumulate_tn(delta1, u1, p, h, r_in, in_layer.scale, in_grad.b);
    accumulate_tn(v1, act.features, p, r_in, kFeatures, in_layer.scale, in_grad.a);

    // Condition path: d cond = W_c^T sum_p delta1_p, then the text adapter.
    std::vector<double> delta1_sum(h, 0.0);
    for (std::size_t i = 0; i < p; ++i) simd::axpy(1.0, std::span<const double>(delta1).subspan(i * h, h), delta1_sum);
    std::vector<double> d_cond(d);
    simd::matmul_nt(delta1_sum, 1, h, transpose(w_cond_, h, d), d, d_cond);

    const auto& tokens = input.condition.token_features;
    const std::size_t r_text = text_layer.rank;
    std::vector<double> projected(r_text);  // A e
    simd::matmul_nt(tokens, 1, d, text_layer.a, r_text, projected);
    std::vector<double> back(r_text);       // B^T d_cond
    simd::matmul_nt(d_cond, 1, d, transpose(text_layer.b, d, r_text), r_text, back);
    accumulate_tn(d_cond, projected, 1, d, r_text, text_layer.scale, text_grad.b);
    accumulate_tn(back, tokens, 1, r_text, d, text_layer.scale, text_grad.a);
}

std::vector<double> ToyDenoiser::frozen_parameters() const {
    std::vector<double> all;
    for (const auto* block : {&w_in_, &b_in_, &w_cond_, &w_mid_, &b_mid_, &w_out_, &b_out_, &w_text_, &w_control_}) {
        all.insert(all.end(), block->begin(), block->end());
    }
    return all;
}

}  // namespace faithfill::diffusion
