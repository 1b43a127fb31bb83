#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace faithfill {
class Rng;
}

namespace faithfill::diffusion {

/// Low-rank residual for one frozen (out x in) weight W:
///   W_eff = W + scale * B A,  A: rank x in,  B: out x rank.
struct LoraLayer {
    std::string name;
    std::size_t out_dim = 0;
    std::size_t in_dim = 0;
    std::size_t rank = 0;
    double scale = 1.0;
    std::vector<double> a;  // rank x in, row-major
    std::vector<double> b;  // out x rank, row-major

    std::size_t parameter_count() const { return a.size() + b.size(); }

    /// out x in matrix scale * B A.
    std::vector<double> delta() const;

    friend bool operator==(const LoraLayer&, const LoraLayer&) = default;
};

/// Zero B and Gaussian A with std 1/rank; rank must satisfy 1 <= rank < min(out, in).
LoraLayer make_lora_layer(std::string name, std::size_t out_dim, std::size_t in_dim, std::size_t rank, double scale,
                          Rng& rng);

/// Gradients laid out exactly like the layer's a/b.
struct LoraLayerGrad {
    std::vector<double> a;
    std::vector<double> b;
};

struct LoraWeights {
    std::vector<LoraLayer> layers;
    std::uint64_t schedule_fingerprint = 0;
    std::string backend;  // descriptor of the base model these adapt

    const LoraLayer& layer(std::string_view name) const;
    LoraLayer& layer(std::string_view name);
    std::size_t parameter_count() const;

    friend bool operator==(const LoraWeights&, const LoraWeights&) = default;
};

struct LoraGradients {
    std::vector<LoraLayerGrad> layers;  // parallel to LoraWeights::layers

    static LoraGradients zeros_like(const LoraWeights& weights);
    void set_zero();
};

/// base_output + scale * B (A x) for a single input vector. The frozen base
/// output is passed in; nothing outside the returned vector is touched.
std::vector<double> apply_lora(std::span<const double> base_output, std::span<const double> layer_input,
                               const LoraLayer& lora);

/// Same for a batch of row vectors: base (rows x out), input (rows x in).
/// Accumulates into `output`, which must hold the base product.
void apply_lora_batch(std::span<const double> input, std::size_t rows, const LoraLayer& lora,
                      std::span<double> output);

// Binary container, little-endian:
//   8 bytes   magic "FFLORA\0\1"
//   u32       format version (1)
//   u64       schedule fingerprint
//   u32 + n   backend descriptor (UTF-8)
//   u32       layer count
//   per layer: u32 + n name, u32 out_dim, u32 in_dim, u32 rank, f64 scale,
//              f64[rank*in] A row-major, f64[out*rank] B row-major
void save_lora(const std::filesystem::path& path, const LoraWeights& weights);
LoraWeights load_lora(const std::filesystem::path& path);

}  // namespace faithfill::diffusion
