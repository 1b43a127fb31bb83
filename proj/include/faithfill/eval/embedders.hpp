#pragma once

#include "faithfill/core/image.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace faithfill::eval {

/// One feature map, channel-interleaved: (y * width + x) * channels + c.
/// Global embeddings are 1 x 1 maps.
struct FeatureMap {
    std::size_t channels = 0;
    std::size_t height = 1;
    std::size_t width = 1;
    std::vector<double> data;
};

using FeatureStack = std::vector<FeatureMap>;

/// Image -> features. Output shape is fixed per name; embedding is
/// deterministic. Names: clip, dino-vits16, lpips-net, dreamsim.
class EmbedderBackend {
public:
    virtual ~EmbedderBackend() = default;
    virtual std::string name() const = 0;
    virtual FeatureStack embed(const ImageBuffer& image) = 0;
    /// Per-layer, per-channel linear weights for the LPIPS distance; empty
    /// means unit weights.
    virtual std::vector<std::vector<double>> channel_weights() const { return {}; }
};

/// Cosine similarity of the embeddings; for multi-layer stacks, the mean of
/// per-layer cosines. A zero-norm embedding is an error.
double cosine_metric(const ImageBuffer& a, const ImageBuffer& b, EmbedderBackend& embedder);

/// Cosine between two stacks (mean over layers).
double cosine_similarity(const FeatureStack& a, const FeatureStack& b);

/// sum_l (1 / (H_l W_l)) sum_{h,w} || w_l ⊙ (f̂_a - f̂_b) ||^2, where f̂ is the
/// feature vector at (h, w) divided by its L2 norm (+1e-10).
double lpips_distance(const FeatureStack& a, const FeatureStack& b,
                      const std::vector<std::vector<double>>& channel_weights = {});

/// Backend-defined distance: the LPIPS formula for lpips-net, 1 - cosine for
/// dreamsim. Other embedders are rejected.
double perceptual_distance(const ImageBuffer& a, const ImageBuffer& b, EmbedderBackend& embedder);

/// Deterministic analytic embedders for CI.
/// clip:        8 x 8 area-pooled (2x - 1) colour grid plus a constant, one vector.
/// dino-vits16: per 16 x 16 patch mean and standard deviation per channel
///              plus a constant, one vector.
/// lpips-net:   three layers at pooling 1, 2 and 4, channels
///              (2x - 1 per colour, horizontal and vertical difference of luma).
/// dreamsim:    concatenation of the clip and dino stub vectors.
class StubEmbedder final : public EmbedderBackend {
public:
    explicit StubEmbedder(std::string name);
    std::string name() const override { return name_; }
    FeatureStack embed(const ImageBuffer& image) override;

private:
    std::string name_;
};

/// Adapter for a real embedder checkpoint invoked as
/// `<tool> --model NAME --input img.png --output feats.json`, the output being
/// {"layers": [{"channels": C, "height": H, "width": W, "data": [...]}, ...]}
/// and optionally "channel_weights": [[...], ...].
class ExternalEmbedder final : public EmbedderBackend {
public:
    ExternalEmbedder(std::string name, std::filesystem::path tool, std::chrono::milliseconds timeout);
    std::string name() const override { return name_; }
    FeatureStack embed(const ImageBuffer& image) override;
    std::vector<std::vector<double>> channel_weights() const override { return weights_; }

private:
    std::string name_;
    std::filesystem::path tool_;
    std::chrono::milliseconds timeout_;
    std::vector<std::vector<double>> weights_;
};

/// The four embedders behind the feature metrics; a null slot skips that metric.
struct EmbedderSet {
    std::unique_ptr<EmbedderBackend> clip;
    std::unique_ptr<EmbedderBackend> dino;
    std::unique_ptr<EmbedderBackend> lpips;
    std::unique_ptr<EmbedderBackend> dreamsim;
};

EmbedderSet stub_embedders();

/// External adapters resolved under FAITHFILL_BACKEND_DIR.
EmbedderSet external_embedders(std::chrono::milliseconds timeout);

}  // namespace faithfill::eval
