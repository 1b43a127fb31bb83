#include "faithfill/eval/embedders.hpp"

#include "faithfill/core/error.hpp"
#include "faithfill/core/png_io.hpp"
#include "faithfill/core/process.hpp"
#include "faithfill/simd/kernels.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace faithfill::eval {

namespace {

constexpr double kNormEps = 1e-10;

void require_compatible(const FeatureStack& a, const FeatureStack& b) {
    if (a.size() != b.size() || a.empty()) throw ValidationError("feature stacks differ in layer count");
    for (std::size_t l = 0; l < a.size(); ++l) {
        if (a[l].channels != b[l].channels || a[l].height != b[l].height || a[l].width != b[l].width ||
            a[l].data.size() != a[l].channels * a[l].height * a[l].width || b[l].data.size() != a[l].data.size()) {
            throw ValidationError("feature layer " + std::to_string(l) + " shapes differ");
        }
    }
}

// Area average over `factor` x `factor` blocks (edge blocks are partial).
ImageBuffer pool(const ImageBuffer& image, std::size_t factor) {
    const std::size_t h = (image.height() + factor - 1) / factor;
    const std::size_t w = (image.width() + factor - 1) / factor;
    ImageBuffer out(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                double acc = 0.0;
                std::size_t n = 0;
                for (std::size_t yy = y * factor; yy < std::min(image.height(), (y + 1) * factor); ++yy) {
                    for (std::size_t xx = x * factor; xx < std::min(image.width(), (x + 1) * factor); ++xx) {
                        acc += image.at(yy, xx, c);
                        ++n;
                    }
                }
                out.at(y, x, c) = acc / static_cast<double>(n);
            }
        }
    }
    return out;
}

ImageBuffer pool_to(const ImageBuffer& image, std::size_t rows, std::size_t cols) {
    ImageBuffer out(rows, cols);
    for (std::size_t y = 0; y < rows; ++y) {
        const std::size_t y0 = y * image.height() / rows;
        const std::size_t y1 = std::max(y0 + 1, (y + 1) * image.height() / rows);
        for (std::size_t x = 0; x < cols; ++x) {
            const std::size_t x0 = x * image.width() / cols;
            const std::size_t x1 = std::max(x0 + 1, (x + 1) * image.width() / cols);
            for (std::size_t c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (std::size_t yy = y0; yy < y1; ++yy)
                    for (std::size_t xx = x0; xx < x1; ++xx) acc += image.at(yy, xx, c);
                out.at(y, x, c) = acc / static_cast<double>((y1 - y0) * (x1 - x0));
            }
        }
    }
    return out;
}

std::vector<double> clip_vector(const ImageBuffer& image) {
    const ImageBuffer grid = pool_to(image, 8, 8);
    std::vector<double> v;
    v.reserve(grid.data().size() + 1);
    for (double x : grid.data()) v.push_back(2.0 * x - 1.0);
    v.push_back(1.0);
    return v;
}

std::vector<double> dino_vector(const ImageBuffer& image) {
    constexpr std::size_t kPatch = 16;
    const std::size_t rows = std::max<std::size_t>(1, image.height() / kPatch);
    const std::size_t cols = std::max<std::size_t>(1, image.width() / kPatch);
    std::vector<double> v;
    v.reserve(rows * cols * 6 + 1);
    for (std::size_t py = 0; py < rows; ++py) {
        const std::size_t y0 = py * image.height() / rows;
        const std::size_t y1 = (py + 1) * image.height() / rows;
        for (std::size_t px = 0; px < cols; ++px) {
            const std::size_t x0 = px * image.width() / cols;
            const std::size_t x1 = (px + 1) * image.width() / cols;
            const double n = static_cast<double>((y1 - y0) * (x1 - x0));
            for (std::size_t c = 0; c < 3; ++c) {
                double s = 0.0, s2 = 0.0;
                for (std::size_t y = y0; y < y1; ++y) {
                    for (std::size_t x = x0; x < x1; ++x) {
                        const double val = image.at(y, x, c);
                        s += val;
                        s2 += val * val;
                    }
                }
                const double mean = s / n;
                v.push_back(2.0 * mean - 1.0);
                v.push_back(std::sqrt(std::max(0.0, s2 / n - mean * mean)));
            }
        }
    }
    v.push_back(1.0);
    return v;
}

FeatureMap lpips_layer(const ImageBuffer& image) {
    constexpr std::size_t kChannels = 5;
    FeatureMap map{kChannels, image.height(), image.width(), {}};
    map.data.resize(kChannels * image.pixel_count());
    auto luma = [&](std::size_t y, std::size_t x) {
        return (image.at(y, x, 0) + image.at(y, x, 1) + image.at(y, x, 2)) / 3.0;
    };
    for (std::size_t y = 0; y < image.height(); ++y) {
        for (std::size_t x = 0; x < image.width(); ++x) {
            double* f = &map.data[(y * image.width() + x) * kChannels];
            for (std::size_t c = 0; c < 3; ++c) f[c] = 2.0 * image.at(y, x, c) - 1.0;
            f[3] = x + 1 < image.width() ? luma(y, x + 1) - luma(y, x) : 0.0;
            f[4] = y + 1 < image.height() ? luma(y + 1, x) - luma(y, x) : 0.0;
        }
    }
    return map;
}

FeatureMap vector_map(std::vector<double> v) {
    FeatureMap map{v.size(), 1, 1, std::move(v)};
    return map;
}

}  // namespace

double cosine_similarity(const FeatureStack& a, const FeatureStack& b) {
    require_compatible(a, b);
    double total = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) {
        const double na = std::sqrt(simd::dot(a[l].data, a[l].data));
        const double nb = std::sqrt(simd::dot(b[l].data, b[l].data));
        if (na == 0.0 || nb == 0.0) {
            throw RuntimeFailure("zero-norm embedding in layer " + std::to_string(l));
        }
        total += simd::dot(a[l].data, b[l].data) / (na * nb);
    }
    return total / static_cast<double>(a.size());
}

double cosine_metric(const ImageBuffer& a, const ImageBuffer& b, EmbedderBackend& embedder) {
    return cosine_similarity(embedder.embed(a), embedder.embed(b));
}

double lpips_distance(const FeatureStack& a, const FeatureStack& b,
                      const std::vector<std::vector<double>>& channel_weights) {
    require_compatible(a, b);
    if (!channel_weights.empty() && channel_weights.size() != a.size()) {
        throw ValidationError("LPIPS weights do not match the layer count");
    }
    double total = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) {
        const auto& fa = a[l];
        const auto& fb = b[l];
        const std::size_t c = fa.channels;
        if (!channel_weights.empty() && channel_weights[l].size() != c) {
            throw ValidationError("LPIPS weights for layer " + std::to_string(l) + " have the wrong width");
        }
        const std::size_t pixels = fa.height * fa.width;
        double layer = 0.0;
        for (std::size_t p = 0; p < pixels; ++p) {
            const double* va = &fa.data[p * c];
            const double* vb = &fb.data[p * c];
            double sa = 0.0, sb = 0.0;
            for (std::size_t k = 0; k < c; ++k) {
                sa += va[k] * va[k];
                sb += vb[k] * vb[k];
            }
            const double norm_a = std::sqrt(sa) + kNormEps;
            const double norm_b = std::sqrt(sb) + kNormEps;
            for (std::size_t k = 0; k < c; ++k) {
                const double w = channel_weights.empty() ? 1.0 : channel_weights[l][k];
                const double d = w * (va[k] / norm_a - vb[k] / norm_b);
                layer += d * d;
            }
        }
        total += layer / static_cast<double>(pixels);
    }
    return total;
}

double perceptual_distance(const ImageBuffer& a, const ImageBuffer& b, EmbedderBackend& embedder) {
    const std::string name = embedder.name();
    if (name == "lpips-net") return lpips_distance(embedder.embed(a), embedder.embed(b), embedder.channel_weights());
    if (name == "dreamsim") return 1.0 - cosine_similarity(embedder.embed(a), embedder.embed(b));
    throw ValidationError("perceptual_distance needs lpips-net or dreamsim, got '" + name + "'");
}

StubEmbedder::StubEmbedder(std::string name) : name_(std::move(name)) {
    if (name_ != "clip" && name_ != "dino-vits16" && name_ != "lpips-net" && name_ != "dreamsim") {
        throw ValidationError("unknown embedder '" + name_ + "'");
    }
}

FeatureStack StubEmbedder::embed(const ImageBuffer& image) {
    if (name_ == "clip") return {vector_map(clip_vector(image))};
    if (name_ == "dino-vits16") return {vector_map(dino_vector(image))};
    if (name_ == "dreamsim") {
        auto v = clip_vector(image);
        const auto d = dino_vector(image);
        v.insert(v.end(), d.begin(), d.end());
        return {vector_map(std::move(v))};
    }
    return {lpips_layer(image), lpips_layer(pool(image, 2)), lpips_layer(pool(image, 4))};
}

ExternalEmbedder::ExternalEmbedder(std::string name, std::filesystem::path tool, std::chrono::milliseconds timeout)
    : name_(std::move(name)), tool_(std::move(tool)), timeout_(timeout) {}

FeatureStack ExternalEmbedder::embed(const ImageBuffer& image) {
    ScratchDir scratch("embed");
    const auto input = scratch.path() / "input.png";
    const auto output = scratch.path() / "features.json";
    save_png(input, image);
    const auto result =
        run_process({tool_.string(), "--model", name_, "--input", input.string(), "--output", output.string()},
                    timeout_);
    if (result.timed_out) throw RuntimeFailure("embedder '" + name_ + "' timed out");
    if (result.exit_code != 0) {
        throw RuntimeFailure("embedder '" + name_ + "' exited with code " + std::to_string(result.exit_code));
    }
    std::ifstream in(output);
    if (!in) throw RuntimeFailure("embedder '" + name_ + "' produced no output");
    try {
        const auto doc = nlohmann::json::parse(in);
        FeatureStack stack;
        for (const auto& layer : doc.at("layers")) {
            FeatureMap map{layer.at("channels").get<std::size_t>(), layer.at("height").get<std::size_t>(),
                           layer.at("width").get<std::size_t>(), layer.at("data").get<std::vector<double>>()};
            if (map.data.size() != map.channels * map.height * map.width) {
                throw RuntimeFailure("embedder '" + name_ + "' returned a malformed layer");
            }
            stack.push_back(std::move(map));
        }
        if (stack.empty()) throw RuntimeFailure("embedder '" + name_ + "' returned no layers");
        if (doc.contains("channel_weights")) {
            weights_ = doc.at("channel_weights").get<std::vector<std::vector<double>>>();
        }
        return stack;
    } catch (const nlohmann::json::exception& e) {
        throw RuntimeFailure("embedder '" + name_ + "' output is not valid: " + e.what());
    }
}

EmbedderSet stub_embedders() {
    EmbedderSet set;
    set.clip = std::make_unique<StubEmbedder>("clip");
    set.dino = std::make_unique<StubEmbedder>("dino-vits16");
    set.lpips = std::make_unique<StubEmbedder>("lpips-net");
    set.dreamsim = std::make_unique<StubEmbedder>("dreamsim");
    return set;
}

EmbedderSet external_embedders(std::chrono::milliseconds timeout) {
    const auto tool = backend_tool("embedder");
    EmbedderSet set;
    set.clip = std::make_unique<ExternalEmbedder>("clip", tool, timeout);
    set.dino = std::make_unique<ExternalEmbedder>("dino-vits16", tool, timeout);
    set.lpips = std::make_unique<ExternalEmbedder>("lpips-net", tool, timeout);
    set.dreamsim = std::make_unique<ExternalEmbedder>("dreamsim", tool, timeout);
    return set;
}

}  // namespace faithfill::eval
