#pragma once

#include "faithfill/core/error.hpp"
#include "faithfill/core/image.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <array>
#include <optional>
#include <vector>

namespace faithfill::viewgen {

/// Half-open pixel box [x0, x1) x [y0, y1).
struct BoundingBox {
    std::size_t x0 = 0;
    std::size_t y0 = 0;
    std::size_t x1 = 0;
    std::size_t y1 = 0;

    bool empty() const { return x1 <= x0 || y1 <= y0; }
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct PointHint {
    std::size_t x = 0;
    std::size_t y = 0;
};

/// Optional designation of the object of interest.
using Hint = std::variant<std::monostate, BoundingBox, PointHint>;

/// Object colour plus alpha matte, same size as the source image.
struct ObjectCutout {
    ImageBuffer color;           // zero wherever alpha == 0
    std::vector<double> alpha;   // row-major, values in [0, 1]
    BoundingBox bbox;            // tight box around alpha > 0
    std::string source_id;

    std::size_t height() const { return color.height(); }
    std::size_t width() const { return color.width(); }
    double alpha_at(std::size_t y, std::size_t x) const { return alpha[y * color.width() + x]; }
};

class SegmentationEmpty : public RuntimeFailure {
public:
    using RuntimeFailure::RuntimeFailure;
};

using ParameterMap = std::map<std::string, std::string>;

class SegmenterBackend {
public:
    virtual ~SegmenterBackend() = default;
    virtual std::string name() const = 0;
    /// Alpha matte with the image's dimensions; all zero when nothing was found.
    virtual std::vector<double> segment(const ImageBuffer& image, const Hint& hint) = 0;
};

struct ViewProvenance {
    std::string backend;
    ParameterMap parameters;
};

struct ViewSet {
    std::vector<ImageBuffer> views;  // views[0] is the original
    std::vector<ViewProvenance> provenance;

    std::size_t count() const { return views.size(); }
    Resolution resolution() const { return views.front().resolution(); }
};

struct SynthesizedViews {
    std::vector<ImageBuffer> views;
    std::vector<ParameterMap> parameters;
};

class ViewBackend {
public:
    virtual ~ViewBackend() = default;
    virtual std::string name() const = 0;
    /// Returns exactly n views; view 1 must equal composite_on_canvas(cutout).
    virtual SynthesizedViews synthesize(const ObjectCutout& cutout, std::size_t n) = 0;
};

/// alpha * colour + (1 - alpha) * gray, per pixel.
ImageBuffer composite_on_canvas(const ObjectCutout& cutout, double canvas_gray);

/// Builds a cutout from a backend matte. Throws ValidationError for hints
/// outside the image, SegmentationEmpty when the matte is all zero.
ObjectCutout segment_object(const ImageBuffer& image, const Hint& hint, SegmenterBackend& backend,
                            std::string source_id = {});

/// Wraps backend output into a ViewSet and checks count, uniform resolution
/// and the original-first contract. Errors name the backend and view index.
ViewSet generate_views(const ObjectCutout& cutout, std::size_t n, ViewBackend& backend, double canvas_gray);

/// Colour-distance threshold segmenter. The background colour is the
/// per-channel median of the border pixels unless given explicitly.
class ThresholdSegmenter final : public SegmenterBackend {
public:
    struct Options {
        double threshold = 0.2;  // Euclidean RGB distance / sqrt(3)
        std::optional<std::array<double, 3>> background;
    };
    ThresholdSegmenter() = default;
    explicit ThresholdSegmenter(Options options) : options_(options) {}

    std::string name() const override { return "toy-threshold"; }
    std::vector<double> segment(const ImageBuffer& image, const Hint& hint) override;

private:
    Options options_;
};

/// Seeded random affine + flip views of the cutout on a gray canvas.
class AffineViewBackend final : public ViewBackend {
public:
    struct Options {
        std::uint64_t seed = 0;
        double canvas_gray = 0.5;
        double max_rotation_deg = 30.0;
        double min_scale = 0.8;
        double max_scale = 1.2;
        double max_shift = 0.1;  // fraction of the image size
        double flip_probability = 0.5;
    };
    AffineViewBackend() = default;
    explicit AffineViewBackend(Options options) : options_(options) {}

    std::string name() const override { return "toy-affine"; }
    SynthesizedViews synthesize(const ObjectCutout& cutout, std::size_t n) override;

private:
    Options options_;
};

/// Adapter for an external promptable segmenter (e.g. SAM) invoked as
/// `<tool> --input in.png --output alpha.png [--box x0,y0,x1,y1 | --point x,y]`.
class ExternalSegmenter final : public SegmenterBackend {
public:
    ExternalSegmenter(std::filesystem::path tool, std::chrono::milliseconds timeout)
        : tool_(std::move(tool)), timeout_(timeout) {}

    std::string name() const override { return "sam"; }
    std::vector<double> segment(const ImageBuffer& image, const Hint& hint) override;

private:
    std::filesystem::path tool_;
    std::chrono::milliseconds timeout_;
};

/// Adapter for an external multi-view synthesizer (e.g. a diffusion NeRF)
/// invoked as `<tool> --input view.png --alpha alpha.png --n N --seed S
/// --azimuths a,b,.. --elevations a,b,.. --out-dir DIR`, producing
/// DIR/view_1.png .. DIR/view_N.png. View 1 is replaced by the exact canvas
/// composite so the original-first contract holds for any tool.
class ExternalViewBackend final : public ViewBackend {
public:
    struct Options {
        std::uint64_t seed = 0;
        double canvas_gray = 0.5;
        std::vector<double> azimuths_deg{0.0, 60.0, 120.0, 180.0, 240.0, 300.0};
        std::vector<double> elevations_deg{0.0, 15.0, -15.0, 15.0, -15.0, 15.0};
        std::chrono::milliseconds timeout{std::chrono::minutes(10)};
    };
    ExternalViewBackend(std::filesystem::path tool, Options options)
        : tool_(std::move(tool)), options_(std::move(options)) {}

    std::string name() const override { return "nerf"; }
    SynthesizedViews synthesize(const ObjectCutout& cutout, std::size_t n) override;

private:
    std::filesystem::path tool_;
    Options options_;
};

}  // namespace faithfill::viewgen
