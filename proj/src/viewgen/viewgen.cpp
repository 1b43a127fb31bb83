#include "faithfill/viewgen/viewgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace faithfill::viewgen {

ImageBuffer composite_on_canvas(const ObjectCutout& cutout, double canvas_gray) {
    ImageBuffer out(cutout.height(), cutout.width());
    for (std::size_t y = 0; y < out.height(); ++y) {
        for (std::size_t x = 0; x < out.width(); ++x) {
            const double a = cutout.alpha_at(y, x);
            for (std::size_t c = 0; c < ImageBuffer::kChannels; ++c) {
                out.at(y, x, c) = a * cutout.color.at(y, x, c) + (1.0 - a) * canvas_gray;
            }
        }
    }
    return out;
}

namespace {

void check_hint(const ImageBuffer& image, const Hint& hint) {
    const auto outside = [&](std::size_t x, std::size_t y) { return x >= image.width() || y >= image.height(); };
    if (const auto* box = std::get_if<BoundingBox>(&hint)) {
        if (box->empty() || box->x1 > image.width() || box->y1 > image.height()) {
            throw ValidationError("box hint outside image bounds");
        }
    } else if (const auto* point = std::get_if<PointHint>(&hint)) {
        if (outside(point->x, point->y)) throw ValidationError("point hint outside image bounds");
    }
}

}  // namespace

ObjectCutout segment_object(const ImageBuffer& image, const Hint& hint, SegmenterBackend& backend,
                            std::string source_id) {
    check_hint(image, hint);
    std::vector<double> alpha = backend.segment(image, hint);
    if (alpha.size() != image.pixel_count()) {
        throw RuntimeFailure("segmenter '" + backend.name() + "' returned a matte of the wrong size");
    }

    BoundingBox bbox{image.width(), image.height(), 0, 0};
    ImageBuffer color(image.height(), image.width());
    bool any = false;
    for (std::size_t y = 0; y < image.height(); ++y) {
        for (std::size_t x = 0; x < image.width(); ++x) {
            double& a = alpha[y * image.width() + x];
            if (!std::isfinite(a)) throw RuntimeFailure("segmenter '" + backend.name() + "' returned non-finite alpha");
            a = std::clamp(a, 0.0, 1.0);
            if (a <= 0.0) continue;
            any = true;
            bbox.x0 = std::min(bbox.x0, x);
            bbox.y0 = std::min(bbox.y0, y);
            bbox.x1 = std::max(bbox.x1, x + 1);
            bbox.y1 = std::max(bbox.y1, y + 1);
            for (std::size_t c = 0; c < ImageBuffer::kChannels; ++c) color.at(y, x, c) = image.at(y, x, c);
        }
    }
    if (!any) throw SegmentationEmpty("segmentation empty: '" + backend.name() + "' found no object");
    return {std::move(color), std::move(alpha), bbox, std::move(source_id)};
}

ViewSet generate_views(const ObjectCutout& cutout, std::size_t n, ViewBackend& backend, double canvas_gray) {
    if (n < 1) throw ValidationError("view count must be >= 1");
    if (cutout.bbox.empty()) throw ValidationError("cutout is empty");
    const std::string who = "view backend '" + backend.name() + "'";

    SynthesizedViews out;
    try {
        out = backend.synthesize(cutout, n);
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw RuntimeFailure(who + " failed: " + e.what());
    }
    if (out.views.size() != n) {
        throw RuntimeFailure(who + " returned " + std::to_string(out.views.size()) + " views, expected " +
                             std::to_string(n));
    }
    const ImageBuffer original = composite_on_canvas(cutout, canvas_gray);
    for (std::size_t i = 0; i < n; ++i) {
        if (out.views[i].resolution() != original.resolution()) {
            throw RuntimeFailure(who + ": view " + std::to_string(i + 1) + " has a different resolution");
        }
    }
    if (!(out.views.front() == original)) {
        throw RuntimeFailure(who + ": view 1 is not the original cutout");
    }

    ViewSet set;
    set.views = std::move(out.views);
    for (std::size_t i = 0; i < n; ++i) {
        ViewProvenance p{backend.name(), i < out.parameters.size() ? out.parameters[i] : ParameterMap{}};
        p.parameters["view_index"] = std::to_string(i + 1);
        set.provenance.push_back(std::move(p));
    }
    return set;
}

}  // namespace faithfill::viewgen
