#include "faithfill/core/png_io.hpp"
#include "faithfill/core/process.hpp"
#include "faithfill/viewgen/viewgen.hpp"

#include <sstream>

namespace faithfill::viewgen {
namespace {

std::string join(const std::vector<double>& values, std::size_t count) {
    std::ostringstream os;
    for (std::size_t i = 0; i < count; ++i) {
        if (i) os << ',';
        os << values[i % values.size()];
    }
    return os.str();
}

void run_tool(const std::vector<std::string>& argv, std::chrono::milliseconds timeout, const std::string& who) {
    const ProcessResult result = run_process(argv, timeout);
    if (result.timed_out) throw RuntimeFailure(who + " timed out");
    if (result.exit_code != 0) throw RuntimeFailure(who + " exited with code " + std::to_string(result.exit_code));
}

}  // namespace

std::vector<double> ExternalSegmenter::segment(const ImageBuffer& image, const Hint& hint) {
    ScratchDir scratch("faithfill-sam");
    const auto input = scratch.path() / "input.png";
    const auto output = scratch.path() / "alpha.png";
    save_png(input, image);
    std::vector<std::string> argv{tool_.string(), "--input", input.string(), "--output", output.string()};
    if (const auto* box = std::get_if<BoundingBox>(&hint)) {
        argv.insert(argv.end(), {"--box", std::to_string(box->x0) + "," + std::to_string(box->y0) + "," +
                                              std::to_string(box->x1) + "," + std::to_string(box->y1)});
    } else if (const auto* point = std::get_if<PointHint>(&hint)) {
        argv.insert(argv.end(), {"--point", std::to_string(point->x) + "," + std::to_string(point->y)});
    }
    run_tool(argv, timeout_, "segmenter 'sam'");

    std::size_t h = 0;
    std::size_t w = 0;
    auto alpha = load_gray_png(output, h, w);
    if (h != image.height() || w != image.width()) {
        throw RuntimeFailure("segmenter 'sam' returned a " + std::to_string(h) + "x" + std::to_string(w) + " matte");
    }
    return alpha;
}

SynthesizedViews ExternalViewBackend::synthesize(const ObjectCutout& cutout, std::size_t n) {
    ScratchDir scratch("faithfill-nerf");
    const auto input = scratch.path() / "view.png";
    const auto alpha = scratch.path() / "alpha.png";
    const auto out_dir = scratch.path() / "views";
    std::filesystem::create_directories(out_dir);
    const ImageBuffer original = composite_on_canvas(cutout, options_.canvas_gray);
    save_png(input, original);
    save_gray_png(alpha, cutout.alpha, cutout.height(), cutout.width());

    const std::string azimuths = join(options_.azimuths_deg, n);
    const std::string elevations = join(options_.elevations_deg, n);
    run_tool({tool_.string(), "--input", input.string(), "--alpha", alpha.string(), "--n", std::to_string(n),
              "--seed", std::to_string(options_.seed), "--azimuths", azimuths, "--elevations", elevations,
              "--out-dir", out_dir.string()},
             options_.timeout, "view backend 'nerf'");

    SynthesizedViews out;
    out.views.push_back(original);
    out.parameters.push_back({{"azimuth_deg", "0"}, {"elevation_deg", "0"}, {"seed", std::to_string(options_.seed)}});
    for (std::size_t i = 2; i <= n; ++i) {
        const auto path = out_dir / ("view_" + std::to_string(i) + ".png");
        try {
            out.views.push_back(resize_bilinear(load_png(path), original.resolution()));
        } catch (const std::exception& e) {
            throw RuntimeFailure("view backend 'nerf': view " + std::to_string(i) + ": " + e.what());
        }
        std::ostringstream az;
        std::ostringstream el;
        az << options_.azimuths_deg[(i - 1) % options_.azimuths_deg.size()];
        el << options_.elevations_deg[(i - 1) % options_.elevations_deg.size()];
        out.parameters.push_back({{"azimuth_deg", az.str()}, {"elevation_deg", el.str()},
                                  {"seed", std::to_string(options_.seed)}});
    }
    return out;
}

}  // namespace faithfill::viewgen
