#include "faithfill/eval/report.hpp"

#include "faithfill/core/error.hpp"
#include "faithfill/core/png_io.hpp"
#include "faithfill/eval/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace faithfill::eval {

namespace {

struct Box {
    std::size_t x0, y0, x1, y1;
};

// Bounding box of the fill region, grown to at least the SSIM window.
Box mask_box(const BinaryMask& mask) {
    Box box{mask.width(), mask.height(), 0, 0};
    for (std::size_t y = 0; y < mask.height(); ++y) {
        for (std::size_t x = 0; x < mask.width(); ++x) {
            if (!mask.at(y, x)) continue;
            box.x0 = std::min(box.x0, x);
            box.y0 = std::min(box.y0, y);
            box.x1 = std::max(box.x1, x + 1);
            box.y1 = std::max(box.y1, y + 1);
        }
    }
    if (box.x1 == 0) throw ValidationError("mask-only evaluation needs a non-empty target mask");
    auto grow = [](std::size_t& lo, std::size_t& hi, std::size_t limit) {
        while (hi - lo < kSsimWindow && hi - lo < limit) {
            if (hi < limit) ++hi;
            if (hi - lo < kSsimWindow && lo > 0) --lo;
        }
    };
    grow(box.x0, box.x1, mask.width());
    grow(box.y0, box.y1, mask.height());
    return box;
}

ImageBuffer crop(const ImageBuffer& image, const Box& box) {
    ImageBuffer out(box.y1 - box.y0, box.x1 - box.x0);
    for (std::size_t y = box.y0; y < box.y1; ++y)
        for (std::size_t x = box.x0; x < box.x1; ++x)
            for (std::size_t c = 0; c < 3; ++c) out.at(y - box.y0, x - box.x0, c) = image.at(y, x, c);
    return out;
}

std::string format_value(std::optional<double> v) {
    if (!v) return "-";
    if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

// Display width in code points (the arrows are multi-byte UTF-8).
std::size_t display_width(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
}

std::string pad(const std::string& s, std::size_t width) {
    return s + std::string(width - std::min(width, display_width(s)), ' ');
}

std::string rtrim(std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

}  // namespace

std::string dataset_label(dataset::DatasetKind kind) {
    return kind == dataset::DatasetKind::dreambooth_pairs ? "DreamBooth Dataset" : "FaithFill Dataset";
}

MetricValues evaluate_pair(const ImageBuffer& generated, const ImageBuffer& target, const BinaryMask& mask,
                           EmbedderSet& embedders, const EvalOptions& options) {
    ImageBuffer gen = resize_bilinear(generated, options.resolution);
    ImageBuffer tgt = resize_bilinear(target, options.resolution);
    MetricValues v;
    if (options.mask_only) {
        const BinaryMask m = resize_nearest(mask, options.resolution);
        v.psnr = psnr_masked(gen, tgt, m);
        const Box box = mask_box(m);
        gen = crop(gen, box);
        tgt = crop(tgt, box);
    } else {
        v.psnr = psnr(gen, tgt);
    }
    v.ssim = ssim(gen, tgt);
    if (embedders.lpips) v.lpips = perceptual_distance(gen, tgt, *embedders.lpips);
    if (embedders.dreamsim) v.dreamsim = perceptual_distance(gen, tgt, *embedders.dreamsim);
    if (embedders.dino) v.dino = cosine_metric(gen, tgt, *embedders.dino);
    if (embedders.clip) v.clip = cosine_metric(gen, tgt, *embedders.clip);
    return v;
}

MetricValues mean_values(const std::vector<PairMetrics>& pairs) {
    MetricValues m;
    if (pairs.empty()) {
        m.ssim = m.psnr = std::numeric_limits<double>::quiet_NaN();
        return m;
    }
    const double n = static_cast<double>(pairs.size());
    auto mean_opt = [&](std::optional<double> MetricValues::*field) -> std::optional<double> {
        double total = 0.0;
        for (const auto& p : pairs) {
            if (!(p.values.*field)) return std::nullopt;
            total += *(p.values.*field);
        }
        return total / n;
    };
    for (const auto& p : pairs) {
        m.ssim += p.values.ssim;
        m.psnr += p.values.psnr;
    }
    m.ssim /= n;
    m.psnr /= n;
    m.lpips = mean_opt(&MetricValues::lpips);
    m.dreamsim = mean_opt(&MetricValues::dreamsim);
    m.dino = mean_opt(&MetricValues::dino);
    m.clip = mean_opt(&MetricValues::clip);
    return m;
}

MetricReport evaluate_dataset(const std::filesystem::path& results_dir, const dataset::DatasetManifest& manifest,
                              EmbedderSet& embedders, const EvalOptions& options) {
    MetricReport report;
    report.kind = manifest.kind;
    report.mask_only = options.mask_only;
    for (const auto& entry : manifest.entries) {
        const auto generated_path = results_dir / (entry.object_id + ".png");
        if (!std::filesystem::exists(generated_path)) {
            report.missing.push_back(entry.object_id);
            continue;
        }
        const auto pair = dataset::sample_pair(manifest, entry.object_id, options.seed);
        const ImageBuffer generated = load_png(generated_path);
        report.pairs.push_back(
            {entry.object_id, evaluate_pair(generated, pair.target, pair.target_mask, embedders, options)});
    }
    report.means = mean_values(report.pairs);
    return report;
}

nlohmann::json to_json(const MetricReport& report) {
    auto number = [](double v) -> nlohmann::json {
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        if (std::isnan(v)) return nullptr;
        return v;
    };
    auto values = [&](const MetricValues& v) {
        nlohmann::json doc{{"ssim", number(v.ssim)}, {"psnr", number(v.psnr)}};
        auto opt = [&](const char* key, std::optional<double> x) { doc[key] = x ? number(*x) : nlohmann::json(); };
        opt("lpips", v.lpips);
        opt("dreamsim", v.dreamsim);
        opt("dino", v.dino);
        opt("clip", v.clip);
        return doc;
    };
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : report.pairs) pairs.push_back({{"object_id", p.object_id}, {"metrics", values(p.values)}});
    return {{"kind", dataset::kind_name(report.kind)},
            {"mask_only", report.mask_only},
            {"groups", {{"low", {"ssim", "psnr", "lpips"}}, {"mid", {"dreamsim"}}, {"high", {"dino", "clip"}}}},
            {"pairs", pairs},
            {"missing", report.missing},
            {"warnings", report.missing.size()},
            {"means", values(report.means)}};
}

std::string render_table(const std::vector<TableRow>& rows) {
    const std::vector<std::string> headers{"SSIM ↑", "PSNR ↑", "LPIPS ↓", "DreamSIM ↓", "DINO ↑", "CLIP ↑"};
    std::vector<std::array<std::string, 6>> cells;
    for (const auto& r : rows) {
        cells.push_back({format_value(r.values.ssim), format_value(r.values.psnr), format_value(r.values.lpips),
                         format_value(r.values.dreamsim), format_value(r.values.dino), format_value(r.values.clip)});
    }
    std::array<std::size_t, 6> width{};
    for (std::size_t i = 0; i < 6; ++i) {
        width[i] = display_width(headers[i]);
        for (const auto& c : cells) width[i] = std::max(width[i], display_width(c[i]));
    }
    std::size_t dataset_w = display_width("Dataset");
    std::size_t method_w = display_width("Methodology");
    for (const auto& r : rows) {
        dataset_w = std::max(dataset_w, display_width(r.dataset));
        method_w = std::max(method_w, display_width(r.methodology));
    }

    // Groups: low = SSIM PSNR LPIPS, mid = DreamSIM, high = DINO CLIP.
    const std::array<std::pair<std::size_t, std::size_t>, 3> groups{{{0, 3}, {3, 4}, {4, 6}}};
    auto group_cells = [&](const auto& values) {
        std::string line;
        for (const auto& [begin, end] : groups) {
            line += " | ";
            for (std::size_t i = begin; i < end; ++i) {
                line += pad(values[i], width[i]);
                if (i + 1 < end) line += "  ";
            }
        }
        return line;
    };
    auto group_width = [&](std::size_t g) {
        std::size_t w = 0;
        for (std::size_t i = groups[g].first; i < groups[g].second; ++i) w += width[i] + (w ? 2 : 0);
        return w;
    };

    std::string out;
    out += rtrim(pad("Dataset", dataset_w) + " | " + pad("Methodology", method_w) + group_cells(headers)) + '\n';
    out += rtrim(pad("", dataset_w) + " | " + pad("", method_w) + " | " + pad("low", group_width(0)) + " | " +
                 pad("mid", group_width(1)) + " | " + pad("high", group_width(2))) + '\n';
    const std::string rule = std::string(dataset_w, '-') + "-+-" + std::string(method_w, '-') + "-+-" +
                             std::string(group_width(0), '-') + "-+-" + std::string(group_width(1), '-') + "-+-" +
                             std::string(group_width(2), '-');
    out += rule + '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const bool first_of_group = r == 0 || rows[r].dataset != rows[r - 1].dataset;
        if (first_of_group && r != 0) out += rule + '\n';
        out += rtrim(pad(first_of_group ? rows[r].dataset : "", dataset_w) + " | " +
                     pad(rows[r].methodology, method_w) + group_cells(cells[r])) + '\n';
    }
    return out;
}

}  // namespace faithfill::eval
