// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "faithfill/core/image.hpp"
#include "faithfill/core/rng.hpp"
#include "faithfill/diffusion/objectives.hpp"
#include "faithfill/diffusion/schedule.hpp"
#include "faithfill/diffusion/toy_denoiser.hpp"
#include "faithfill/eval/embedders.hpp"
#include "faithfill/eval/metrics.hpp"
#include "faithfill/eval/report.hpp"
#include "faithfill/eval/study.hpp"
#include "faithfill/maskgen/maskgen.hpp"
#include "faithfill/pipeline/pipeline.hpp"
#include "faithfill/simd/kernels.hpp"
#include "faithfill/viewgen/viewgen.hpp"
#include "support/fixtures.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace faithfill;
using namespace faithfill::diffusion;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects the first few failure messages; the outcome fails on any.
class Checker {
public:
    void require(bool ok, const std::string& what) {
        if (ok) return;
        ++failures_;
        if (failures_ <= 3) messages_ += (messages_.empty() ? "" : "; ") + what;
    }
    Outcome outcome(const std::string& summary) const {
        if (failures_ == 0) return {true, summary};
        return {false, std::to_string(failures_) + " failure(s): " + messages_};
    }

private:
    std::size_t failures_ = 0;
    std::string messages_;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const NoiseSchedule& schedule() {
    static const auto s = build_schedule(1000, ScheduleKind::linear);
    return s;
}

struct ToyBackends {
    viewgen::ThresholdSegmenter segmenter;
    viewgen::AffineViewBackend views{{.seed = 1}};
    ToyDenoiser denoiser{testing::small_toy_config()};
    pipeline::Backends get() { return {segmenter, views, denoiser}; }
};

pipeline::FinetuneConfig toy_finetune(std::size_t iterations, std::uint64_t seed) {
    pipeline::FinetuneConfig c;
    c.iterations = iterations;
    c.learning_rate = 5e-3;
    c.resolution = {32, 32};
    c.n_views = 4;
    c.seed = seed;
    return c;
}

double mean(const std::vector<double>& v, std::size_t from, std::size_t to) {
    return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to),
                           0.0) /
           static_cast<double>(to - from);
}

Outcome noising() {
    Checker check;
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const auto h = rng.uniform_int(1, 9), w = rng.uniform_int(1, 9);
        const auto z0 = gaussian_latent(4, h, w, derive_seed(10, 0, i));
        const auto eps = gaussian_latent(4, h, w, derive_seed(10, 1, i));
        const std::size_t t = rng.uniform_int(1, 1000);
        const double a = schedule().alpha(t);
        const auto z = add_noise(z0, t, eps, schedule());
        for (std::size_t k = 0; k < z.size(); ++k) {
            const double expect = std::sqrt(a) * z0.data()[k] + std::sqrt(1.0 - a) * eps.data()[k];
            check.require(z.data()[k] == expect, "tensor " + std::to_string(i) + " differs at t=" + std::to_string(t));
        }
        check.require(mix_noise(z0, eps, 1.0) == z0, "alpha=1 does not return z0");
        check.require(mix_noise(z0, eps, 0.0) == eps, "alpha=0 does not return eps");
    }
    return check.outcome("100 tensors bit-exact; alpha=1 -> z0, alpha=0 -> eps");
}

Outcome loss_limits() {
    Checker check;
    ToyDenoiser d(testing::small_toy_config());
    Rng rng(2);
    for (auto& layer : d.lora().layers)
        for (double& v : layer.b) v = 0.1 * rng.normal();
    const auto pair = testing::synthetic_pair(32);
    const auto cond = d.encode_prompt(pair.prompt);
    const BinaryMask nothing(32, 32);
    double worst = 0.0;
    for (std::size_t t : {1u, 100u, 500u, 999u, 1000u}) {
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            const double masked = inpaint_loss(pair.reference, nothing, t, cond, d, schedule(), seed).loss;
            const double plain = text_to_image_loss(pair.reference, t, cond, d, schedule(), seed);
            worst = std::max(worst, std::abs(masked - plain));
        }
    }
    check.require(worst <= 1e-7, "zero-mask gap " + fmt(worst));
    double oracle_worst = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        testing::SeededNoiseDenoiser oracle(seed);
        const double loss =
            inpaint_loss(pair.target, pair.target_mask, 1 + 200 * seed, oracle.encode_prompt(""), oracle, schedule(), seed)
                .loss;
        oracle_worst = std::max(oracle_worst, std::abs(loss));
    }
    check.require(oracle_worst == 0.0, "oracle loss " + fmt(oracle_worst));
    return check.outcome("zero-mask gap " + fmt(worst) + "; oracle loss " + fmt(oracle_worst));
}

Outcome lora_properties() {
    Checker check;
    ToyDenoiser d(testing::small_toy_config());
    const auto pair = testing::synthetic_pair(32);
    const auto cond = d.encode_prompt(pair.prompt);
    const auto z0 = d.codec().encode(pair.reference);
    const auto zt = add_noise(z0, 300, gaussian_latent(4, z0.height(), z0.width(), 3), schedule());
    const std::vector<double> mask(z0.pixels(), 1.0);
    const DenoiserInput input{zt, 300, schedule().alpha(300), cond, z0, mask};
    const auto with_zero_b = d.predict_noise(input);
    auto no_residual = d;
    for (auto& layer : no_residual.lora().layers) std::fill(layer.a.begin(), layer.a.end(), 0.0);
    check.require(no_residual.predict_noise(input) == with_zero_b, "B=0 changes the prediction");

    ToyBackends toys;
    const auto frozen = toys.denoiser.frozen_parameters();
    const auto record = pipeline::finetune(pair, toy_finetune(30, 3), toys.get());
    check.require(toys.denoiser.frozen_parameters() == frozen, "frozen parameters changed during finetune");

    int max_rank = 0;
    for (const auto& layer : record.weights.layers) {
        const auto delta = layer.delta();
        Eigen::MatrixXd m(layer.out_dim, layer.in_dim);
        for (std::size_t r = 0; r < layer.out_dim; ++r)
            for (std::size_t c = 0; c < layer.in_dim; ++c) m(r, c) = delta[r * layer.in_dim + c];
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-9 * sv(0);
        max_rank = std::max(max_rank, rank);
    }
    check.require(max_rank <= 4, "rank(BA) = " + std::to_string(max_rank));
    return check.outcome("B=0 bit-exact; base unchanged; max rank(BA) = " + std::to_string(max_rank));
}

Outcome gradients() {
    Checker check;
    ToyDenoiser d(testing::small_toy_config());
    Rng rng(4);
    for (auto& layer : d.lora().layers)
        for (double& v : layer.b) v = 0.3 * rng.normal();
    const auto pair = testing::synthetic_pair(32);
    const auto cond = d.encode_prompt(pair.prompt);
    const std::size_t t = 420;
    const std::uint64_t seed = 8;
    const auto analytic = *inpaint_loss(pair.target, pair.target_mask, t, cond, d, schedule(), seed, true).gradients;
    const double h = 1e-5;
    double worst = 0.0;
    const int coords = 24;
    for (int k = 0; k < coords; ++k) {
        const std::size_t l = static_cast<std::size_t>(k) % d.lora().layers.size();
        const bool use_a = (k / 3) % 2 == 0;
        auto& params = use_a ? d.lora().layers[l].a : d.lora().layers[l].b;
        const std::size_t i = rng.uniform_int(0, params.size() - 1);
        const double saved = params[i];
        params[i] = saved + h;
        const double up = inpaint_loss(pair.target, pair.target_mask, t, cond, d, schedule(), seed).loss;
        params[i] = saved - h;
        const double down = inpaint_loss(pair.target, pair.target_mask, t, cond, d, schedule(), seed).loss;
        params[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double g = use_a ? analytic.layers[l].a[i] : analytic.layers[l].b[i];
        const double rel = std::abs(g - numeric) / std::max({std::abs(g), std::abs(numeric), 1e-8});
        worst = std::max(worst, rel);
        check.require(rel <= 1e-3, d.lora().layers[l].name + (use_a ? ".a[" : ".b[") + std::to_string(i) +
                                       "] rel " + fmt(rel));
    }
    return check.outcome(std::to_string(coords) + " coordinates, max relative error " + fmt(worst));
}

Outcome masks() {
    Checker check;
    Rng rng(5);
    std::size_t total = 0;
    for (double ratio : {0.25, 0.5, 0.75}) {
        for (int i = 0; i < 1000; ++i) {
            const auto h = rng.uniform_int(8, 96), w = rng.uniform_int(8, 96);
            const maskgen::MaskGenConfig config{ratio, 8, rng.next_u64()};
            const auto generated = maskgen::generate_mask_with_log(h, w, config);
            const auto& m = generated.mask;
            const std::size_t filled = std::accumulate(m.values().begin(), m.values().end(), std::size_t{0});
            check.require(static_cast<double>(filled) >= ratio * static_cast<double>(h * w),
                          "coverage below " + fmt(ratio) + " at " + std::to_string(h) + "x" + std::to_string(w));
            check.require(maskgen::rasterize(h, w, generated.rectangles) == m, "log does not reproduce the mask");
            check.require(maskgen::generate_mask(h, w, config) == m, "generation is not deterministic");
            ++total;
        }
    }
    return check.outcome(std::to_string(total) + " masks: coverage, log replay and determinism hold");
}

Outcome preservation() {
    Checker check;
    ToyBackends toys;
    const auto pair = testing::synthetic_pair(32);
    const auto config = toy_finetune(20, 6);
    const auto record = pipeline::finetune(pair, config, toys.get());
    const pipeline::InferenceConfig inference{.guidance_scale = 7.5, .steps = 10, .seed = 0, .resolution = {32, 32}};
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto mask = maskgen::generate_mask(32, 32, {0.1 + 0.08 * static_cast<double>(i), 8, 100 + i});
        auto run = inference;
        run.seed = i;
        const auto out = pipeline::inpaint(pair.target, mask, record.weights, pair.prompt, run, toys.denoiser);
        check.require(max_deviation_outside(out, pair.target, mask) == 0.0, "mask " + std::to_string(i) + " leaks");
    }
    return check.outcome("10 masks: every mask==0 pixel bit-identical");
}

Outcome loss_decreases() {
    Checker check;
    std::string summary;
    int passed = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ToyBackends toys;
        const auto record = pipeline::finetune(testing::synthetic_pair(32), toy_finetune(50, seed), toys.get());
        const double first = mean(record.loss_trace, 0, 10);
        const double last = mean(record.loss_trace, 40, 50);
        passed += last < first;
        check.require(last < first, "seed " + std::to_string(seed) + ": " + fmt(first) + " -> " + fmt(last));
        summary += (summary.empty() ? "" : ", ") + fmt(first) + "->" + fmt(last);
    }
    return check.outcome(std::to_string(passed) + "/5 seeds decrease (" + summary + ")");
}

Outcome image_metrics() {
    Checker check;
    const auto window = eval::ssim_window();
    double worst_ssim = 0.0, worst_psnr = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto a = testing::random_image(64, 64, 300 + s);
        const auto noise = testing::random_image(64, 64, 400 + s);
        auto b = a;
        for (std::size_t i = 0; i < b.data().size(); ++i)
            b.data()[i] = std::clamp(b.data()[i] + 0.4 * (noise.data()[i] - 0.5), 0.0, 1.0);

        // Direct double loop over window positions.
        double acc = 0.0, se = 0.0;
        std::size_t count = 0;
        const double c1 = 1e-4, c2 = 9e-4;
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y + 11 <= 64; ++y)
                for (std::size_t x = 0; x + 11 <= 64; ++x) {
                    double ma = 0, mb = 0, aa = 0, bb = 0, ab = 0;
                    for (std::size_t i = 0; i < 11; ++i)
                        for (std::size_t j = 0; j < 11; ++j) {
                            const double g = window[i] * window[j];
                            const double va = a.at(y + i, x + j, c), vb = b.at(y + i, x + j, c);
                            ma += g * va;
                            mb += g * vb;
                            aa += g * va * va;
                            bb += g * vb * vb;
                            ab += g * va * vb;
                        }
                    acc += ((2 * ma * mb + c1) * (2 * (ab - ma * mb) + c2)) /
                           ((ma * ma + mb * mb + c1) * (aa - ma * ma + bb - mb * mb + c2));
                    ++count;
                }
        for (std::size_t i = 0; i < a.data().size(); ++i) se += (a.data()[i] - b.data()[i]) * (a.data()[i] - b.data()[i]);
        const double oracle_psnr = 10.0 * std::log10(static_cast<double>(a.data().size()) / se);
        worst_ssim = std::max(worst_ssim, std::abs(eval::ssim(a, b) - acc / static_cast<double>(count)));
        worst_psnr = std::max(worst_psnr, std::abs(eval::psnr(a, b) - oracle_psnr));
    }
    check.require(worst_ssim <= 1e-6, "SSIM off by " + fmt(worst_ssim));
    check.require(worst_psnr <= 1e-6, "PSNR off by " + fmt(worst_psnr));

    const auto image = testing::square_object(64, 12, 16, 30);
    auto embedders = eval::stub_embedders();
    const auto same = eval::evaluate_pair(image, image, BinaryMask(64, 64), embedders, {.resolution = {64, 64}});
    check.require(same.ssim == 1.0, "identity SSIM " + fmt(same.ssim));
    check.require(same.psnr == std::numeric_limits<double>::infinity(), "identity PSNR " + fmt(same.psnr));
    check.require(same.lpips == 0.0, "identity LPIPS");
    check.require(same.clip && std::abs(*same.clip - 1.0) <= 1e-12, "identity CLIP cosine");
    check.require(same.dino && std::abs(*same.dino - 1.0) <= 1e-12, "identity DINO cosine");
    return check.outcome("20 pairs: SSIM err " + fmt(worst_ssim) + ", PSNR err " + fmt(worst_psnr) +
                         "; identity SSIM 1, PSNR inf, LPIPS 0, cosine 1");
}

Outcome preferences() {
    Checker check;
    eval::VoteRecord r{"t1", "dog", "ours", "base", {}, eval::JudgeKind::human, true};
    for (char c : std::string("aaaaaabbb")) r.votes.push_back(c == 'a' ? eval::Choice::a : eval::Choice::b);
    const auto s = eval::aggregate_preferences({r});
    check.require(eval::format_percent(s.at(0).percent_a) == "66.7", "6/9 renders " + eval::format_percent(s[0].percent_a));

    Rng rng(9);
    std::vector<eval::VoteRecord> many;
    for (int i = 0; i < 100; ++i) {
        eval::VoteRecord v{"t" + std::to_string(i), "x", "m" + std::to_string(i % 4), "n" + std::to_string(i % 3),
                           {}, i % 2 ? eval::JudgeKind::gpt : eval::JudgeKind::human, true};
        const auto n = rng.uniform_int(1, 17);
        for (std::uint64_t k = 0; k < n; ++k) v.votes.push_back(rng.uniform() < 0.3 ? eval::Choice::a : eval::Choice::b);
        many.push_back(std::move(v));
    }
    double worst = 0.0;
    for (const auto& p : eval::aggregate_preferences(many)) worst = std::max(worst, std::abs(p.percent_a + p.percent_b - 100.0));
    check.require(worst <= 1e-9, "pair sums off by " + fmt(worst));

    const auto [a, b] = eval::margin_to_shares(42.2);
    check.require(eval::format_percent(a) == "71.1" && eval::format_percent(b) == "28.9",
                  "margin renders (" + eval::format_percent(a) + ", " + eval::format_percent(b) + ")");
    return check.outcome("6/9 -> 66.7%; sums within " + fmt(worst) + "; margin 42.2 -> (" + eval::format_percent(a) +
                         ", " + eval::format_percent(b) + ")");
}

Outcome reproducibility() {
    Checker check;
    const auto pair = testing::synthetic_pair(32);
    ToyBackends first, second;
    const auto a = pipeline::finetune(pair, toy_finetune(40, 11), first.get());
    const auto b = pipeline::finetune(pair, toy_finetune(40, 11), second.get());
    check.require(a.loss_trace == b.loss_trace, "loss traces differ");
    check.require(a.weights == b.weights, "weights differ");
    bool same_draws = a.iterations.size() == b.iterations.size();
    for (std::size_t i = 0; same_draws && i < a.iterations.size(); ++i) {
        same_draws = a.iterations[i].view_index == b.iterations[i].view_index &&
                     a.iterations[i].timestep == b.iterations[i].timestep &&
                     a.iterations[i].mask_seed == b.iterations[i].mask_seed &&
                     a.iterations[i].noise_seed == b.iterations[i].noise_seed;
    }
    check.require(same_draws, "per-iteration draws differ");
    return check.outcome("40-iteration runs: traces, draws and weights bit-identical");
}

Outcome table() {
    Checker check;
    eval::MetricValues v;
    v.ssim = 0.66;
    v.psnr = 20.15;
    v.lpips = 0.25;
    v.dreamsim = 0.11;
    v.dino = 0.95;
    v.clip = 0.97;
    const auto text =
        eval::render_table({{eval::dataset_label(dataset::DatasetKind::faithfill_pairs), "FaithFill (Ours)", v}});
    check.require(text == testing::kReferenceRowTable, "rendered:\n" + text);
    return check.outcome("FaithFill Dataset row matches the golden text");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"add_noise exact", noising},
        {"loss limits", loss_limits},
        {"LoRA zero-init, frozen base, rank", lora_properties},
        {"gradient check", gradients},
        {"mask coverage, log, determinism", masks},
        {"inpaint preserves unmasked pixels", preservation},
        {"toy finetune loss decreases", loss_decreases},
        {"image metrics vs oracles", image_metrics},
        {"preference rendering", preferences},
        {"finetune reproducibility", reproducibility},
        {"results table", table},
    };
    std::printf("SIMD kernels: %s\n", std::string(simd::isa_name(simd::active_isa())).c_str());
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %zu: %s (%.2fs) -- %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first.c_str(), seconds, outcome.detail.c_str());
        failed += !outcome.pass;
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
