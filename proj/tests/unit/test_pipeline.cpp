#include "faithfill/core/error.hpp"
#include "faithfill/core/process.hpp"
#include "faithfill/diffusion/toy_denoiser.hpp"
#include "faithfill/pipeline/pipeline.hpp"
#include "faithfill/viewgen/viewgen.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <numeric>

using namespace faithfill;
using namespace faithfill::pipeline;

namespace {

FinetuneConfig small_config(std::size_t iterations, std::uint64_t seed = 0) {
    FinetuneConfig c;
    c.iterations = iterations;
    c.learning_rate = 5e-3;
    c.resolution = {32, 32};
    c.n_views = 3;
    c.seed = seed;
    return c;
}

struct Toys {
    viewgen::ThresholdSegmenter segmenter;
    viewgen::AffineViewBackend views{{.seed = 1}};
    diffusion::ToyDenoiser denoiser{testing::small_toy_config()};
    Backends backends() { return {segmenter, views, denoiser}; }
};

InferenceConfig inference_for(const FinetuneConfig& c, std::uint64_t seed = 0) {
    return {.guidance_scale = 7.5, .steps = 10, .seed = seed, .resolution = c.resolution};
}

double mean(const std::vector<double>& v, std::size_t from, std::size_t to) {
    return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to),
                           0.0) / static_cast<double>(to - from);
}

}  // namespace

TEST_CASE("default iterations per dataset kind") {
    CHECK(default_iterations(dataset::DatasetKind::dreambooth_pairs) == 1100);
    CHECK(default_iterations(dataset::DatasetKind::faithfill_pairs) == 1500);
    const FinetuneConfig c;
    CHECK(c.learning_rate == 5e-4);
    CHECK(c.lora_rank == 4);
}

TEST_CASE("zero iterations is a configuration error") {
    Toys toys;
    CHECK_THROWS_AS(finetune(testing::synthetic_pair(32), small_config(0), toys.backends()), ValidationError);
}

TEST_CASE("finetune records every iteration and never trains on the reference") {
    Toys toys;
    const auto record = finetune(testing::synthetic_pair(32), small_config(12), toys.backends());
    CHECK(record.loss_trace.size() == 12);
    CHECK(record.iterations.size() == 12);
    CHECK_FALSE(record.reference_in_training);
    CHECK(record.views.size() == 3);
    for (const auto& it : record.iterations) {
        CHECK(it.view_index < 3);
        CHECK(it.timestep >= 1);
        CHECK(it.timestep <= 1000);
    }
    CHECK(record.weights == toys.denoiser.lora());
    CHECK(record.weights.schedule_fingerprint != 0);
}

TEST_CASE("finetune replays bit-identically") {
    Toys first, second;
    const auto pair = testing::synthetic_pair(32);
    const auto a = finetune(pair, small_config(15, 4), first.backends());
    const auto b = finetune(pair, small_config(15, 4), second.backends());
    CHECK(a.loss_trace == b.loss_trace);
    CHECK(a.weights == b.weights);
    Toys third;
    const auto c = finetune(pair, small_config(15, 5), third.backends());
    CHECK(c.loss_trace != a.loss_trace);
}

TEST_CASE("finetune lowers the loss on a toy object") {
    Toys toys;
    const auto record = finetune(testing::synthetic_pair(32), small_config(120, 2), toys.backends());
    CHECK(mean(record.loss_trace, 110, 120) < mean(record.loss_trace, 0, 10));
}

TEST_CASE("finetune rejects adapters whose rank disagrees with the config") {
    Toys toys;
    auto c = small_config(3);
    c.lora_rank = 2;
    CHECK_THROWS_AS(finetune(testing::synthetic_pair(32), c, toys.backends()), ValidationError);
}

TEST_CASE("a segmenter that finds nothing fails in the segment stage") {
    Toys toys;
    auto pair = testing::synthetic_pair(32);
    pair.reference = ImageBuffer(32, 32, 0.5);
    try {
        finetune(pair, small_config(3), toys.backends());
        FAIL("expected a failure");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("segment") != std::string::npos);
    }
}

TEST_CASE("run records round-trip through disk") {
    ScratchDir dir("pipeline");
    Toys toys;
    const auto record = finetune(testing::synthetic_pair(32), small_config(5), toys.backends());
    save_run(dir.path(), record);
    const auto back = load_run(dir.path());
    CHECK(back.weights == record.weights);
    CHECK(back.loss_trace == record.loss_trace);
    CHECK(back.config.iterations == 5);
    CHECK(back.object_id == record.object_id);
    CHECK(back.iterations.size() == 5);
}

TEST_CASE("inpaint keeps every mask == 0 pixel") {
    Toys toys;
    const auto pair = testing::synthetic_pair(32);
    const auto c = small_config(5);
    const auto record = finetune(pair, c, toys.backends());
    const auto out = inpaint(pair.target, pair.target_mask, record.weights, pair.prompt, inference_for(c), toys.denoiser);
    CHECK(max_deviation_outside(out, pair.target, pair.target_mask) == 0.0);
    for (double v : out.data()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("empty and full masks") {
    Toys toys;
    const auto pair = testing::synthetic_pair(32);
    const auto c = small_config(3);
    const auto record = finetune(pair, c, toys.backends());
    CHECK(inpaint(pair.target, BinaryMask(32, 32), record.weights, pair.prompt, inference_for(c), toys.denoiser) ==
          pair.target);
    const auto full = inpaint(pair.target, BinaryMask(32, 32, 1), record.weights, pair.prompt, inference_for(c),
                              toys.denoiser);
    CHECK(full != pair.target);
    CHECK(occlusion_edit(pair.target, pair.target_mask, record.weights, pair.prompt, inference_for(c), toys.denoiser) ==
          inpaint(pair.target, pair.target_mask, record.weights, pair.prompt, inference_for(c), toys.denoiser));
}

TEST_CASE("inpaint rejects incompatible weights and masks") {
    Toys toys;
    const auto pair = testing::synthetic_pair(32);
    const auto c = small_config(3);
    auto weights = finetune(pair, c, toys.backends()).weights;
    CHECK_THROWS_AS(inpaint(pair.target, BinaryMask(16, 16, 1), weights, pair.prompt, inference_for(c), toys.denoiser),
                    ValidationError);
    auto other_schedule = inference_for(c);
    other_schedule.schedule_kind = diffusion::ScheduleKind::cosine;
    CHECK_THROWS_AS(inpaint(pair.target, pair.target_mask, weights, pair.prompt, other_schedule, toys.denoiser),
                    ValidationError);
    auto foreign = weights;
    foreign.backend = "some-other-model";
    CHECK_THROWS_AS(inpaint(pair.target, pair.target_mask, foreign, pair.prompt, inference_for(c), toys.denoiser),
                    ValidationError);
}

TEST_CASE("finetuned adapters change the masked region relative to the base model") {
    Toys toys;
    const auto pair = testing::synthetic_pair(32);
    const auto c = small_config(40, 1);
    const auto record = finetune(pair, c, toys.backends());
    const auto mask = testing::box_mask(32, 32, 16, 16, 32, 32);
    const auto tuned = inpaint(pair.target, mask, record.weights, pair.prompt, inference_for(c), toys.denoiser);
    toys.denoiser.reset_lora();
    auto base = toys.denoiser.lora();
    base.schedule_fingerprint = record.weights.schedule_fingerprint;
    base.backend = record.weights.backend;
    const auto baseline = inpaint(pair.target, mask, base, pair.prompt, inference_for(c), toys.denoiser);
    CHECK(tuned != baseline);
    CHECK(max_deviation_outside(tuned, baseline, mask) == 0.0);
}
