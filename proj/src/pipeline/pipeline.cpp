#include "faithfill/pipeline/pipeline.hpp"

#include "faithfill/core/error.hpp"
#include "faithfill/core/rng.hpp"
#include "faithfill/diffusion/objectives.hpp"
#include "faithfill/diffusion/optimizer.hpp"
#include "faithfill/diffusion/sampler.hpp"
#include "faithfill/maskgen/maskgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

namespace faithfill::pipeline {

using nlohmann::json;

namespace {

enum Stream : std::uint64_t { kIterationStream = 1, kMaskStream = 2, kNoiseStream = 3, kLatentStream = 4, kLoraInitStream = 5 };

}  // namespace

void FinetuneConfig::validate() const {
    if (iterations < 1) throw ValidationError("iterations must be >= 1");
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
    if (lora_rank < 1 || text_lora_rank < 1) throw ValidationError("LoRA ranks must be >= 1");
    if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0)) throw ValidationError("mask_ratio must lie in [0, 1]");
    if (max_rectangles < 1) throw ValidationError("max_rectangles must be >= 1");
    if (n_views < 1) throw ValidationError("n_views must be >= 1");
    if (resolution.height == 0 || resolution.width == 0) throw ValidationError("resolution must be positive");
    if (schedule_steps < 1) throw ValidationError("schedule_steps must be >= 1");
}

std::size_t default_iterations(dataset::DatasetKind kind) {
    return kind == dataset::DatasetKind::dreambooth_pairs ? 1100 : 1500;
}

json to_json(const FinetuneConfig& c) {
    return {{"iterations", c.iterations},
            {"learning_rate", c.learning_rate},
            {"lora_rank", c.lora_rank},
            {"text_lora_rank", c.text_lora_rank},
            {"mask_ratio", c.mask_ratio},
            {"max_rectangles", c.max_rectangles},
            {"n_views", c.n_views},
            {"seed", c.seed},
            {"prompt_template", c.prompt_template},
            {"resolution", {c.resolution.height, c.resolution.width}},
            {"canvas_gray", c.canvas_gray},
            {"schedule_steps", c.schedule_steps},
            {"schedule_kind", diffusion::schedule_kind_name(c.schedule_kind)}};
}

FinetuneConfig finetune_config_from_json(const json& doc) {
    FinetuneConfig c;
    c.iterations = doc.at("iterations").get<std::size_t>();
    c.learning_rate = doc.at("learning_rate").get<double>();
    c.lora_rank = doc.at("lora_rank").get<std::size_t>();
    c.text_lora_rank = doc.at("text_lora_rank").get<std::size_t>();
    c.mask_ratio = doc.at("mask_ratio").get<double>();
    c.max_rectangles = doc.at("max_rectangles").get<std::size_t>();
    c.n_views = doc.at("n_views").get<std::size_t>();
    c.seed = doc.at("seed").get<std::uint64_t>();
    c.prompt_template = doc.at("prompt_template").get<std::string>();
    c.resolution = {doc.at("resolution").at(0).get<std::size_t>(), doc.at("resolution").at(1).get<std::size_t>()};
    c.canvas_gray = doc.at("canvas_gray").get<double>();
    c.schedule_steps = doc.at("schedule_steps").get<std::size_t>();
    c.schedule_kind = diffusion::parse_schedule_kind(doc.at("schedule_kind").get<std::string>());
    return c;
}

RunRecord finetune(const dataset::PairRecord& pair, const FinetuneConfig& config, Backends backends,
                   const viewgen::Hint& hint) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    auto& denoiser = backends.denoiser;
    for (const auto& layer : denoiser.lora().layers) {
        const std::size_t want = layer.name.starts_with("text.") ? config.text_lora_rank : config.lora_rank;
        if (layer.rank != want) {
            throw ValidationError("denoiser LoRA layer '" + layer.name + "' has rank " + std::to_string(layer.rank) +
                                  ", config asks for " + std::to_string(want));
        }
    }

    const auto schedule = diffusion::build_schedule(config.schedule_steps, config.schedule_kind);
    const ImageBuffer reference = resize_bilinear(pair.reference, config.resolution);

    viewgen::ObjectCutout cutout = [&] {
        try {
            return viewgen::segment_object(reference, hint, backends.segmenter, pair.object_id);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("stage 'segment': ") + e.what());
        } catch (const std::exception& e) {
            throw RuntimeFailure(std::string("stage 'segment': ") + e.what());
        }
    }();
    viewgen::ViewSet views = [&] {
        try {
            return viewgen::generate_views(cutout, config.n_views, backends.views, config.canvas_gray);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("stage 'views': ") + e.what());
        } catch (const std::exception& e) {
            throw RuntimeFailure(std::string("stage 'views': ") + e.what());
        }
    }();

    // Fresh zero-residual adapters seeded from the run seed.
    auto& layers = denoiser.lora().layers;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto& layer = layers[i];
        Rng rng(derive_seed(config.seed, kLoraInitStream, i));
        const double std_dev = 1.0 / static_cast<double>(layer.rank);
        for (double& v : layer.a) v = rng.normal() * std_dev;
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
    denoiser.lora().schedule_fingerprint = schedule.fingerprint();
    denoiser.lora().backend = denoiser.descriptor();

    RunRecord record;
    record.config = config;
    record.object_id = pair.object_id;
    record.prompt = pair.prompt;
    record.views = views.provenance;
    record.segmenter = backends.segmenter.name();
    record.view_backend = backends.views.name();
    record.denoiser = denoiser.descriptor();
    record.rng_algorithm = std::string(Rng::kAlgorithm);
    record.loss_trace.reserve(config.iterations);

    diffusion::RmsProp optimizer({config.learning_rate});
    const maskgen::MaskGenConfig mask_base{config.mask_ratio, config.max_rectangles, 0};
    const Resolution view_size = views.resolution();
    for (std::size_t it = 0; it < config.iterations; ++it) {
        try {
            Rng rng(derive_seed(config.seed, kIterationStream, it));
            IterationRecord step;
            step.view_index = rng.uniform_int(0, views.count() - 1);
            step.timestep = rng.uniform_int(1, schedule.steps());
            step.mask_seed = derive_seed(config.seed, kMaskStream, it);
            step.noise_seed = derive_seed(config.seed, kNoiseStream, it);

            maskgen::MaskGenConfig mask_config = mask_base;
            mask_config.seed = step.mask_seed;
            const BinaryMask mask = maskgen::generate_mask(view_size.height, view_size.width, mask_config);
            const auto condition = denoiser.encode_prompt(pair.prompt);
            auto result = diffusion::inpaint_loss(views.views[step.view_index], mask, step.timestep, condition,
                                                  denoiser, schedule, step.noise_seed, true);
            if (!std::isfinite(result.loss)) throw RuntimeFailure("non-finite loss");
            optimizer.step(denoiser.lora(), *result.gradients);

            step.loss = result.loss;
            record.loss_trace.push_back(result.loss);
            record.iterations.push_back(step);
        } catch (const ValidationError& e) {
            throw ValidationError("stage 'train' iteration " + std::to_string(it) + ": " + e.what());
        } catch (const std::exception& e) {
            throw RuntimeFailure("stage 'train' iteration " + std::to_string(it) + ": " + e.what());
        }
    }

    record.weights = denoiser.lora();
    record.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return record;
}

ImageBuffer inpaint(const ImageBuffer& target, const BinaryMask& mask, const diffusion::LoraWeights& weights,
                    std::string_view prompt, const InferenceConfig& config, diffusion::DenoiserBackend& denoiser) {
    if (mask.resolution() != target.resolution()) {
        throw ValidationError("inpaint: mask " + std::to_string(mask.height()) + "x" + std::to_string(mask.width()) +
                              " does not match target " + std::to_string(target.height()) + "x" +
                              std::to_string(target.width()));
    }
    const auto schedule = diffusion::build_schedule(config.schedule_steps, config.schedule_kind);
    if (weights.schedule_fingerprint != schedule.fingerprint()) {
        throw ValidationError("inpaint: LoRA schedule fingerprint does not match the inference schedule");
    }
    if (weights.backend != denoiser.descriptor()) {
        throw ValidationError("inpaint: LoRA weights were trained for '" + weights.backend + "', denoiser is '" +
                              denoiser.descriptor() + "'");
    }
    if (mask.count_fill() == 0) return target;

    denoiser.lora() = weights;
    const auto& codec = denoiser.codec();
    const ImageBuffer work = resize_bilinear(target, config.resolution);
    const BinaryMask work_mask = resize_nearest(mask, config.resolution);
    const auto masked_latent = codec.encode(apply_inverted_mask(work, work_mask));
    const auto latent_mask = diffusion::downsample_mask(work_mask, codec.factor());

    const auto z_T = diffusion::gaussian_latent(masked_latent.channels(), masked_latent.height(),
                                                masked_latent.width(), derive_seed(config.seed, kLatentStream));
    const auto condition = denoiser.encode_prompt(prompt);
    const diffusion::SamplerOptions options{config.guidance_scale, config.steps,
                                            derive_seed(config.seed, kNoiseStream)};
    const auto z0 = diffusion::sample(z_T, condition, {masked_latent, latent_mask}, denoiser, schedule, options);

    ImageBuffer generated = resize_bilinear(codec.decode(z0), target.resolution());
    for (double& v : generated.data()) v = std::clamp(v, 0.0, 1.0);
    return composite(target, generated, mask);
}

json to_json(const RunRecord& r) {
    json iterations = json::array();
    for (const auto& it : r.iterations) {
        iterations.push_back({{"view_index", it.view_index},
                              {"timestep", it.timestep},
                              {"mask_seed", it.mask_seed},
                              {"noise_seed", it.noise_seed},
                              {"loss", it.loss}});
    }
    json views = json::array();
    for (const auto& v : r.views) views.push_back({{"backend", v.backend}, {"parameters", v.parameters}});
    return {{"schema_version", RunRecord::kSchemaVersion},
            {"config", to_json(r.config)},
            {"object_id", r.object_id},
            {"prompt", r.prompt},
            {"weights_file", "lora.bin"},
            {"schedule_fingerprint", r.weights.schedule_fingerprint},
            {"loss_trace", r.loss_trace},
            {"iterations", iterations},
            {"views", views},
            {"segmenter", r.segmenter},
            {"view_backend", r.view_backend},
            {"denoiser", r.denoiser},
            {"rng_algorithm", r.rng_algorithm},
            {"reference_in_training", r.reference_in_training},
            {"wall_clock_seconds", r.wall_clock_seconds}};
}

void save_run(const std::filesystem::path& dir, const RunRecord& record) {
    std::filesystem::create_directories(dir);
    diffusion::save_lora(dir / "lora.bin", record.weights);
    std::ofstream out(dir / "run_record.json");
    // max_digits10 output keeps every double exact through a round trip.
    out << to_json(record).dump(2) << '\n';
    if (!out) throw RuntimeFailure("cannot write run record in " + dir.string());
}

RunRecord load_run(const std::filesystem::path& dir) {
    std::ifstream in(dir / "run_record.json");
    if (!in) throw ValidationError("missing run_record.json in " + dir.string());
    const json doc = json::parse(in);
    if (doc.at("schema_version").get<int>() != RunRecord::kSchemaVersion) {
        throw ValidationError("unsupported run record schema");
    }
    RunRecord r;
    r.config = finetune_config_from_json(doc.at("config"));
    r.object_id = doc.at("object_id").get<std::string>();
    r.prompt = doc.at("prompt").get<std::string>();
    r.weights = diffusion::load_lora(dir / doc.at("weights_file").get<std::string>());
    r.loss_trace = doc.at("loss_trace").get<std::vector<double>>();
    for (const auto& it : doc.at("iterations")) {
        r.iterations.push_back({it.at("view_index").get<std::size_t>(), it.at("timestep").get<std::size_t>(),
                                it.at("mask_seed").get<std::uint64_t>(), it.at("noise_seed").get<std::uint64_t>(),
                                it.at("loss").get<double>()});
    }
    for (const auto& v : doc.at("views")) {
        r.views.push_back({v.at("backend").get<std::string>(), v.at("parameters").get<viewgen::ParameterMap>()});
    }
    r.segmenter = doc.at("segmenter").get<std::string>();
    r.view_backend = doc.at("view_backend").get<std::string>();
    r.denoiser = doc.at("denoiser").get<std::string>();
    r.rng_algorithm = doc.at("rng_algorithm").get<std::string>();
    r.reference_in_training = doc.at("reference_in_training").get<bool>();
    r.wall_clock_seconds = doc.at("wall_clock_seconds").get<double>();
    return r;
}

}  // namespace faithfill::pipeline
