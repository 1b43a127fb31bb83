#include "faithfill/cli/app.hpp"

#include "faithfill/cli/run_config.hpp"
#include "faithfill/core/error.hpp"
#include "faithfill/core/png_io.hpp"
#include "faithfill/core/process.hpp"
#include "faithfill/diffusion/toy_denoiser.hpp"
#include "faithfill/eval/report.hpp"
#include "faithfill/eval/study.hpp"
#include "faithfill/maskgen/maskgen.hpp"
#include "faithfill/pipeline/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <set>

namespace faithfill::cli {

namespace {

namespace fs = std::filesystem;

std::string dashed(std::string key) {
    for (char& c : key) {
        if (c == '_') c = '-';
    }
    return key;
}

/// One CLI11 option per config key; aliases add subcommand-specific names.
class ConfigFlags {
public:
    ConfigFlags(CLI::App* app, const std::map<std::string, std::string>& aliases = {}) {
        app->add_option("--config", config_path_, "Run config file (key = value, version = 1)");
        std::set<std::string> taken;
        for (const auto& [key, alias] : aliases) taken.insert(alias);
        for (const auto& key : config_keys()) {
            // An alias naming another key's flag replaces that flag here.
            if (taken.count("--" + dashed(key)) && !aliases.count(key)) continue;
            std::string names = "--" + dashed(key);
            if (auto it = aliases.find(key); it != aliases.end()) names += "," + it->second;
            options_[key] = app->add_option(names, values_[key], "Config key '" + key + "'");
        }
    }

    /// defaults < config file < flags. `fallback_file` is used when no
    /// --config was given and it exists.
    RunConfig resolve(const fs::path& fallback_file = {}) const {
        RunConfig config;
        if (!config_path_.empty()) {
            config.merge_file(config_path_);
        } else if (!fallback_file.empty() && fs::exists(fallback_file)) {
            config.merge_file(fallback_file);
        }
        for (const auto& [key, option] : options_) {
            if (option->count() > 0) config.set(key, values_.at(key));
        }
        config.validate();
        return config;
    }

private:
    std::string config_path_;
    std::map<std::string, std::string> values_;
    std::map<std::string, CLI::Option*> options_;
};

std::chrono::milliseconds timeout(const RunConfig& config) {
    return std::chrono::seconds(config.backend_timeout_s);
}

std::unique_ptr<diffusion::DenoiserBackend> make_denoiser(const RunConfig& config) {
    if (config.backend == "full") {
        throw RuntimeFailure(
            "backend 'full' (pretrained latent-diffusion inpainting model) is not available in this build; "
            "use --backend toy");
    }
    return std::make_unique<diffusion::ToyDenoiser>(config.toy_denoiser_config());
}

std::unique_ptr<viewgen::SegmenterBackend> make_segmenter(const RunConfig& config) {
    if (config.segmenter == "sam") return std::make_unique<viewgen::ExternalSegmenter>(backend_tool("sam"), timeout(config));
    return std::make_unique<viewgen::ThresholdSegmenter>();
}

std::unique_ptr<viewgen::ViewBackend> make_view_backend(const RunConfig& config) {
    if (config.view_backend == "nerf") {
        viewgen::ExternalViewBackend::Options options;
        options.seed = config.seed;
        options.canvas_gray = config.canvas_gray;
        options.timeout = timeout(config);
        return std::make_unique<viewgen::ExternalViewBackend>(backend_tool("nerf"), options);
    }
    viewgen::AffineViewBackend::Options options;
    options.seed = config.seed;
    options.canvas_gray = config.canvas_gray;
    return std::make_unique<viewgen::AffineViewBackend>(options);
}

eval::EmbedderSet make_embedders(const RunConfig& config) {
    if (config.embedders == "full") return eval::external_embedders(timeout(config));
    return eval::stub_embedders();
}

// Parses "x0,y0,x1,y1" or "x,y".
std::vector<std::size_t> parse_coords(const std::string& text, std::size_t expected, const char* flag) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(part, &used);
            if (used != part.size()) throw std::invalid_argument(part);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw ValidationError(std::string(flag) + ": '" + part + "' is not a pixel coordinate");
        }
    }
    if (out.size() != expected) {
        throw ValidationError(std::string(flag) + " expects " + std::to_string(expected) + " comma-separated values");
    }
    return out;
}

struct HintFlags {
    std::string box;
    std::string point;

    void add(CLI::App* app) {
        auto* b = app->add_option("--box", box, "Object box hint x0,y0,x1,y1 (half-open)");
        auto* p = app->add_option("--point", point, "Object point hint x,y");
        b->excludes(p);
    }

    viewgen::Hint hint() const {
        if (!box.empty()) {
            const auto v = parse_coords(box, 4, "--box");
            return viewgen::BoundingBox{v[0], v[1], v[2], v[3]};
        }
        if (!point.empty()) {
            const auto v = parse_coords(point, 2, "--point");
            return viewgen::PointHint{v[0], v[1]};
        }
        return {};
    }
};

void write_json(const fs::path& path, const nlohmann::json& doc) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << doc.dump(2) << '\n';
    if (!out) throw RuntimeFailure("cannot write " + path.string());
}

fs::path sibling_snapshot(const fs::path& output_file) {
    return output_file.string() + ".cfg";
}

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end) {
    return std::accumulate(v.begin() + begin, v.begin() + end, 0.0) / static_cast<double>(end - begin);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"faithfill: single-reference object inpainting toolkit", "faithfill"};
    app.require_subcommand(1);

    // dataset validate
    auto* dataset_cmd = app.add_subcommand("dataset", "Dataset utilities");
    dataset_cmd->require_subcommand(1);
    auto* validate_cmd = dataset_cmd->add_subcommand("validate", "Check a dataset root and its manifest");
    std::string dataset_root;
    validate_cmd->add_option("root", dataset_root, "Dataset root directory")->required();

    // maskgen preview
    auto* maskgen_cmd = app.add_subcommand("maskgen", "Random training masks");
    maskgen_cmd->require_subcommand(1);
    auto* preview_cmd = maskgen_cmd->add_subcommand("preview", "Write one generated mask as PNG");
    ConfigFlags preview_flags(preview_cmd, {{"mask_ratio", "--ratio"}});
    std::string preview_out, preview_log;
    preview_cmd->add_option("--out", preview_out, "Output mask PNG (255 = fill)")->required();
    preview_cmd->add_option("--log", preview_log, "Also write the rectangle log as JSON");

    // viewgen run
    auto* viewgen_cmd = app.add_subcommand("viewgen", "Object extraction and view synthesis");
    viewgen_cmd->require_subcommand(1);
    auto* viewgen_run = viewgen_cmd->add_subcommand("run", "Segment the object and write its views");
    ConfigFlags viewgen_flags(viewgen_run, {{"n_views", "--n"}, {"view_backend", "--backend"}});
    std::string viewgen_input, viewgen_out;
    HintFlags viewgen_hint;
    viewgen_run->add_option("--input", viewgen_input, "Reference image PNG")->required();
    viewgen_run->add_option("--out-dir", viewgen_out, "Directory for view_1.png .. view_n.png")->required();
    viewgen_hint.add(viewgen_run);

    // finetune
    auto* finetune_cmd = app.add_subcommand("finetune", "Finetune LoRA adapters on one reference object");
    ConfigFlags finetune_flags(finetune_cmd, {{"dataset_root", "--dataset"}});
    std::string pair_id, finetune_out;
    HintFlags finetune_hint;
    finetune_cmd->add_option("--pair", pair_id, "Object id in the dataset manifest")->required();
    finetune_cmd->add_option("--out", finetune_out, "Run directory (run_record.json, lora.bin, run.cfg)")->required();
    finetune_hint.add(finetune_cmd);

    // infer
    auto* infer_cmd = app.add_subcommand("infer", "Inpaint a target with finetuned adapters");
    ConfigFlags infer_flags(infer_cmd);
    std::string infer_target, infer_mask, infer_weights, infer_prompt, infer_out;
    infer_cmd->add_option("--target", infer_target, "Target image PNG")->required();
    infer_cmd->add_option("--mask", infer_mask, "Mask PNG, 255 = fill, 0 = keep")->required();
    infer_cmd->add_option("--weights", infer_weights, "LoRA weights (lora.bin from a finetune run)")->required();
    infer_cmd->add_option("--prompt", infer_prompt, "Text prompt");
    infer_cmd->add_option("--out", infer_out, "Output PNG")->required();

    // eval run / eval study
    auto* eval_cmd = app.add_subcommand("eval", "Metrics and preference studies");
    eval_cmd->require_subcommand(1);
    auto* eval_run = eval_cmd->add_subcommand("run", "Score generated images against dataset targets");
    ConfigFlags eval_flags(eval_run);
    std::string generated_dir, manifest_root, report_dir, methodology = "faithfill";
    bool mask_only = false;
    eval_run->add_option("--generated", generated_dir, "Directory of <object_id>.png generations")->required();
    eval_run->add_option("--manifest", manifest_root, "Dataset root holding manifest.json")->required();
    eval_run->add_option("--out", report_dir, "Report directory")->required();
    eval_run->add_option("--method", methodology, "Methodology label for the table");
    eval_run->add_flag("--mask-only", mask_only, "Restrict metrics to the target mask region");
    auto* eval_study = eval_cmd->add_subcommand("study", "Aggregate pairwise preference votes");
    std::string votes_path, study_out;
    eval_study->add_option("--votes", votes_path, "Votes file, one record per line")->required();
    eval_study->add_option("--out", study_out, "Also write the summary as JSON");

    // Help and usage text belong to the deepest subcommand parsed so far.
    auto deepest = [&app] {
        CLI::App* current = &app;
        while (!current->get_subcommands().empty()) current = current->get_subcommands().front();
        return current;
    };
    if (!args.empty() && !args.front().starts_with("-") && app.get_subcommand_no_throw(args.front()) == nullptr) {
        err << "error: unknown subcommand '" << args.front() << "'\n" << app.help();
        return 1;
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << deepest()->help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << deepest()->help();
        return 1;
    }

    try {
        if (*validate_cmd) {
            try {
                const auto manifest = dataset::load_manifest(dataset_root);
                out << "ok: " << manifest.entries.size() << " entries (" << dataset::kind_name(manifest.kind)
                    << ")\n";
            } catch (const dataset::ManifestError& e) {
                for (const auto& failure : e.failures()) err << failure << "\n";
                return 1;
            }
            return 0;
        }

        if (*preview_cmd) {
            const RunConfig config = preview_flags.resolve();
            const maskgen::MaskGenConfig mask_config{config.mask_ratio, config.max_rectangles, config.seed};
            const auto generated = maskgen::generate_mask_with_log(config.height, config.width, mask_config);
            save_mask_png(preview_out, generated.mask);
            if (!preview_log.empty()) {
                std::ofstream log(preview_log);
                log << maskgen::rectangles_to_json(generated.rectangles) << "\n";
                if (!log) throw RuntimeFailure("cannot write " + preview_log);
            }
            config.write_snapshot(sibling_snapshot(preview_out));
            out << "mask " << config.height << "x" << config.width << " coverage " << generated.mask.coverage()
                << " rectangles " << generated.rectangles.size() << "\n";
            return 0;
        }

        if (*viewgen_run) {
            const RunConfig config = viewgen_flags.resolve();
            const ImageBuffer reference = resize_bilinear(load_png(viewgen_input), config.resolution());
            auto segmenter = make_segmenter(config);
            auto views_backend = make_view_backend(config);
            const auto cutout = viewgen::segment_object(reference, viewgen_hint.hint(), *segmenter,
                                                        fs::path(viewgen_input).stem().string());
            const auto views = viewgen::generate_views(cutout, config.n_views, *views_backend, config.canvas_gray);
            fs::create_directories(viewgen_out);
            nlohmann::json provenance = nlohmann::json::array();
            for (std::size_t i = 0; i < views.count(); ++i) {
                save_png(fs::path(viewgen_out) / ("view_" + std::to_string(i + 1) + ".png"), views.views[i]);
                provenance.push_back(
                    {{"backend", views.provenance[i].backend}, {"parameters", views.provenance[i].parameters}});
            }
            write_json(fs::path(viewgen_out) / "provenance.json",
                       {{"segmenter", segmenter->name()}, {"views", provenance}});
            config.write_snapshot(fs::path(viewgen_out) / "run.cfg");
            out << "wrote " << views.count() << " views to " << viewgen_out << "\n";
            return 0;
        }

        if (*finetune_cmd) {
            const RunConfig config = finetune_flags.resolve();
            const auto manifest = dataset::load_manifest(config.dataset_root);
            const auto pair = dataset::sample_pair(manifest, pair_id, config.seed, config.prompt_template);
            auto finetune_config = config.finetune_config(manifest.kind);
            RunConfig resolved = config;
            resolved.iterations = finetune_config.iterations;

            auto denoiser = make_denoiser(config);
            auto segmenter = make_segmenter(config);
            auto views_backend = make_view_backend(config);
            const auto record = pipeline::finetune(pair, finetune_config, {*segmenter, *views_backend, *denoiser},
                                                   finetune_hint.hint());
            pipeline::save_run(finetune_out, record);
            resolved.write_snapshot(fs::path(finetune_out) / "run.cfg");

            const auto& trace = record.loss_trace;
            const std::size_t window = std::min<std::size_t>(10, trace.size());
            out << "finetuned '" << pair.object_id << "' for " << trace.size() << " iterations in "
                << record.wall_clock_seconds << " s; loss " << mean_of(trace, 0, window) << " -> "
                << mean_of(trace, trace.size() - window, trace.size()) << "\n";
            return 0;
        }

        if (*infer_cmd) {
            const RunConfig config = infer_flags.resolve(fs::path(infer_weights).parent_path() / "run.cfg");
            const ImageBuffer target = load_png(infer_target);
            const BinaryMask mask = load_mask_png(infer_mask);
            const auto weights = diffusion::load_lora(infer_weights);
            auto denoiser = make_denoiser(config);
            const ImageBuffer result =
                pipeline::inpaint(target, mask, weights, infer_prompt, config.inference_config(), *denoiser);
            if (fs::path(infer_out).has_parent_path()) fs::create_directories(fs::path(infer_out).parent_path());
            save_png(infer_out, result);
            config.write_snapshot(sibling_snapshot(infer_out));
            out << "wrote " << infer_out << "\n";
            return 0;
        }

        if (*eval_run) {
            const RunConfig config = eval_flags.resolve();
            const auto manifest = dataset::load_manifest(manifest_root);
            auto embedders = make_embedders(config);
            eval::EvalOptions options{config.seed, config.resolution(), mask_only};
            const auto report = eval::evaluate_dataset(generated_dir, manifest, embedders, options);
            if (!report.missing.empty()) {
                err << "warning: " << report.missing.size() << " generated image(s) missing, excluded from means:";
                for (const auto& id : report.missing) err << ' ' << id;
                err << '\n';
            }
            const std::string table =
                eval::render_table({{eval::dataset_label(manifest.kind), methodology, report.means}});
            fs::create_directories(report_dir);
            write_json(fs::path(report_dir) / "metrics.json", eval::to_json(report));
            std::ofstream(fs::path(report_dir) / "table.txt") << table;
            config.write_snapshot(fs::path(report_dir) / "run.cfg");
            out << table;
            if (!report.missing.empty()) {
                out << "missing generations (" << report.missing.size() << "):";
                for (const auto& id : report.missing) out << " " << id;
                out << "\n";
            }
            return 0;
        }

        if (*eval_study) {
            const auto records = eval::load_votes(votes_path);
            const auto summaries = eval::aggregate_preferences(records);
            out << eval::render_preferences(summaries);
            if (!study_out.empty()) {
                nlohmann::json doc = nlohmann::json::array();
                for (const auto& s : summaries) {
                    doc.push_back({{"judge_kind", eval::judge_kind_name(s.judge_kind)},
                                   {"method_a", s.method_a},
                                   {"method_b", s.method_b},
                                   {"votes_a", s.votes_a},
                                   {"votes_b", s.votes_b},
                                   {"percent_a", s.percent_a},
                                   {"percent_b", s.percent_b},
                                   {"tasks", s.tasks},
                                   {"majority_a", s.majority_a},
                                   {"majority_b", s.majority_b},
                                   {"majority_ties", s.majority_ties}});
                }
                write_json(study_out, doc);
            }
            return 0;
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    err << app.help();
    return 1;
}

int dispatch(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args, std::cout, std::cerr);
}

}  // namespace faithfill::cli
