#include "faithfill/cli/run_config.hpp"

#include "faithfill/core/error.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace faithfill::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw ValidationError("config key '" + std::string(key) + "': '" + std::string(value) + "' is not " +
                          std::string(expected));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || end != value.data() + value.size() || value.empty()) {
        bad_value(key, value, std::is_integral_v<T> ? "a non-negative integer" : "a number");
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    bad_value(key, value, "a boolean (0/1/true/false)");
}

std::string one_of(std::string_view key, std::string_view value, std::initializer_list<std::string_view> options) {
    for (auto o : options) {
        if (o == value) return std::string(value);
    }
    std::string list;
    for (auto o : options) list += (list.empty() ? "" : "|") + std::string(o);
    bad_value(key, value, "one of " + list);
}

struct Field {
    std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field number_field(T RunConfig::*member) {
    return {[member](RunConfig& c, std::string_view k, std::string_view v) { c.*member = parse_number<T>(k, v); },
            [member](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>) return format_double(c.*member);
                else return std::to_string(c.*member);
            }};
}

Field string_field(std::string RunConfig::*member, std::initializer_list<std::string_view> options = {}) {
    std::vector<std::string_view> allowed(options);
    return {[member, allowed](RunConfig& c, std::string_view k, std::string_view v) {
                if (!allowed.empty()) {
                    bool ok = false;
                    for (auto o : allowed) ok = ok || o == v;
                    if (!ok) {
                        std::string list;
                        for (auto o : allowed) list += (list.empty() ? "" : "|") + std::string(o);
                        bad_value(k, v, "one of " + list);
                    }
                }
                c.*member = std::string(v);
            },
            [member](const RunConfig& c) { return c.*member; }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table = [] {
        std::vector<std::pair<std::string, Field>> t;
        t.emplace_back("dataset_root",
                       Field{[](RunConfig& c, std::string_view, std::string_view v) { c.dataset_root = v; },
                             [](const RunConfig& c) { return c.dataset_root.string(); }});
        t.emplace_back("backend", string_field(&RunConfig::backend, {"toy", "full"}));
        t.emplace_back("segmenter", string_field(&RunConfig::segmenter, {"toy-threshold", "sam"}));
        t.emplace_back("view_backend", string_field(&RunConfig::view_backend, {"toy-affine", "nerf"}));
        t.emplace_back("embedders", string_field(&RunConfig::embedders, {"stub", "full"}));
        t.emplace_back("seed", number_field(&RunConfig::seed));
        t.emplace_back("iterations", Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                                               if (v == "auto") c.iterations.reset();
                                               else c.iterations = parse_number<std::size_t>(k, v);
                                           },
                                           [](const RunConfig& c) {
                                               return c.iterations ? std::to_string(*c.iterations) : "auto";
                                           }});
        t.emplace_back("lr", number_field(&RunConfig::lr));
        t.emplace_back("rank", number_field(&RunConfig::rank));
        t.emplace_back("text_rank", number_field(&RunConfig::text_rank));
        t.emplace_back("lora_scale", number_field(&RunConfig::lora_scale));
        t.emplace_back("mask_ratio", number_field(&RunConfig::mask_ratio));
        t.emplace_back("max_rectangles", number_field(&RunConfig::max_rectangles));
        t.emplace_back("n_views", number_field(&RunConfig::n_views));
        t.emplace_back("prompt_template", string_field(&RunConfig::prompt_template));
        t.emplace_back("height", number_field(&RunConfig::height));
        t.emplace_back("width", number_field(&RunConfig::width));
        t.emplace_back("canvas_gray", number_field(&RunConfig::canvas_gray));
        t.emplace_back("schedule", Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                                             c.schedule = diffusion::parse_schedule_kind(
                                                 one_of(k, v, {"linear", "cosine"}));
                                         },
                                         [](const RunConfig& c) {
                                             return std::string(diffusion::schedule_kind_name(c.schedule));
                                         }});
        t.emplace_back("timesteps", number_field(&RunConfig::timesteps));
        t.emplace_back("guidance_scale", number_field(&RunConfig::guidance_scale));
        t.emplace_back("steps", number_field(&RunConfig::steps));
        t.emplace_back("toy_hidden", number_field(&RunConfig::toy_hidden));
        t.emplace_back("toy_condition_width", number_field(&RunConfig::toy_condition_width));
        t.emplace_back("toy_latent_factor", number_field(&RunConfig::toy_latent_factor));
        t.emplace_back("toy_base_seed", number_field(&RunConfig::toy_base_seed));
        t.emplace_back("toy_control_branch",
                       Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                                 c.toy_control_branch = parse_bool(k, v);
                             },
                             [](const RunConfig& c) { return std::string(c.toy_control_branch ? "1" : "0"); }});
        t.emplace_back("backend_timeout_s", number_field(&RunConfig::backend_timeout_s));
        return t;
    }();
    return table;
}

const Field& field(std::string_view key) {
    for (const auto& [name, f] : fields()) {
        if (name == key) return f;
    }
    throw ValidationError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, f] : fields()) k.push_back(name);
        return k;
    }();
    return keys;
}

void RunConfig::set(std::string_view key, std::string_view value) { field(key).set(*this, key, value); }

std::string RunConfig::get(std::string_view key) const { return field(key).get(*this); }

void RunConfig::merge_text(std::string_view text, std::string_view source) {
    std::istringstream lines{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool saw_version = false;
    RunConfig staged = *this;
    while (std::getline(lines, line)) {
        ++line_no;
        const std::string content = trim(line);
        if (content.empty() || content.front() == '#') continue;
        const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
        const auto eq = content.find('=');
        if (eq == std::string::npos) throw ValidationError(where + "expected 'key = value'");
        const std::string key = trim(std::string_view(content).substr(0, eq));
        const std::string value = trim(std::string_view(content).substr(eq + 1));
        try {
            if (key == "version") {
                if (value != std::to_string(kVersion)) {
                    throw ValidationError("unsupported config version '" + value + "'");
                }
                saw_version = true;
                continue;
            }
            staged.set(key, value);
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        }
    }
    if (!saw_version) throw ValidationError(std::string(source) + ": missing 'version = 1'");
    *this = std::move(staged);
}

void RunConfig::merge_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    merge_text(buffer.str(), path.string());
}

std::string RunConfig::to_text() const {
    std::string out = "version = " + std::to_string(kVersion) + "\n";
    for (const auto& [name, f] : fields()) out += name + " = " + f.get(*this) + "\n";
    return out;
}

void RunConfig::write_snapshot(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << to_text();
    if (!out) throw RuntimeFailure("cannot write config snapshot " + path.string());
}

void RunConfig::validate() const {
    finetune_config(dataset::DatasetKind::faithfill_pairs).validate();
    if (toy_latent_factor < 1 || height % toy_latent_factor != 0 || width % toy_latent_factor != 0) {
        throw ValidationError("height and width must be multiples of toy_latent_factor (" +
                              std::to_string(toy_latent_factor) + ")");
    }
    if (steps < 1 || steps > timesteps) throw ValidationError("steps must lie in [1, timesteps]");
    if (toy_hidden < 1 || toy_condition_width < 1) throw ValidationError("toy widths must be >= 1");
    if (backend_timeout_s < 1) throw ValidationError("backend_timeout_s must be >= 1");
}

pipeline::FinetuneConfig RunConfig::finetune_config(dataset::DatasetKind kind) const {
    pipeline::FinetuneConfig c;
    c.iterations = iterations ? *iterations : pipeline::default_iterations(kind);
    c.learning_rate = lr;
    c.lora_rank = rank;
    c.text_lora_rank = text_rank;
    c.mask_ratio = mask_ratio;
    c.max_rectangles = max_rectangles;
    c.n_views = n_views;
    c.seed = seed;
    c.prompt_template = prompt_template;
    c.resolution = resolution();
    c.canvas_gray = canvas_gray;
    c.schedule_steps = timesteps;
    c.schedule_kind = schedule;
    return c;
}

pipeline::InferenceConfig RunConfig::inference_config() const {
    return {guidance_scale, steps, seed, resolution(), timesteps, schedule};
}

diffusion::ToyDenoiserConfig RunConfig::toy_denoiser_config() const {
    diffusion::ToyDenoiserConfig c;
    c.hidden = toy_hidden;
    c.condition_width = toy_condition_width;
    c.lora_rank = rank;
    c.text_lora_rank = text_rank;
    c.lora_scale = lora_scale;
    c.latent_factor = toy_latent_factor;
    c.base_seed = toy_base_seed;
    c.lora_seed = seed;
    c.control_branch = toy_control_branch;
    return c;
}

}  // namespace faithfill::cli
