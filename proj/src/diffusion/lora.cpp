#include "faithfill/diffusion/lora.hpp"

#include "faithfill/core/error.hpp"
#include "faithfill/core/rng.hpp"
#include "faithfill/simd/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace faithfill::diffusion {

std::vector<double> LoraLayer::delta() const {
    std::vector<double> out(out_dim * in_dim, 0.0);
    for (std::size_t o = 0; o < out_dim; ++o) {
        for (std::size_t k = 0; k < rank; ++k) {
            const double coeff = scale * b[o * rank + k];
            if (coeff == 0.0) continue;
            simd::axpy(coeff, std::span(a).subspan(k * in_dim, in_dim), std::span(out).subspan(o * in_dim, in_dim));
        }
    }
    return out;
}

LoraLayer make_lora_layer(std::string name, std::size_t out_dim, std::size_t in_dim, std::size_t rank, double scale,
                          Rng& rng) {
    if (rank < 1 || rank >= std::min(out_dim, in_dim)) {
        throw ValidationError("LoRA layer '" + name + "': rank " + std::to_string(rank) + " must be in [1, " +
                              std::to_string(std::min(out_dim, in_dim)) + ")");
    }
    LoraLayer layer{std::move(name), out_dim, in_dim, rank, scale, std::vector<double>(rank * in_dim),
                    std::vector<double>(out_dim * rank, 0.0)};
    const double std_dev = 1.0 / static_cast<double>(rank);
    for (double& v : layer.a) v = rng.normal() * std_dev;
    return layer;
}

const LoraLayer& LoraWeights::layer(std::string_view name) const {
    const auto it = std::find_if(layers.begin(), layers.end(), [&](const LoraLayer& l) { return l.name == name; });
    if (it == layers.end()) throw ValidationError("no LoRA layer named '" + std::string(name) + "'");
    return *it;
}

LoraLayer& LoraWeights::layer(std::string_view name) {
    return const_cast<LoraLayer&>(std::as_const(*this).layer(name));
}

std::size_t LoraWeights::parameter_count() const {
    std::size_t total = 0;
    for (const auto& l : layers) total += l.parameter_count();
    return total;
}

LoraGradients LoraGradients::zeros_like(const LoraWeights& weights) {
    LoraGradients grads;
    for (const auto& l : weights.layers) {
        grads.layers.push_back({std::vector<double>(l.a.size(), 0.0), std::vector<double>(l.b.size(), 0.0)});
    }
    return grads;
}

void LoraGradients::set_zero() {
    for (auto& l : layers) {
        std::fill(l.a.begin(), l.a.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
}

std::vector<double> apply_lora(std::span<const double> base_output, std::span<const double> layer_input,
                               const LoraLayer& lora) {
    if (base_output.size() != lora.out_dim || layer_input.size() != lora.in_dim) {
        throw ValidationError("apply_lora: layer '" + lora.name + "' expects input " + std::to_string(lora.in_dim) +
                              " and output " + std::to_string(lora.out_dim) + ", got " +
                              std::to_string(layer_input.size()) + " and " + std::to_string(base_output.size()));
    }
    std::vector<double> out(base_output.begin(), base_output.end());
    apply_lora_batch(layer_input, 1, lora, out);
    return out;
}

void apply_lora_batch(std::span<const double> input, std::size_t rows, const LoraLayer& lora,
                      std::span<double> output) {
    if (input.size() != rows * lora.in_dim || output.size() != rows * lora.out_dim) {
        throw ValidationError("apply_lora_batch: dimension mismatch for layer '" + lora.name + "'");
    }
    std::vector<double> projected(rows * lora.rank);
    simd::matmul_nt(input, rows, lora.in_dim, lora.a, lora.rank, projected);
    std::vector<double> residual(rows * lora.out_dim);
    simd::matmul_nt(projected, rows, lora.rank, lora.b, lora.out_dim, residual);
    simd::axpy(lora.scale, residual, output);
}

namespace {

constexpr char kMagic[8] = {'F', 'F', 'L', 'O', 'R', 'A', '\0', '\1'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
public:
    explicit Writer(std::ofstream& out) : out_(out) {}
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

private:
    void le(std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    std::ofstream& out_;
};

class Reader {
public:
    Reader(std::ifstream& in, std::string path) : in_(in), path_(std::move(path)) {}
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(le(8)); }
    std::string str() {
        const std::uint32_t n = u32();
        if (n > (1u << 20)) fail("string too long");
        std::string s(n, '\0');
        in_.read(s.data(), n);
        if (!in_) fail("truncated");
        return s;
    }
    [[noreturn]] void fail(const std::string& why) { throw ValidationError("bad LoRA file " + path_ + ": " + why); }

private:
    std::uint64_t le(int bytes) {
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) {
            const int c = in_.get();
            if (c == EOF) fail("truncated");
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
        }
        return v;
    }
    std::ifstream& in_;
    std::string path_;
};

}  // namespace

void save_lora(const std::filesystem::path& path, const LoraWeights& weights) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write " + path.string());
    out.write(kMagic, sizeof(kMagic));
    Writer w(out);
    w.u32(kFormatVersion);
    w.u64(weights.schedule_fingerprint);
    w.str(weights.backend);
    w.u32(static_cast<std::uint32_t>(weights.layers.size()));
    for (const auto& l : weights.layers) {
        w.str(l.name);
        w.u32(static_cast<std::uint32_t>(l.out_dim));
        w.u32(static_cast<std::uint32_t>(l.in_dim));
        w.u32(static_cast<std::uint32_t>(l.rank));
        w.f64(l.scale);
        for (double v : l.a) w.f64(v);
        for (double v : l.b) w.f64(v);
    }
    if (!out) throw RuntimeFailure("cannot write " + path.string());
}

LoraWeights load_lora(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open LoRA file " + path.string());
    Reader r(in, path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) r.fail("bad magic");
    if (r.u32() != kFormatVersion) r.fail("unsupported version");

    LoraWeights weights;
    weights.schedule_fingerprint = r.u64();
    weights.backend = r.str();
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        LoraLayer l;
        l.name = r.str();
        l.out_dim = r.u32();
        l.in_dim = r.u32();
        l.rank = r.u32();
        l.scale = r.f64();
        if (l.rank == 0 || l.rank >= std::min(l.out_dim, l.in_dim)) r.fail("layer '" + l.name + "' has invalid rank");
        if (l.out_dim * l.in_dim > (1u << 26)) r.fail("layer '" + l.name + "' too large");
        l.a.resize(l.rank * l.in_dim);
        l.b.resize(l.out_dim * l.rank);
        for (double& v : l.a) v = r.f64();
        for (double& v : l.b) v = r.f64();
        weights.layers.push_back(std::move(l));
    }
    return weights;
}

}  // namespace faithfill::diffusion
