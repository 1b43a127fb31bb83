#include "faithfill/core/png_io.hpp"

#include "faithfill/core/error.hpp"

#include <png.h>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

namespace faithfill {
namespace {

constexpr std::uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::optional<std::string> find_text_chunk(const std::vector<std::uint8_t>& bytes, std::string_view key) {
    std::size_t pos = sizeof(kSignature);
    while (pos + 12 <= bytes.size()) {
        const std::uint32_t length = read_be32(&bytes[pos]);
        if (pos + 12 + length > bytes.size()) break;
        const std::string type(reinterpret_cast<const char*>(&bytes[pos + 4]), 4);
        if (type == "tEXt") {
            const char* body = reinterpret_cast<const char*>(&bytes[pos + 8]);
            const std::string_view text(body, length);
            const auto sep = text.find('\0');
            if (sep != std::string_view::npos && text.substr(0, sep) == key) {
                return std::string(text.substr(sep + 1));
            }
        }
        if (type == "IEND") break;
        pos += 12 + length;
    }
    return std::nullopt;
}

/// Inserts a tEXt chunk right after IHDR.
std::vector<std::uint8_t> with_text_chunk(const std::vector<std::uint8_t>& png, std::string_view key,
                                          std::string_view value) {
    const std::size_t ihdr_end = sizeof(kSignature) + 12 + read_be32(&png[sizeof(kSignature)]);
    std::vector<std::uint8_t> chunk;
    std::string payload = "tEXt";
    payload.append(key);
    payload.push_back('\0');
    payload.append(value);
    append_be32(chunk, static_cast<std::uint32_t>(payload.size() - 4));
    chunk.insert(chunk.end(), payload.begin(), payload.end());
    const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size()));
    append_be32(chunk, static_cast<std::uint32_t>(crc));

    std::vector<std::uint8_t> out(png.begin(), png.begin() + static_cast<std::ptrdiff_t>(ihdr_end));
    out.insert(out.end(), chunk.begin(), chunk.end());
    out.insert(out.end(), png.begin() + static_cast<std::ptrdiff_t>(ihdr_end), png.end());
    return out;
}

struct DecodedPng {
    std::size_t height;
    std::size_t width;
    std::vector<std::uint8_t> pixels;
};

DecodedPng decode(const std::vector<std::uint8_t>& bytes, png_uint_32 format, const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw ValidationError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    image.format = format;
    DecodedPng out{image.height, image.width, std::vector<std::uint8_t>(PNG_IMAGE_SIZE(image))};
    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw ValidationError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    if (out.height == 0 || out.width == 0) throw ValidationError("empty PNG " + path.string());
    return out;
}

std::vector<std::uint8_t> encode(const std::uint8_t* pixels, std::size_t height, std::size_t width,
                                 png_uint_32 format) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0, nullptr)) {
        throw RuntimeFailure(std::string("PNG encode failed: ") + image.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0, nullptr)) {
        throw RuntimeFailure(std::string("PNG encode failed: ") + image.message);
    }
    out.resize(size);
    return out;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw RuntimeFailure("cannot write " + path.string());
}

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

ImageBuffer load_png(const std::filesystem::path& path) {
    const auto decoded = decode(read_file(path), PNG_FORMAT_RGB, path);
    ImageBuffer image(decoded.height, decoded.width);
    auto data = image.data();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = decoded.pixels[i] / 255.0;
    return image;
}

void save_png(const std::filesystem::path& path, const ImageBuffer& image) {
    const auto data = image.data();
    std::vector<std::uint8_t> pixels(data.size());
    std::transform(data.begin(), data.end(), pixels.begin(), quantize);
    write_file(path, encode(pixels.data(), image.height(), image.width(), PNG_FORMAT_RGB));
}

BinaryMask load_mask_png(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (const auto convention = find_text_chunk(bytes, kMaskConventionKey);
        convention && *convention != kMaskConventionFill) {
        throw ValidationError("mask " + path.string() + " declares convention '" + *convention +
                              "', expected '" + std::string(kMaskConventionFill) + "'");
    }
    const auto decoded = decode(bytes, PNG_FORMAT_GRAY, path);
    BinaryMask mask(decoded.height, decoded.width);
    for (std::size_t y = 0; y < decoded.height; ++y) {
        for (std::size_t x = 0; x < decoded.width; ++x) {
            mask.set(y, x, decoded.pixels[y * decoded.width + x] >= 128);
        }
    }
    return mask;
}

void save_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> pixels(mask.pixel_count());
    const auto values = mask.values();
    std::transform(values.begin(), values.end(), pixels.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 255 : 0); });
    const auto png = encode(pixels.data(), mask.height(), mask.width(), PNG_FORMAT_GRAY);
    write_file(path, with_text_chunk(png, kMaskConventionKey, kMaskConventionFill));
}

std::vector<double> load_gray_png(const std::filesystem::path& path, std::size_t& height, std::size_t& width) {
    const auto decoded = decode(read_file(path), PNG_FORMAT_GRAY, path);
    height = decoded.height;
    width = decoded.width;
    std::vector<double> values(decoded.pixels.size());
    std::transform(decoded.pixels.begin(), decoded.pixels.end(), values.begin(),
                   [](std::uint8_t v) { return v / 255.0; });
    return values;
}

void save_gray_png(const std::filesystem::path& path, std::span<const double> values, std::size_t height,
                   std::size_t width) {
    if (values.size() != height * width) throw ValidationError("gray plane size does not match dimensions");
    std::vector<std::uint8_t> pixels(values.size());
    std::transform(values.begin(), values.end(), pixels.begin(), quantize);
    write_file(path, encode(pixels.data(), height, width, PNG_FORMAT_GRAY));
}

PngInfo read_png_info(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw ValidationError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    PngInfo info{image.height, image.width, find_text_chunk(bytes, kMaskConventionKey)};
    png_image_free(&image);
    return info;
}

}  // namespace faithfill
