#include "faithfill/core/error.hpp"
#include "faithfill/core/image.hpp"
#include "faithfill/core/png_io.hpp"
#include "faithfill/core/process.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

#include <zlib.h>

using namespace faithfill;

TEST_CASE("image and mask constructors reject empty sizes") {
    CHECK_THROWS_AS(ImageBuffer(0, 4), ValidationError);
    CHECK_THROWS_AS(BinaryMask(4, 0), ValidationError);
}

TEST_CASE("composite keeps every mask == 0 pixel bit-exact") {
    const auto keep = testing::random_image(9, 7, 1);
    const auto filled = testing::random_image(9, 7, 2);
    const auto mask = testing::box_mask(9, 7, 2, 3, 5, 8);
    const auto out = composite(keep, filled, mask);
    CHECK(max_deviation_outside(out, keep, mask) == 0.0);
    for (std::size_t y = 0; y < 9; ++y)
        for (std::size_t x = 0; x < 7; ++x)
            for (std::size_t c = 0; c < 3; ++c)
                CHECK(out.at(y, x, c) == (mask.at(y, x) ? filled.at(y, x, c) : keep.at(y, x, c)));
}

TEST_CASE("inverted mask zeroes the fill region") {
    const auto image = testing::random_image(4, 4, 3);
    const auto mask = testing::box_mask(4, 4, 0, 0, 2, 4);
    const auto out = apply_inverted_mask(image, mask);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x)
            for (std::size_t c = 0; c < 3; ++c) CHECK(out.at(y, x, c) == (x < 2 ? 0.0 : image.at(y, x, c)));
}

TEST_CASE("resizing to the same size is the identity") {
    const auto image = testing::random_image(6, 5, 4);
    CHECK(resize_bilinear(image, image.resolution()) == image);
    const auto mask = testing::box_mask(6, 5, 1, 1, 3, 4);
    CHECK(resize_nearest(mask, mask.resolution()) == mask);
    CHECK(resize_nearest(mask, {12, 10}).coverage() == doctest::Approx(mask.coverage()));
}

TEST_CASE("PNG round trip of 8-bit images is exact") {
    ScratchDir dir("png");
    ImageBuffer image(5, 6);
    for (std::size_t i = 0; i < image.data().size(); ++i) image.data()[i] = static_cast<double>((i * 37) % 256) / 255.0;
    save_png(dir.path() / "a.png", image);
    const auto back = load_png(dir.path() / "a.png");
    CHECK(back == image);
    const auto info = read_png_info(dir.path() / "a.png");
    CHECK(info.height == 5);
    CHECK(info.width == 6);
}

TEST_CASE("mask PNGs carry the fill convention and round trip") {
    ScratchDir dir("mask");
    const auto mask = testing::box_mask(8, 8, 1, 2, 6, 7);
    save_mask_png(dir.path() / "m.png", mask);
    CHECK(load_mask_png(dir.path() / "m.png") == mask);
    const auto info = read_png_info(dir.path() / "m.png");
    REQUIRE(info.mask_convention);
    CHECK(*info.mask_convention == kMaskConventionFill);
}

TEST_CASE("a mask declaring the flipped convention is rejected") {
    ScratchDir dir("maskflip");
    const auto path = dir.path() / "m.png";
    save_mask_png(path, testing::box_mask(8, 8, 0, 0, 4, 4));
    // Rewrite the convention value in place (same length) and recompute the chunk CRC.
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    in.close();
    const std::string from(kMaskConventionFill);
    const std::string to = "0=fill,255=skip";
    REQUIRE(from.size() == to.size());
    const auto pos = bytes.find(from);
    REQUIRE(pos != std::string::npos);
    bytes.replace(pos, from.size(), to);
    const auto chunk_type = bytes.rfind("tEXt", pos);
    const auto length = static_cast<std::size_t>(static_cast<unsigned char>(bytes[chunk_type - 1]));
    const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(bytes.data() + chunk_type),
                           static_cast<uInt>(length + 4));
    for (int i = 0; i < 4; ++i) {
        bytes[chunk_type + 4 + length + i] = static_cast<char>((crc >> (24 - 8 * i)) & 0xff);
    }
    std::ofstream(path, std::ios::binary) << bytes;
    CHECK(read_png_info(path).mask_convention == to);
    CHECK_THROWS_WITH_AS(load_mask_png(path), doctest::Contains("convention"), ValidationError);
}

TEST_CASE("loading a missing or corrupt PNG is a validation error") {
    ScratchDir dir("bad");
    CHECK_THROWS_AS(load_png(dir.path() / "none.png"), ValidationError);
    std::ofstream(dir.path() / "bad.png") << "not a png";
    CHECK_THROWS_AS(load_png(dir.path() / "bad.png"), ValidationError);
}
