#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "signet/tensor.hpp"

namespace signet {

// 8-bit RGB pixel grid as decoded from disk.
struct ImageU8 {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> rgb;  // height * width * 3, row-major

    std::uint8_t& at(int y, int x, int c) { return rgb[static_cast<std::size_t>((y * width + x) * 3 + c)]; }
    std::uint8_t at(int y, int x, int c) const { return rgb[static_cast<std::size_t>((y * width + x) * 3 + c)]; }
};

enum class ImageFormat { ppm_p6, png };

// Decodes a PPM (P6, maxval 255) or PNG (8-bit, non-interlaced) byte stream.
// Malformed input raises a data error naming the byte offset.
ImageU8 decode_image(std::span<const std::uint8_t> bytes, ImageFormat format);

// Dispatches on the file magic.
ImageU8 decode_image_auto(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_ppm_p6(const ImageU8& img);

// 8-bit RGB, single IDAT, no interlace.
std::vector<std::uint8_t> encode_png(const ImageU8& img);

// RGB -> luma -> bilinear resize (corner aligned) -> [-1,1] normalization.
Tensor preprocess(const ImageU8& rgb, int target = 28);

// Inverse of the normalization step, quantized to bytes.
std::uint8_t denormalize_pixel(float v);
ImageU8 to_image(const Tensor& canonical);

}  // namespace signet
