#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "signet/dataset.hpp"

namespace signet {

// SNF (Sign Normalized Format): bit-exact binary dataset container.
//
//   magic   "SNF1"
//   version u32 LE = 1
//   count, height, width, channels: u32 LE
//   labels  count x u8
//   pixels  count*H*W*C x f32 LE, row-major, image-major
//
// Total size is exactly 24 + count + 4*count*H*W*C bytes.

std::vector<std::uint8_t> write_snf(const Dataset& images);
Dataset read_snf(std::span<const std::uint8_t> bytes);

void save_snf(const std::string& path, const Dataset& images);
Dataset load_snf(const std::string& path);

}  // namespace signet
