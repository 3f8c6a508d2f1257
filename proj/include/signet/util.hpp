#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace signet {

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n);
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

// Fixed-point decimal formatting (locale independent).
std::string format_fixed(double v, int decimals);
// Like format_fixed but with trailing zeros (and a bare trailing dot) removed.
std::string format_trimmed(double v, int decimals);

}  // namespace signet
