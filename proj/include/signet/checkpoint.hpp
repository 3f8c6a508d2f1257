#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "signet/tensor.hpp"

namespace signet {

// SNF-style binary container for model checkpoints: magic, version, a text
// key=value config block, then named float32 tensors with explicit shapes.
// Writing is order-preserving, so write(read(bytes)) == bytes.
struct Container {
    std::string magic;  // 4 chars, "GANC" or "CLFC"
    std::uint32_t version = 1;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, Tensor>> tensors;

    void set(const std::string& key, const std::string& value);
    void set_u64(const std::string& key, std::uint64_t v);
    void set_i64(const std::string& key, std::int64_t v);
    void set_f32(const std::string& key, float v);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::int64_t get_i64(const std::string& key) const;
    float get_f32(const std::string& key) const;

    void add_tensor(const std::string& name, Tensor t);
    const Tensor& tensor(const std::string& name) const;
    bool has_tensor(const std::string& name) const;
};

std::vector<std::uint8_t> write_container(const Container& c);
Container read_container(std::span<const std::uint8_t> bytes, const std::string& expected_magic);

}  // namespace signet
