#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "signet/tensor.hpp"

namespace signet {

inline constexpr int kNumClasses = 10;
inline constexpr int kImageSize = 28;

struct SignClass {
    int id;
    std::string name;
    std::vector<std::string> feature_tags;
};

// The ten-class taxonomy shared by the source benchmarks.
const std::array<SignClass, kNumClasses>& sign_classes();

// Canonical 28x28 grayscale image in [-1,1] plus its class id. source_tag
// records provenance: an origin dataset name, "augmented", or "synthetic".
struct LabeledImage {
    Tensor pixels;  // {28, 28, 1}
    std::uint8_t class_id = 0;
    std::string source_tag;
};

using Dataset = std::vector<LabeledImage>;

struct DatasetSplit {
    Dataset train;
    Dataset test;
    std::uint64_t seed = 0;
    double test_fraction = 0.0;
};

// Seeded stratified split: per-class test counts are the largest-remainder
// apportionment of round(test_fraction * total), so each class deviates from
// exact proportionality by at most one image.
DatasetSplit split_dataset(const Dataset& images, double test_fraction, std::uint64_t seed);

// Per-class image counts; index is the class id.
std::array<int, kNumClasses> class_histogram(const Dataset& images);

}  // namespace signet
