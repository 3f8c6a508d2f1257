#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "signet/dataset.hpp"

namespace signet {

// Procedural stand-in corpus: ten rendered geometric "sign" archetypes
// (rings, glyph bars, octagon, stripe, diamond, triangle) at 28x28 with
// random pose and lighting jitter. Used by demos and the end-to-end suites
// where the real national benchmarks are unavailable.
LabeledImage render_toy_sign(int class_id, std::uint64_t seed);

Dataset make_toy_dataset(const std::array<int, kNumClasses>& per_class, std::uint64_t seed);
Dataset make_toy_dataset(int per_class, std::uint64_t seed);

// Writes dir/<class_id>/sign_<n>.(ppm|png); every eighth image is PNG so both
// decoders see traffic.
void write_toy_corpus(const std::string& dir, int per_class, std::uint64_t seed);

}  // namespace signet
