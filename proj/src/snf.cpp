#include "signet/snf.hpp"

#include <cstring>

#include "signet/error.hpp"
#include "signet/util.hpp"

namespace signet {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t pos) {
    return static_cast<std::uint32_t>(bytes[pos]) | (static_cast<std::uint32_t>(bytes[pos + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes[pos + 2]) << 16) | (static_cast<std::uint32_t>(bytes[pos + 3]) << 24);
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

float get_f32(std::span<const std::uint8_t> bytes, std::size_t pos) {
    const std::uint32_t bits = get_u32(bytes, pos);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

std::vector<std::uint8_t> write_snf(const Dataset& images) {
    const int h = kImageSize, w = kImageSize, c = 1;
    for (const auto& img : images) {
        if (img.pixels.shape != std::vector<int>{h, w, c})
            throw Error::data("snf: image shape " + shape_str(img.pixels.shape) + " is not canonical [28,28,1]");
        if (img.class_id >= kNumClasses)
            throw Error::data("snf: label " + std::to_string(img.class_id) + " out of range [0,10)");
    }
    std::vector<std::uint8_t> out;
    out.reserve(24 + images.size() * (1 + 4 * static_cast<std::size_t>(h) * w * c));
    out.insert(out.end(), {'S', 'N', 'F', '1'});
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(images.size()));
    put_u32(out, static_cast<std::uint32_t>(h));
    put_u32(out, static_cast<std::uint32_t>(w));
    put_u32(out, static_cast<std::uint32_t>(c));
    for (const auto& img : images) out.push_back(img.class_id);
    for (const auto& img : images)
        for (float v : img.pixels.data) put_f32(out, v);
    return out;
}

Dataset read_snf(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 24) throw Error::data("snf: file too short for header (" + std::to_string(bytes.size()) + " bytes)");
    if (std::memcmp(bytes.data(), "SNF1", 4) != 0) throw Error::data("snf: bad magic");
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != 1) throw Error::data("snf: unsupported version " + std::to_string(version));
    const std::uint64_t count = get_u32(bytes, 8);
    const std::uint64_t h = get_u32(bytes, 12);
    const std::uint64_t w = get_u32(bytes, 16);
    const std::uint64_t c = get_u32(bytes, 20);
    const std::uint64_t expect = 24 + count + 4 * count * h * w * c;
    if (bytes.size() != expect)
        throw Error::data("snf: size mismatch: header implies " + std::to_string(expect) + " bytes, file has " +
                          std::to_string(bytes.size()));
    if (count > 0 && (h != kImageSize || w != kImageSize || c != 1))
        throw Error::data("snf: unsupported image geometry " + std::to_string(h) + "x" + std::to_string(w) + "x" +
                          std::to_string(c));

    Dataset images;
    images.reserve(count);
    const std::size_t labels_at = 24;
    const std::size_t pixels_at = labels_at + count;
    const std::size_t per_image = static_cast<std::size_t>(h * w * c);
    for (std::uint64_t i = 0; i < count; ++i) {
        LabeledImage img;
        img.class_id = bytes[labels_at + i];
        if (img.class_id >= kNumClasses)
            throw Error::data("snf: label " + std::to_string(img.class_id) + " out of range [0,10) at image " +
                              std::to_string(i));
        img.pixels = Tensor({static_cast<int>(h), static_cast<int>(w), static_cast<int>(c)});
        for (std::size_t j = 0; j < per_image; ++j)
            img.pixels.data[j] = get_f32(bytes, pixels_at + (static_cast<std::size_t>(i) * per_image + j) * 4);
        images.push_back(std::move(img));
    }
    return images;
}

void save_snf(const std::string& path, const Dataset& images) { write_file(path, write_snf(images)); }

Dataset load_snf(const std::string& path) {
    const auto bytes = read_file(path);
    return read_snf(bytes);
}

}  // namespace signet
