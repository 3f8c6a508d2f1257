#include "signet/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "signet/error.hpp"

namespace signet {

namespace {

[[noreturn]] void parse_fail(const char* what, std::size_t offset, const std::string& detail) {
    throw Error::data(std::string(what) + " parse error at byte " + std::to_string(offset) + ": " + detail);
}

// --- PPM (P6) ---------------------------------------------------------------

struct PpmCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    int peek() const { return pos < bytes.size() ? bytes[pos] : -1; }
    int get() { return pos < bytes.size() ? bytes[pos++] : -1; }

    void skip_space_and_comments() {
        for (;;) {
            int c = peek();
            if (c == '#') {
                while (c != -1 && c != '\n') c = get();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                get();
            } else {
                return;
            }
        }
    }

    int read_uint() {
        skip_space_and_comments();
        if (!std::isdigit(peek())) parse_fail("ppm", pos, "expected integer");
        long v = 0;
        while (std::isdigit(peek())) {
            v = v * 10 + (get() - '0');
            if (v > 1 << 30) parse_fail("ppm", pos, "integer overflow");
        }
        return static_cast<int>(v);
    }
};

ImageU8 decode_ppm_p6(std::span<const std::uint8_t> bytes) {
    PpmCursor cur{bytes};
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') parse_fail("ppm", 0, "magic is not P6");
    cur.pos = 2;
    const int width = cur.read_uint();
    const int height = cur.read_uint();
    const int maxval = cur.read_uint();
    if (width < 1 || height < 1) parse_fail("ppm", cur.pos, "non-positive dimensions");
    if (maxval != 255)
        throw Error::data("ppm: unsupported maxval " + std::to_string(maxval) + " (only 255 is supported)");
    const int sep = cur.get();
    if (sep != ' ' && sep != '\t' && sep != '\r' && sep != '\n') parse_fail("ppm", cur.pos - 1, "missing raster separator");
    const std::size_t need = static_cast<std::size_t>(width) * height * 3;
    if (bytes.size() - cur.pos < need)
        parse_fail("ppm", bytes.size(), "truncated raster: need " + std::to_string(need) + " bytes, have " +
                                            std::to_string(bytes.size() - cur.pos));
    ImageU8 img;
    img.width = width;
    img.height = height;
    img.rgb.assign(bytes.begin() + static_cast<std::ptrdiff_t>(cur.pos),
                   bytes.begin() + static_cast<std::ptrdiff_t>(cur.pos + need));
    return img;
}

// --- PNG ---------------------------------------------------------------------

std::uint32_t be32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

std::uint8_t paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
    if (pb <= pc) return static_cast<std::uint8_t>(b);
    return static_cast<std::uint8_t>(c);
}

ImageU8 decode_png(std::span<const std::uint8_t> bytes) {
    static const std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kSig, 8) != 0) parse_fail("png", 0, "bad signature");

    int width = 0, height = 0, bit_depth = 0, color_type = 0;
    bool seen_ihdr = false, seen_iend = false;
    std::vector<std::uint8_t> idat;
    std::vector<std::uint8_t> palette;  // rgb triples

    std::size_t pos = 8;
    while (pos < bytes.size() && !seen_iend) {
        if (bytes.size() - pos < 12) parse_fail("png", pos, "truncated chunk header");
        const std::uint32_t len = be32(&bytes[pos]);
        if (bytes.size() - pos - 12 < len) parse_fail("png", pos, "truncated chunk payload");
        const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
        const std::uint8_t* data = &bytes[pos + 8];
        const std::uint32_t stored_crc = be32(&bytes[pos + 8 + len]);
        std::uint32_t crc = static_cast<std::uint32_t>(crc32(0, &bytes[pos + 4], len + 4));
        if (crc != stored_crc) parse_fail("png", pos + 8 + len, "chunk crc mismatch");

        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) parse_fail("png", pos, "IHDR length");
            width = static_cast<int>(be32(data));
            height = static_cast<int>(be32(data + 4));
            bit_depth = data[8];
            color_type = data[9];
            if (width < 1 || height < 1) parse_fail("png", pos, "non-positive dimensions");
            if (bit_depth != 8)
                throw Error::data("png: unsupported bit depth " + std::to_string(bit_depth) + " (only 8 is supported)");
            if (color_type != 0 && color_type != 2 && color_type != 3 && color_type != 4 && color_type != 6)
                throw Error::data("png: unsupported color type " + std::to_string(color_type));
            if (data[10] != 0 || data[11] != 0) parse_fail("png", pos, "nonzero compression/filter method");
            if (data[12] != 0) throw Error::data("png: interlaced images are not supported");
            seen_ihdr = true;
        } else if (std::memcmp(type, "PLTE", 4) == 0) {
            if (len % 3 != 0) parse_fail("png", pos, "PLTE length not a multiple of 3");
            palette.assign(data, data + len);
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            seen_iend = true;
        }
        pos += 12 + len;
    }
    if (!seen_ihdr) parse_fail("png", 8, "missing IHDR");
    if (!seen_iend) parse_fail("png", pos, "missing IEND");
    if (idat.empty()) parse_fail("png", pos, "missing IDAT");

    const int channels = color_type == 0 ? 1 : color_type == 2 ? 3 : color_type == 3 ? 1 : color_type == 4 ? 2 : 4;
    const std::size_t row_bytes = static_cast<std::size_t>(width) * channels;
    const std::size_t raw_size = static_cast<std::size_t>(height) * (row_bytes + 1);

    std::vector<std::uint8_t> raw(raw_size);
    uLongf out_len = static_cast<uLongf>(raw_size);
    const int zrc = uncompress(raw.data(), &out_len, idat.data(), static_cast<uLong>(idat.size()));
    if (zrc != Z_OK || out_len != raw_size)
        throw Error::data("png: IDAT inflate failed (zlib rc " + std::to_string(zrc) + ")");

    // Defilter in place into `recon`.
    std::vector<std::uint8_t> recon(static_cast<std::size_t>(height) * row_bytes);
    const int bpp = channels;
    for (int y = 0; y < height; ++y) {
        const std::uint8_t filter = raw[static_cast<std::size_t>(y) * (row_bytes + 1)];
        const std::uint8_t* src = &raw[static_cast<std::size_t>(y) * (row_bytes + 1) + 1];
        std::uint8_t* dst = &recon[static_cast<std::size_t>(y) * row_bytes];
        const std::uint8_t* prior = y > 0 ? &recon[static_cast<std::size_t>(y - 1) * row_bytes] : nullptr;
        for (std::size_t i = 0; i < row_bytes; ++i) {
            const int left = i >= static_cast<std::size_t>(bpp) ? dst[i - bpp] : 0;
            const int up = prior ? prior[i] : 0;
            const int ul = (prior && i >= static_cast<std::size_t>(bpp)) ? prior[i - bpp] : 0;
            int v = src[i];
            switch (filter) {
                case 0: break;
                case 1: v += left; break;
                case 2: v += up; break;
                case 3: v += (left + up) / 2; break;
                case 4: v += paeth(left, up, ul); break;
                default: parse_fail("png", 0, "unknown filter type " + std::to_string(filter));
            }
            dst[i] = static_cast<std::uint8_t>(v & 0xff);
        }
    }

    ImageU8 img;
    img.width = width;
    img.height = height;
    img.rgb.resize(static_cast<std::size_t>(width) * height * 3);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const std::uint8_t* px = &recon[static_cast<std::size_t>(y) * row_bytes + static_cast<std::size_t>(x) * channels];
            std::uint8_t r, g, b;
            switch (color_type) {
                case 0: r = g = b = px[0]; break;
                case 2: r = px[0], g = px[1], b = px[2]; break;
                case 3: {
                    const std::size_t idx = static_cast<std::size_t>(px[0]) * 3;
                    if (idx + 2 >= palette.size()) throw Error::data("png: palette index out of range");
                    r = palette[idx], g = palette[idx + 1], b = palette[idx + 2];
                    break;
                }
                case 4: r = g = b = px[0]; break;
                default: r = px[0], g = px[1], b = px[2]; break;  // 6, alpha dropped
            }
            img.at(y, x, 0) = r;
            img.at(y, x, 1) = g;
            img.at(y, x, 2) = b;
        }
    return img;
}

}  // namespace

ImageU8 decode_image(std::span<const std::uint8_t> bytes, ImageFormat format) {
    switch (format) {
        case ImageFormat::ppm_p6: return decode_ppm_p6(bytes);
        case ImageFormat::png: return decode_png(bytes);
    }
    throw Error::data("decode_image: unknown format");
}

ImageU8 decode_image_auto(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm_p6(bytes);
    if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P') return decode_png(bytes);
    throw Error::data("decode_image: unrecognized image magic");
}

std::vector<std::uint8_t> encode_ppm_p6(const ImageU8& img) {
    std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.rgb.begin(), img.rgb.end());
    return out;
}

namespace {

void png_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void png_chunk(std::vector<std::uint8_t>& out, const char type[4], const std::vector<std::uint8_t>& data) {
    png_be32(out, static_cast<std::uint32_t>(data.size()));
    std::vector<std::uint8_t> body(type, type + 4);
    body.insert(body.end(), data.begin(), data.end());
    out.insert(out.end(), body.begin(), body.end());
    png_be32(out, static_cast<std::uint32_t>(crc32(0, body.data(), static_cast<uInt>(body.size()))));
}

}  // namespace

std::vector<std::uint8_t> encode_png(const ImageU8& img) {
    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

    std::vector<std::uint8_t> ihdr;
    png_be32(ihdr, static_cast<std::uint32_t>(img.width));
    png_be32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // 8-bit RGB, no interlace
    png_chunk(out, "IHDR", ihdr);

    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(img.height) * (1 + static_cast<std::size_t>(img.width) * 3));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);  // filter: none
        const std::uint8_t* row = img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3;
        raw.insert(raw.end(), row, row + static_cast<std::size_t>(img.width) * 3);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw Error::numeric("png: deflate failed");
    compressed.resize(bound);
    png_chunk(out, "IDAT", compressed);
    png_chunk(out, "IEND", {});
    return out;
}

Tensor preprocess(const ImageU8& rgb, int target) {
    if (rgb.height < 1 || rgb.width < 1) throw Error::data("preprocess: empty image");
    const int h = rgb.height, w = rgb.width;
    std::vector<float> gray(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            gray[static_cast<std::size_t>(y) * w + x] = 0.299f * rgb.at(y, x, 0) + 0.587f * rgb.at(y, x, 1) +
                                                        0.114f * rgb.at(y, x, 2);

    Tensor out({target, target, 1});
    const float sy = target > 1 ? static_cast<float>(h - 1) / static_cast<float>(target - 1) : 0.0f;
    const float sx = target > 1 ? static_cast<float>(w - 1) / static_cast<float>(target - 1) : 0.0f;
    for (int y = 0; y < target; ++y)
        for (int x = 0; x < target; ++x) {
            const float fy = y * sy;
            const float fx = x * sx;
            const int y0 = std::min(static_cast<int>(fy), h - 1);
            const int x0 = std::min(static_cast<int>(fx), w - 1);
            const int y1 = std::min(y0 + 1, h - 1);
            const int x1 = std::min(x0 + 1, w - 1);
            const float dy = fy - static_cast<float>(y0);
            const float dx = fx - static_cast<float>(x0);
            const float top = gray[static_cast<std::size_t>(y0) * w + x0] * (1 - dx) + gray[static_cast<std::size_t>(y0) * w + x1] * dx;
            const float bot = gray[static_cast<std::size_t>(y1) * w + x0] * (1 - dx) + gray[static_cast<std::size_t>(y1) * w + x1] * dx;
            const float v = top * (1 - dy) + bot * dy;
            out.at3(y, x, 0) = v / 127.5f - 1.0f;
        }
    return out;
}

std::uint8_t denormalize_pixel(float v) {
    const float scaled = (std::clamp(v, -1.0f, 1.0f) + 1.0f) * 127.5f;
    return static_cast<std::uint8_t>(std::lround(scaled));
}

ImageU8 to_image(const Tensor& canonical) {
    if (canonical.rank() != 3 || canonical.dim(2) != 1)
        throw Error::data("to_image: expected HxWx1 tensor, got " + shape_str(canonical.shape));
    ImageU8 img;
    img.height = canonical.dim(0);
    img.width = canonical.dim(1);
    img.rgb.resize(static_cast<std::size_t>(img.height) * img.width * 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const std::uint8_t g = denormalize_pixel(canonical.at3(y, x, 0));
            img.at(y, x, 0) = img.at(y, x, 1) = img.at(y, x, 2) = g;
        }
    return img;
}

}  // namespace signet
