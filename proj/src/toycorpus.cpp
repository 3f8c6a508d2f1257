#include "signet/toycorpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "signet/error.hpp"
#include "signet/image.hpp"
#include "signet/rng.hpp"
#include "signet/util.hpp"

namespace signet {

namespace {

struct Pose {
    double cx, cy;      // center in pixels
    double radius;      // outer radius in pixels
    double cos_t, sin_t;
    double ink, bg;     // luminances in [0,1]
};

// Shape membership in canonical coordinates (rotated, radius-normalized).
// Returns the luminance or a negative value for "background".
double shade(int class_id, double ax, double ay, const Pose& p) {
    const double d = std::sqrt(ax * ax + ay * ay);
    const double u = std::abs(ax), v = std::abs(ay);
    const double ring_w = 0.26;
    const bool ring = std::abs(d - 0.87) < ring_w / 2;

    switch (class_id) {
        case 0:  // plain ring
            return ring ? p.ink : -1;
        case 1:  // ring with a thick horizontal bar
            if (v < 0.24 && u < 0.62) return p.ink;
            return ring ? p.ink : -1;
        case 2: {  // filled octagon with light text streaks
            const double oct = std::max({u, v, (u + v) / 1.41421356});
            if (oct < 0.95) {
                for (double row : {-0.38, 0.0, 0.38})
                    if (std::abs(ay - row) < 0.09 && u < 0.55) return p.bg;
                return p.ink;
            }
            return -1;
        }
        case 3:  // ring + one bar glyph
            if (u < 0.11 && v < 0.5) return p.ink;
            return ring ? p.ink : -1;
        case 4:  // ring + two bars
            if ((std::abs(ax - 0.26) < 0.1 || std::abs(ax + 0.26) < 0.1) && v < 0.5) return p.ink;
            return ring ? p.ink : -1;
        case 5:  // ring + three bars
            if ((u < 0.09 || std::abs(u - 0.4) < 0.09) && v < 0.5) return p.ink;
            return ring ? p.ink : -1;
        case 6:  // ring + cross glyph
            if ((u < 0.1 && v < 0.52) || (v < 0.1 && u < 0.52)) return p.ink;
            return ring ? p.ink : -1;
        case 7:  // thin ring + diagonal stripe
            if (std::abs(ax - ay) < 0.16 && d < 0.9) return p.ink;
            return std::abs(d - 0.87) < 0.09 ? p.ink : -1;
        case 8: {  // diamond, bright core with dark rim
            const double dia = u + v;
            if (dia < 0.95) return dia > 0.62 ? p.ink : (p.bg + p.ink) / 2;
            return -1;
        }
        case 9: {  // downward triangle outline
            auto inside = [&](double scale) {
                const double yy = ay / scale, xx = ax / scale;
                return yy > -0.62 && yy < 0.82 && (0.82 - yy) > 1.45 * std::abs(xx);
            };
            return inside(1.0) && !inside(0.62) ? p.ink : -1;
        }
        default: throw Error::data("render_toy_sign: class " + std::to_string(class_id) + " out of range");
    }
}

}  // namespace

LabeledImage render_toy_sign(int class_id, std::uint64_t seed) {
    if (class_id < 0 || class_id >= kNumClasses)
        throw Error::data("render_toy_sign: class " + std::to_string(class_id) + " out of range");
    Rng rng(seed);

    Pose p{};
    p.cx = 13.5 + rng.uniform(-3.2, 3.2);
    p.cy = 13.5 + rng.uniform(-3.2, 3.2);
    p.radius = 10.5 * rng.uniform(0.62, 1.2);
    const bool text_like = class_id >= 2 && class_id <= 6;
    const double theta = rng.uniform(-1.0, 1.0) * (text_like ? 9.0 : 17.0) * 3.14159265358979 / 180.0;
    p.cos_t = std::cos(theta);
    p.sin_t = std::sin(theta);
    p.ink = rng.uniform(0.1, 0.45);
    p.bg = rng.uniform(0.55, 0.9);

    const double contrast = rng.uniform(0.6, 1.25);
    const double bright = rng.uniform(-0.2, 0.2);

    LabeledImage img;
    img.class_id = static_cast<std::uint8_t>(class_id);
    img.source_tag = "toy";
    img.pixels = Tensor({kImageSize, kImageSize, 1});
    for (int y = 0; y < kImageSize; ++y)
        for (int x = 0; x < kImageSize; ++x) {
            double acc = 0;
            // 2x2 supersampling for soft edges.
            for (double oy : {0.25, 0.75})
                for (double ox : {0.25, 0.75}) {
                    const double dx = (x + ox - p.cx) / p.radius;
                    const double dy = (y + oy - p.cy) / p.radius;
                    const double ax = p.cos_t * dx + p.sin_t * dy;
                    const double ay = -p.sin_t * dx + p.cos_t * dy;
                    const double s = shade(class_id, ax, ay, p);
                    acc += s < 0 ? p.bg : s;
                }
            double v = acc / 4.0;
            v = v * contrast + bright + rng.normal(0.0, 0.10);
            v = std::clamp(v, 0.02, 0.98);
            img.pixels.at3(y, x, 0) = static_cast<float>(2.0 * v - 1.0);
        }
    return img;
}

Dataset make_toy_dataset(const std::array<int, kNumClasses>& per_class, std::uint64_t seed) {
    Dataset out;
    for (int c = 0; c < kNumClasses; ++c)
        for (int i = 0; i < per_class[static_cast<std::size_t>(c)]; ++i)
            out.push_back(render_toy_sign(c, Rng::mix(seed, static_cast<std::uint64_t>(c) * 1000003 +
                                                                static_cast<std::uint64_t>(i))));
    return out;
}

Dataset make_toy_dataset(int per_class, std::uint64_t seed) {
    std::array<int, kNumClasses> counts;
    counts.fill(per_class);
    return make_toy_dataset(counts, seed);
}

void write_toy_corpus(const std::string& dir, int per_class, std::uint64_t seed) {
    namespace fs = std::filesystem;
    for (int c = 0; c < kNumClasses; ++c) {
        const fs::path class_dir = fs::path(dir) / std::to_string(c);
        fs::create_directories(class_dir);
        for (int i = 0; i < per_class; ++i) {
            const LabeledImage img =
                render_toy_sign(c, Rng::mix(seed, static_cast<std::uint64_t>(c) * 1000003 + static_cast<std::uint64_t>(i)));
            const ImageU8 rgb = to_image(img.pixels);
            char name[32];
            std::snprintf(name, sizeof(name), "sign_%04d", i);
            if (i % 8 == 7) {
                write_file((class_dir / (std::string(name) + ".png")).string(), encode_png(rgb));
            } else {
                write_file((class_dir / (std::string(name) + ".ppm")).string(), encode_ppm_p6(rgb));
            }
        }
    }
}

}  // namespace signet
