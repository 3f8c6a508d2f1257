#include "signet/augment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "signet/error.hpp"
#include "signet/rng.hpp"
#include "signet/util.hpp"

namespace signet {

namespace {

constexpr double kCenter = (kImageSize - 1) / 2.0;  // 13.5 for 28 px

const std::array<std::array<double, 2>, 4> kCorners = {{{0.0, 0.0},
                                                        {static_cast<double>(kImageSize - 1), 0.0},
                                                        {static_cast<double>(kImageSize - 1), static_cast<double>(kImageSize - 1)},
                                                        {0.0, static_cast<double>(kImageSize - 1)}}};

}  // namespace

const char* augment_op_name(AugmentOp op) {
    switch (op) {
        case AugmentOp::rotate: return "rotate";
        case AugmentOp::translate: return "translate";
        case AugmentOp::scale: return "scale";
        case AugmentOp::flip_h: return "flip_h";
        case AugmentOp::flip_v: return "flip_v";
        case AugmentOp::salt_pepper: return "salt_pepper";
        case AugmentOp::lighting: return "lighting";
        case AugmentOp::perspective: return "perspective";
    }
    return "?";
}

AugmentOp augment_op_from_name(const std::string& name) {
    for (AugmentOp op : kAllAugmentOps)
        if (name == augment_op_name(op)) return op;
    throw Error::data("unknown augmentation op '" + name + "'");
}

std::string AugmentOpSpec::describe() const {
    std::ostringstream os;
    os << augment_op_name(kind);
    switch (kind) {
        case AugmentOp::rotate: os << " " << format_trimmed(rotate_deg, 3); break;
        case AugmentOp::translate: os << " " << format_trimmed(dx, 3) << " " << format_trimmed(dy, 3); break;
        case AugmentOp::scale: os << " " << format_trimmed(scale, 4); break;
        case AugmentOp::salt_pepper: os << " " << format_trimmed(noise_p, 4); break;
        case AugmentOp::lighting: os << " " << format_trimmed(brightness, 4) << " " << format_trimmed(contrast, 4); break;
        case AugmentOp::perspective:
            for (double v : corner_offsets) os << " " << format_trimmed(v, 3);
            break;
        default: break;
    }
    return os.str();
}

Mat3 Mat3::operator*(const Mat3& rhs) const {
    Mat3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double acc = 0;
            for (int k = 0; k < 3; ++k) acc += m[static_cast<std::size_t>(i * 3 + k)] * rhs.m[static_cast<std::size_t>(k * 3 + j)];
            out.m[static_cast<std::size_t>(i * 3 + j)] = acc;
        }
    return out;
}

double Mat3::det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

bool Mat3::is_identity() const {
    const Mat3 id;
    for (int i = 0; i < 9; ++i)
        if (std::abs(m[static_cast<std::size_t>(i)] - id.m[static_cast<std::size_t>(i)]) > 1e-12) return false;
    return true;
}

Mat3 homography_for(const AugmentOpSpec& spec) {
    Mat3 h;
    switch (spec.kind) {
        case AugmentOp::rotate: {
            const double rad = spec.rotate_deg * 3.14159265358979323846 / 180.0;
            const double c = std::cos(rad), s = std::sin(rad);
            // translate(center) * R * translate(-center), applied to output
            // coordinates to find the source sample.
            h.m = {c, -s, kCenter - c * kCenter + s * kCenter,
                   s, c,  kCenter - s * kCenter - c * kCenter,
                   0, 0,  1};
            return h;
        }
        case AugmentOp::translate:
            h.m = {1, 0, spec.dx, 0, 1, spec.dy, 0, 0, 1};
            return h;
        case AugmentOp::scale: {
            if (spec.scale <= 0) throw Error::data("scale: factor must be positive");
            const double inv = 1.0 / spec.scale;
            h.m = {inv, 0, kCenter * (1 - inv), 0, inv, kCenter * (1 - inv), 0, 0, 1};
            return h;
        }
        case AugmentOp::perspective: {
            std::array<std::array<double, 2>, 4> to = kCorners;
            for (int i = 0; i < 4; ++i) {
                to[static_cast<std::size_t>(i)][0] += spec.corner_offsets[static_cast<std::size_t>(2 * i)];
                to[static_cast<std::size_t>(i)][1] += spec.corner_offsets[static_cast<std::size_t>(2 * i + 1)];
            }
            return solve_homography(kCorners, to);
        }
        default:
            throw Error::data(std::string("homography_for: '") + augment_op_name(spec.kind) + "' is not geometric");
    }
}

Mat3 solve_homography(const std::array<std::array<double, 2>, 4>& from,
                      const std::array<std::array<double, 2>, 4>& to) {
    // Rows of [A|b] for unknowns (a,b,c,d,e,f,g,h) of the projective map.
    double aug[8][9] = {};
    for (int i = 0; i < 4; ++i) {
        const double x = from[static_cast<std::size_t>(i)][0], y = from[static_cast<std::size_t>(i)][1];
        const double u = to[static_cast<std::size_t>(i)][0], v = to[static_cast<std::size_t>(i)][1];
        double* r0 = aug[2 * i];
        double* r1 = aug[2 * i + 1];
        r0[0] = x; r0[1] = y; r0[2] = 1; r0[6] = -u * x; r0[7] = -u * y; r0[8] = u;
        r1[3] = x; r1[4] = y; r1[5] = 1; r1[6] = -v * x; r1[7] = -v * y; r1[8] = v;
    }
    // Gaussian elimination with partial pivoting.
    for (int col = 0; col < 8; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 8; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
        if (std::abs(aug[pivot][col]) < 1e-10)
            throw Error::data("solve_homography: degenerate correspondences (singular system)");
        if (pivot != col)
            for (int k = 0; k < 9; ++k) std::swap(aug[pivot][k], aug[col][k]);
        for (int r = 0; r < 8; ++r) {
            if (r == col) continue;
            const double f = aug[r][col] / aug[col][col];
            for (int k = col; k < 9; ++k) aug[r][k] -= f * aug[col][k];
        }
    }
    Mat3 h;
    for (int i = 0; i < 8; ++i) h.m[static_cast<std::size_t>(i)] = aug[i][8] / aug[i][i];
    h.m[8] = 1.0;
    return h;
}

Tensor warp(const Tensor& img, const Mat3& homography) {
    if (img.shape != std::vector<int>{kImageSize, kImageSize, 1})
        throw Error::data("warp: expected 28x28x1 image, got " + shape_str(img.shape));
    if (std::abs(homography.det()) < 1e-12) throw Error::data("warp: singular homography");
    if (homography.is_identity()) return img;

    Tensor out(img.shape);
    const auto& m = homography.m;
    for (int y = 0; y < kImageSize; ++y)
        for (int x = 0; x < kImageSize; ++x) {
            const double denom = m[6] * x + m[7] * y + m[8];
            const double sx = (m[0] * x + m[1] * y + m[2]) / denom;
            const double sy = (m[3] * x + m[4] * y + m[5]) / denom;
            // Edge replication keeps border samples from injecting black.
            const double cx = std::clamp(sx, 0.0, static_cast<double>(kImageSize - 1));
            const double cy = std::clamp(sy, 0.0, static_cast<double>(kImageSize - 1));
            const int x0 = static_cast<int>(cx);
            const int y0 = static_cast<int>(cy);
            const int x1 = std::min(x0 + 1, kImageSize - 1);
            const int y1 = std::min(y0 + 1, kImageSize - 1);
            const double fx = cx - x0, fy = cy - y0;
            const double top = img.at3(y0, x0, 0) * (1 - fx) + img.at3(y0, x1, 0) * fx;
            const double bot = img.at3(y1, x0, 0) * (1 - fx) + img.at3(y1, x1, 0) * fx;
            out.at3(y, x, 0) = static_cast<float>(std::clamp(top * (1 - fy) + bot * fy, -1.0, 1.0));
        }
    return out;
}

Tensor flip(const Tensor& img, bool horizontal) {
    const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
    Tensor out(img.shape);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch)
                out.at3(y, x, ch) = horizontal ? img.at3(y, w - 1 - x, ch) : img.at3(h - 1 - y, x, ch);
    return out;
}

Tensor salt_pepper(const Tensor& img, double p, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw Error::data("salt_pepper: p must be in [0,1], got " + std::to_string(p));
    Tensor out = img;
    Rng rng(seed);
    for (auto& v : out.data) {
        const double u = rng.uniform();
        if (u < p / 2) {
            v = -1.0f;
        } else if (u < p) {
            v = 1.0f;
        }
    }
    return out;
}

Tensor adjust_lighting(const Tensor& img, double brightness, double contrast) {
    Tensor out(img.shape);
    for (std::int64_t i = 0; i < img.numel(); ++i)
        out.data[static_cast<std::size_t>(i)] = static_cast<float>(
            std::clamp(contrast * img.data[static_cast<std::size_t>(i)] + brightness, -1.0, 1.0));
    return out;
}

// ---------------------------------------------------------------------------
// Class policy

ClassPolicy ClassPolicy::defaults() {
    ClassPolicy p;
    // Photometric and mild geometric transforms are safe for every class.
    // Flips per class: text-bearing signs (2-6) and the striped "end of
    // restriction" (7) never flip; the symmetric bar (1) and diamond (8) take
    // both; the give-way triangle (9) only mirrors horizontally.
    const std::array<bool, kNumClasses> flip_h_ok = {true, true, false, false, false, false, false, false, true, true};
    const std::array<bool, kNumClasses> flip_v_ok = {true, true, false, false, false, false, false, false, true, false};
    // Text classes tolerate only slight rotation.
    const std::array<double, kNumClasses> rot_cap = {30.0, 15.0, 5.0, 5.0, 5.0, 5.0, 5.0, 15.0, 15.0, 15.0};
    for (int c = 0; c < kNumClasses; ++c) {
        std::vector<AugmentOp> ops;
        for (AugmentOp op : kAllAugmentOps) {
            if (op == AugmentOp::flip_h && !flip_h_ok[static_cast<std::size_t>(c)]) continue;
            if (op == AugmentOp::flip_v && !flip_v_ok[static_cast<std::size_t>(c)]) continue;
            ops.push_back(op);
        }
        p.allowed[static_cast<std::size_t>(c)] = ops;
        p.rotate_cap_deg[static_cast<std::size_t>(c)] = rot_cap[static_cast<std::size_t>(c)];
    }
    return p;
}

std::string ClassPolicy::to_text() const {
    std::ostringstream os;
    os << "# class_id op cap\n";
    for (int c = 0; c < kNumClasses; ++c)
        for (AugmentOp op : allowed[static_cast<std::size_t>(c)]) {
            os << c << " " << augment_op_name(op);
            if (op == AugmentOp::rotate)
                os << " " << format_trimmed(rotate_cap_deg[static_cast<std::size_t>(c)], 2);
            else
                os << " -";
            os << "\n";
        }
    return os.str();
}

ClassPolicy ClassPolicy::from_text(const std::string& text) {
    ClassPolicy p;
    for (auto& v : p.allowed) v.clear();
    p.rotate_cap_deg.fill(kMaxRotateDeg);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        int class_id;
        std::string op_name, cap;
        if (!(ls >> class_id)) continue;  // blank line
        if (!(ls >> op_name >> cap))
            throw Error::data("policy line " + std::to_string(lineno) + ": expected 'class op cap'");
        if (class_id < 0 || class_id >= kNumClasses)
            throw Error::data("policy line " + std::to_string(lineno) + ": class " + std::to_string(class_id) +
                              " out of range");
        const AugmentOp op = augment_op_from_name(op_name);
        auto& ops = p.allowed[static_cast<std::size_t>(class_id)];
        if (std::find(ops.begin(), ops.end(), op) == ops.end()) ops.push_back(op);
        if (op == AugmentOp::rotate && cap != "-") p.rotate_cap_deg[static_cast<std::size_t>(class_id)] = std::stod(cap);
    }
    return p;
}

std::vector<AugmentOp> allowed_ops(int class_id, const ClassPolicy& policy) {
    if (class_id < 0 || class_id >= kNumClasses)
        throw Error::data("allowed_ops: unknown class " + std::to_string(class_id));
    return policy.allowed[static_cast<std::size_t>(class_id)];
}

bool op_allowed(int class_id, const ClassPolicy& policy, AugmentOp op) {
    const auto ops = allowed_ops(class_id, policy);
    return std::find(ops.begin(), ops.end(), op) != ops.end();
}

bool spec_within_policy(int class_id, const ClassPolicy& policy, const AugmentOpSpec& spec, std::string* why) {
    auto fail = [&](const std::string& reason) {
        if (why) *why = reason;
        return false;
    };
    if (!op_allowed(class_id, policy, spec.kind))
        return fail(std::string(augment_op_name(spec.kind)) + " not permitted for class " + std::to_string(class_id));
    switch (spec.kind) {
        case AugmentOp::rotate: {
            const double cap = std::min(kMaxRotateDeg, policy.rotate_cap_deg[static_cast<std::size_t>(class_id)]);
            if (std::abs(spec.rotate_deg) > cap) return fail("rotation exceeds cap");
            break;
        }
        case AugmentOp::translate:
            if (std::abs(spec.dx) > kMaxTranslatePx || std::abs(spec.dy) > kMaxTranslatePx)
                return fail("translation exceeds cap");
            break;
        case AugmentOp::scale:
            if (spec.scale < kMinScale || spec.scale > kMaxScale) return fail("scale outside range");
            break;
        case AugmentOp::salt_pepper:
            if (spec.noise_p < 0 || spec.noise_p > 1) return fail("noise probability outside [0,1]");
            break;
        case AugmentOp::lighting:
            if (std::abs(spec.brightness) > kMaxBrightness || spec.contrast < kMinContrast ||
                spec.contrast > kMaxContrast)
                return fail("lighting outside range");
            break;
        case AugmentOp::perspective:
            for (double v : spec.corner_offsets)
                if (std::abs(v) > kMaxCornerOffsetPx) return fail("corner offset exceeds cap");
            break;
        default: break;
    }
    return true;
}

Tensor apply_augment(const Tensor& img, const AugmentOpSpec& spec, std::uint64_t noise_seed) {
    switch (spec.kind) {
        case AugmentOp::flip_h: return flip(img, true);
        case AugmentOp::flip_v: return flip(img, false);
        case AugmentOp::salt_pepper: return salt_pepper(img, spec.noise_p, noise_seed);
        case AugmentOp::lighting: return adjust_lighting(img, spec.brightness, spec.contrast);
        default: return warp(img, homography_for(spec));
    }
}

namespace {

AugmentOpSpec sample_spec(int class_id, const ClassPolicy& policy, Rng& rng) {
    const auto ops = allowed_ops(class_id, policy);
    if (ops.empty()) throw Error::data("augment: class " + std::to_string(class_id) + " permits no operations");
    AugmentOpSpec spec;
    spec.kind = ops[static_cast<std::size_t>(rng.uniform_index(ops.size()))];
    switch (spec.kind) {
        case AugmentOp::rotate: {
            const double cap = std::min(kMaxRotateDeg, policy.rotate_cap_deg[static_cast<std::size_t>(class_id)]);
            spec.rotate_deg = rng.uniform(-cap, cap);
            break;
        }
        case AugmentOp::translate:
            spec.dx = rng.uniform(-4.0, 4.0);
            spec.dy = rng.uniform(-4.0, 4.0);
            break;
        case AugmentOp::scale: spec.scale = rng.uniform(0.8, 1.25); break;
        case AugmentOp::salt_pepper: spec.noise_p = rng.uniform(0.01, 0.10); break;
        case AugmentOp::lighting:
            spec.brightness = rng.uniform(-0.3, 0.3);
            spec.contrast = rng.uniform(0.6, 1.4);
            break;
        case AugmentOp::perspective:
            for (auto& v : spec.corner_offsets) v = rng.uniform(-4.0, 4.0);
            break;
        default: break;
    }
    return spec;
}

}  // namespace

Dataset build_augmented_dataset(const Dataset& images, const AugmentPlan& plan, std::vector<EmissionRecord>* log) {
    if (plan.multiplier < 0) throw Error::data("augment: multiplier must be non-negative");
    Dataset out;
    out.reserve(images.size() * static_cast<std::size_t>(1 + plan.multiplier));
    for (std::size_t i = 0; i < images.size(); ++i) {
        out.push_back(images[i]);
        Rng rng(Rng::mix(plan.seed, static_cast<std::uint64_t>(i)));
        for (int j = 0; j < plan.multiplier; ++j) {
            const AugmentOpSpec spec = sample_spec(images[i].class_id, plan.policy, rng);
            const std::uint64_t noise_seed = rng.next_u64();
            LabeledImage variant;
            variant.pixels = apply_augment(images[i].pixels, spec, noise_seed);
            variant.class_id = images[i].class_id;
            variant.source_tag = "augmented";
            out.push_back(std::move(variant));
            if (log) log->push_back({i, images[i].class_id, spec});
        }
    }
    return out;
}

std::string emission_log_text(const std::vector<EmissionRecord>& log) {
    std::ostringstream os;
    for (const auto& rec : log) os << rec.source_index << " " << rec.class_id << " " << rec.op.describe() << "\n";
    return os.str();
}

}  // namespace signet
