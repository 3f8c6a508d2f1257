#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "signet/dataset.hpp"
#include "signet/tensor.hpp"

namespace signet {

// The eight augmentation kinds. Geometric kinds reduce to a homography.
enum class AugmentOp { rotate, translate, scale, flip_h, flip_v, salt_pepper, lighting, perspective };

const char* augment_op_name(AugmentOp op);
AugmentOp augment_op_from_name(const std::string& name);
inline constexpr std::array<AugmentOp, 8> kAllAugmentOps = {
    AugmentOp::rotate,      AugmentOp::translate, AugmentOp::scale,    AugmentOp::flip_h,
    AugmentOp::flip_v,      AugmentOp::salt_pepper, AugmentOp::lighting, AugmentOp::perspective,
};

// Global parameter caps; per-class policies may tighten rotation further.
inline constexpr double kMaxRotateDeg = 30.0;
inline constexpr double kMaxTranslatePx = 6.0;
inline constexpr double kMinScale = 0.7, kMaxScale = 1.3;
inline constexpr double kMaxBrightness = 0.4;
inline constexpr double kMinContrast = 0.5, kMaxContrast = 1.5;
inline constexpr double kMaxCornerOffsetPx = 5.0;

// One concrete transform instance; only the fields of its kind are meaningful.
struct AugmentOpSpec {
    AugmentOp kind = AugmentOp::rotate;
    double rotate_deg = 0.0;
    double dx = 0.0, dy = 0.0;
    double scale = 1.0;
    double noise_p = 0.0;
    double brightness = 0.0, contrast = 1.0;
    std::array<double, 8> corner_offsets{};  // x0,y0 .. x3,y3

    std::string describe() const;
};

struct Mat3 {
    // row-major
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return Mat3{}; }
    Mat3 operator*(const Mat3& rhs) const;
    double det() const;
    bool is_identity() const;
};

// Homography mapping output pixel coordinates to source coordinates, about the
// image center. Only geometric kinds are accepted.
Mat3 homography_for(const AugmentOpSpec& spec);

// Solves the 8-unknown system from four point correspondences from -> to.
// Degenerate correspondences raise an error.
Mat3 solve_homography(const std::array<std::array<double, 2>, 4>& from,
                      const std::array<std::array<double, 2>, 4>& to);

// Bilinear warp with edge replication; output stays 28x28x1 in [-1,1].
Tensor warp(const Tensor& img, const Mat3& homography);

Tensor flip(const Tensor& img, bool horizontal);

// Each pixel independently: prob p/2 -> -1, p/2 -> +1, else unchanged.
Tensor salt_pepper(const Tensor& img, double p, std::uint64_t seed);

// clamp(contrast * pixel + brightness, -1, 1)
Tensor adjust_lighting(const Tensor& img, double brightness, double contrast);

// Which transforms preserve each sign class's meaning. Text-bearing classes
// never flip; rotation caps are per class.
struct ClassPolicy {
    std::array<std::vector<AugmentOp>, kNumClasses> allowed;  // in kAllAugmentOps order
    std::array<double, kNumClasses> rotate_cap_deg{};

    static ClassPolicy defaults();
    std::string to_text() const;
    static ClassPolicy from_text(const std::string& text);
};

std::vector<AugmentOp> allowed_ops(int class_id, const ClassPolicy& policy);
bool op_allowed(int class_id, const ClassPolicy& policy, AugmentOp op);

// Checks an op instance against the global caps and the per-class policy.
bool spec_within_policy(int class_id, const ClassPolicy& policy, const AugmentOpSpec& spec, std::string* why = nullptr);

struct AugmentPlan {
    int multiplier = 0;
    std::uint64_t seed = 0;
    ClassPolicy policy = ClassPolicy::defaults();
};

struct EmissionRecord {
    std::size_t source_index;
    int class_id;
    AugmentOpSpec op;
};

// Applies one sampled transform instance.
Tensor apply_augment(const Tensor& img, const AugmentOpSpec& spec, std::uint64_t noise_seed);

// Emits each source image followed by `multiplier` augmented variants, each
// produced by a seeded uniform choice among the class's permitted ops with
// parameters drawn within caps. Labels are preserved; variants are tagged
// "augmented". The emission log records (source, class, op) per variant.
Dataset build_augmented_dataset(const Dataset& images, const AugmentPlan& plan,
                                std::vector<EmissionRecord>* log = nullptr);

std::string emission_log_text(const std::vector<EmissionRecord>& log);

}  // namespace signet
