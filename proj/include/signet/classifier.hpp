#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "signet/dataset.hpp"
#include "signet/graph.hpp"
#include "signet/optim.hpp"
#include "signet/rng.hpp"

namespace signet {

// Multi-scale grayscale classifier. Stage-1 features skip past stage 2 into
// the head: 32*7*7 (re-pooled stage 1) + 64*7*7 (stage 2) = 4704 features.
inline constexpr int kStage1Features = 32 * 7 * 7;
inline constexpr int kStage2Features = 64 * 7 * 7;
inline constexpr int kClassifierFeatureLen = kStage1Features + kStage2Features;
inline constexpr int kHiddenUnits = 100;

template <typename T>
struct ClassifierNetT {
    ParameterT<T> c1_k, c1_b;    // 5x5x1x32
    ParameterT<T> c2_k, c2_b;    // 5x5x32x64
    ParameterT<T> fc1_w, fc1_b;  // 4704 -> 100
    ParameterT<T> fc2_w, fc2_b;  // 100 -> 10

    void init(std::uint64_t seed) {
        Rng rng(seed);
        c1_k = ParameterT<T>("clf.c1_k", TensorT<T>({5, 5, 1, 32}));
        c1_b = ParameterT<T>("clf.c1_b", TensorT<T>({32}));
        c2_k = ParameterT<T>("clf.c2_k", TensorT<T>({5, 5, 32, 64}));
        c2_b = ParameterT<T>("clf.c2_b", TensorT<T>({64}));
        fc1_w = ParameterT<T>("clf.fc1_w", TensorT<T>({kClassifierFeatureLen, kHiddenUnits}));
        fc1_b = ParameterT<T>("clf.fc1_b", TensorT<T>({kHiddenUnits}));
        fc2_w = ParameterT<T>("clf.fc2_w", TensorT<T>({kHiddenUnits, kNumClasses}));
        fc2_b = ParameterT<T>("clf.fc2_b", TensorT<T>({kNumClasses}));
        fill_gaussian(c1_k.value, rng, T(0.02));
        fill_gaussian(c2_k.value, rng, T(0.02));
        fill_gaussian(fc1_w.value, rng, T(0.02));
        fill_gaussian(fc2_w.value, rng, T(0.02));
    }

    // images: N x 28 x 28 x 1 -> logits N x 10
    typename GraphT<T>::Value forward(GraphT<T>& g, typename GraphT<T>::Value images) {
        const int n = g.value(images).dim(0);
        auto s1 = g.max_pool2d(
            g.activation(g.bias_channels(g.conv2d(images, g.param(c1_k), 1, 2), g.param(c1_b)), ops::Act::relu), 2);
        auto s2 = g.max_pool2d(
            g.activation(g.bias_channels(g.conv2d(s1, g.param(c2_k), 1, 2), g.param(c2_b)), ops::Act::relu), 2);
        auto skip = g.max_pool2d(s1, 2);
        auto feat = g.concat_cols(g.reshape(skip, {n, kStage1Features}), g.reshape(s2, {n, kStage2Features}));
        auto hidden = g.activation(g.dense(feat, g.param(fc1_w), g.param(fc1_b)), ops::Act::relu);
        return g.dense(hidden, g.param(fc2_w), g.param(fc2_b));
    }

    std::vector<ParameterT<T>*> parameters() {
        return {&c1_k, &c1_b, &c2_k, &c2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b};
    }
    std::vector<const ParameterT<T>*> parameters() const {
        return {&c1_k, &c1_b, &c2_k, &c2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b};
    }

    // The tensors the elastic-net penalty applies to (weights, not biases).
    std::vector<ParameterT<T>*> weight_parameters() { return {&c1_k, &c2_k, &fc1_w, &fc2_w}; }
};

using ClassifierNet = ClassifierNetT<float>;

ClassifierNet build_classifier(std::uint64_t seed);

enum class TrainStage { pretrain, finetune };

struct TrainConfig {
    TrainStage stage = TrainStage::pretrain;
    float learning_rate = 0.001f;
    int epochs = 10;
    int batch_size = 64;
    std::uint64_t seed = 0;
    float lambda1 = 0.0f, lambda2 = 0.0f;  // optional elastic-net penalty

    static TrainConfig pretrain_defaults() { return TrainConfig{}; }
    static TrainConfig finetune_defaults() {
        TrainConfig c;
        c.stage = TrainStage::finetune;
        c.learning_rate = 0.0001f;
        return c;
    }
};

struct ClfCheckpoint {
    ClassifierNet net;
    AdamState adam;
    int epochs_completed = 0;
    int batches_per_epoch = 0;
    std::vector<float> loss_curve;  // per batch
    TrainConfig config;
};

// Minimizes softmax cross-entropy (plus the elastic-net penalty when lambdas
// are set) with Adam at the stage learning rate. Shuffling is seeded; the
// config stage must be pretrain — fine-tuning goes through the checkpoint
// overload below.
ClfCheckpoint train_classifier(const ClassifierNet& start, const Dataset& images, const TrainConfig& config);

// Stage 2: continues from a checkpoint at the reduced fine-tune rate.
ClfCheckpoint train_classifier(const ClfCheckpoint& start, const Dataset& images, const TrainConfig& config);

struct Predictions {
    std::vector<int> class_ids;
    Tensor probabilities;  // N x 10, rows sum to 1
};

Predictions predict_batch(const ClassifierNet& net, const Dataset& images);
Predictions predict_batch(const ClfCheckpoint& checkpoint, const Dataset& images);

std::vector<std::uint8_t> write_clf_checkpoint(const ClfCheckpoint& cp);
ClfCheckpoint read_clf_checkpoint(std::span<const std::uint8_t> bytes);
void save_clf_checkpoint(const std::string& path, const ClfCheckpoint& cp);
ClfCheckpoint load_clf_checkpoint(const std::string& path);

// CSV with header epoch,batch,loss.
std::string loss_curve_csv(const ClfCheckpoint& cp);

}  // namespace signet
