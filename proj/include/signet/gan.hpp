#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "signet/dataset.hpp"
#include "signet/graph.hpp"
#include "signet/optim.hpp"
#include "signet/rng.hpp"

namespace signet {

struct GanConfig {
    int latent_dim = 100;
    int epochs = 25;
    int batch_size = 64;
    float learning_rate = 0.0002f;
    float leaky_alpha = 0.2f;
    std::uint64_t seed = 0;
    int class_id = 0;
};

// dense(latent -> 7*7*128) -> BN -> ReLU -> convT(128->64) -> BN -> ReLU
// -> convT(64->1) -> bias -> tanh. All upsampling is fractional-strided
// convolution; no pooling anywhere.
struct GeneratorNet {
    int latent_dim = 100;
    Parameter fc_w, fc_b;
    Parameter bn1_gamma, bn1_beta;
    RunningStatsT<float> bn1_stats;
    Parameter up1_k;
    Parameter bn2_gamma, bn2_beta;
    RunningStatsT<float> bn2_stats;
    Parameter up2_k;
    Parameter out_b;

    Graph::Value forward(Graph& g, Graph::Value z, BnMode mode);
    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
};

// conv(1->64, stride 2) -> LeakyReLU -> conv(64->128, stride 2) -> BN ->
// LeakyReLU -> dense(6272 -> 1) -> sigmoid. The scalar head is the only
// fully connected layer.
struct DiscriminatorNet {
    float leaky_alpha = 0.2f;
    Parameter c1_k, c1_b;
    Parameter c2_k;
    Parameter bn_gamma, bn_beta;
    RunningStatsT<float> bn_stats;
    Parameter head_w, head_b;

    Graph::Value forward(Graph& g, Graph::Value images, BnMode mode);
    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
};

std::pair<GeneratorNet, DiscriminatorNet> build_gan(const GanConfig& config);

struct GanCheckpoint {
    GanConfig config;
    GeneratorNet generator;
    DiscriminatorNet discriminator;
    AdamState g_adam, d_adam;
    int epochs_completed = 0;
    int batches_per_epoch = 0;
    std::vector<std::pair<float, float>> loss_history;  // (d_loss, g_loss) per batch
};

// One discriminator update on a real batch plus a fresh fake batch:
// minimizes BCE(D(real),1) + BCE(D(G(z)),0). Returns the d loss.
float gan_discriminator_step(GeneratorNet& gen, DiscriminatorNet& disc, const Tensor& real_batch,
                             AdamState& d_adam, Rng& rng, const GanConfig& config);

// One generator update: minimizes BCE(D(G(z)),1), the non-saturating form.
float gan_generator_step(GeneratorNet& gen, DiscriminatorNet& disc, int batch_size, AdamState& g_adam, Rng& rng,
                         const GanConfig& config);

// Full adversarial training on a single-class dataset. The last partial batch
// of each epoch is dropped to keep batch-norm statistics stable. on_epoch, if
// given, observes the checkpoint after every epoch.
GanCheckpoint train_gan(const Dataset& images, const GanConfig& config,
                        const std::function<void(const GanCheckpoint&)>& on_epoch = {});

// n seeded latent draws through the generator in eval mode.
std::vector<Tensor> sample_generator(const GanCheckpoint& checkpoint, int n, std::uint64_t seed);

// count_per_class samples from each checkpoint, labeled with its class id and
// tagged "synthetic". Duplicate class ids are rejected.
Dataset synthesize_labeled_set(const std::vector<const GanCheckpoint*>& checkpoints, int count_per_class,
                               std::uint64_t seed);

// Structural audit of the recorded forward graphs against the five DCGAN
// stability guidelines.
struct GanAudit {
    bool no_pooling = false;
    bool batchnorm_in_both = false;
    bool no_hidden_dense_in_discriminator = false;
    bool generator_relu_hidden_tanh_out = false;
    bool discriminator_all_leaky = false;
    bool strided_convolutions = false;

    bool all_pass() const {
        return no_pooling && batchnorm_in_both && no_hidden_dense_in_discriminator &&
               generator_relu_hidden_tanh_out && discriminator_all_leaky && strided_convolutions;
    }
};

GanAudit audit_gan(GeneratorNet& gen, DiscriminatorNet& disc, const GanConfig& config);

std::vector<std::uint8_t> write_gan_checkpoint(const GanCheckpoint& cp);
GanCheckpoint read_gan_checkpoint(std::span<const std::uint8_t> bytes);
void save_gan_checkpoint(const std::string& path, const GanCheckpoint& cp);
GanCheckpoint load_gan_checkpoint(const std::string& path);

// CSV with header epoch,batch,d_loss,g_loss.
std::string loss_history_csv(const GanCheckpoint& cp);

}  // namespace signet
