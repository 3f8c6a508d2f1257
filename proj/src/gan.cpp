#include "signet/gan.hpp"

#include <algorithm>
#include <sstream>

#include "signet/checkpoint.hpp"
#include "signet/error.hpp"
#include "signet/util.hpp"

namespace signet {

namespace {

constexpr int kGenBase = 7;       // spatial size after the projection
constexpr int kGenChannels = 128;
constexpr int kProj = kGenBase * kGenBase * kGenChannels;  // 6272
constexpr int kDiscFeatures = 7 * 7 * 128;                 // 6272
constexpr float kBnMomentum = 0.9f;
constexpr float kBnEps = 1e-5f;
constexpr float kAdamBeta1Gan = 0.5f;

Tensor batch_tensor(const Dataset& images, const std::vector<std::size_t>& order, std::size_t begin,
                    std::size_t count) {
    Tensor batch({static_cast<int>(count), kImageSize, kImageSize, 1});
    for (std::size_t i = 0; i < count; ++i) {
        const Tensor& px = images[order[begin + i]].pixels;
        std::copy(px.data.begin(), px.data.end(),
                  batch.data.begin() + static_cast<std::ptrdiff_t>(i * px.data.size()));
    }
    return batch;
}

Tensor draw_latent(int n, int latent_dim, Rng& rng) {
    Tensor z({n, latent_dim});
    for (auto& v : z.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return z;
}

}  // namespace

Graph::Value GeneratorNet::forward(Graph& g, Graph::Value z, BnMode mode) {
    const int n = g.value(z).dim(0);
    auto h = g.dense(z, g.param(fc_w), g.param(fc_b));
    auto r = g.reshape(h, {n, kGenBase, kGenBase, kGenChannels});
    auto b1 = g.batch_norm2d(r, g.param(bn1_gamma), g.param(bn1_beta), &bn1_stats, mode, kBnMomentum, kBnEps);
    auto a1 = g.activation(b1, ops::Act::relu);
    auto u1 = g.conv_transpose2d(a1, g.param(up1_k), 2, 1);  // 7 -> 14
    auto b2 = g.batch_norm2d(u1, g.param(bn2_gamma), g.param(bn2_beta), &bn2_stats, mode, kBnMomentum, kBnEps);
    auto a2 = g.activation(b2, ops::Act::relu);
    auto u2 = g.conv_transpose2d(a2, g.param(up2_k), 2, 1);  // 14 -> 28
    auto ub = g.bias_channels(u2, g.param(out_b));
    return g.activation(ub, ops::Act::tanh);
}

std::vector<Parameter*> GeneratorNet::parameters() {
    return {&fc_w, &fc_b, &bn1_gamma, &bn1_beta, &up1_k, &bn2_gamma, &bn2_beta, &up2_k, &out_b};
}

std::vector<const Parameter*> GeneratorNet::parameters() const {
    return {&fc_w, &fc_b, &bn1_gamma, &bn1_beta, &up1_k, &bn2_gamma, &bn2_beta, &up2_k, &out_b};
}

Graph::Value DiscriminatorNet::forward(Graph& g, Graph::Value images, BnMode mode) {
    const int n = g.value(images).dim(0);
    auto c1 = g.conv2d(images, g.param(c1_k), 2, 1);  // 28 -> 14
    auto cb = g.bias_channels(c1, g.param(c1_b));
    auto a1 = g.activation(cb, ops::Act::leaky_relu, leaky_alpha);
    auto c2 = g.conv2d(a1, g.param(c2_k), 2, 1);  // 14 -> 7
    auto b2 = g.batch_norm2d(c2, g.param(bn_gamma), g.param(bn_beta), &bn_stats, mode, kBnMomentum, kBnEps);
    auto a2 = g.activation(b2, ops::Act::leaky_relu, leaky_alpha);
    auto flat = g.reshape(a2, {n, kDiscFeatures});
    auto logit = g.dense(flat, g.param(head_w), g.param(head_b));
    return g.activation(logit, ops::Act::sigmoid);
}

std::vector<Parameter*> DiscriminatorNet::parameters() {
    return {&c1_k, &c1_b, &c2_k, &bn_gamma, &bn_beta, &head_w, &head_b};
}

std::vector<const Parameter*> DiscriminatorNet::parameters() const {
    return {&c1_k, &c1_b, &c2_k, &bn_gamma, &bn_beta, &head_w, &head_b};
}

std::pair<GeneratorNet, DiscriminatorNet> build_gan(const GanConfig& config) {
    if (config.latent_dim < 1 || config.batch_size < 1 || config.epochs < 1)
        throw Error::data("build_gan: latent_dim, batch_size and epochs must be positive");
    Rng rng(config.seed);

    GeneratorNet gen;
    gen.latent_dim = config.latent_dim;
    gen.fc_w = Parameter("g.fc_w", Tensor({config.latent_dim, kProj}));
    gen.fc_b = Parameter("g.fc_b", Tensor({kProj}));
    gen.bn1_gamma = Parameter("g.bn1_gamma", Tensor::full({kGenChannels}, 1.0f));
    gen.bn1_beta = Parameter("g.bn1_beta", Tensor({kGenChannels}));
    gen.bn1_stats = RunningStatsT<float>(kGenChannels);
    gen.up1_k = Parameter("g.up1_k", Tensor({4, 4, 64, 128}));
    gen.bn2_gamma = Parameter("g.bn2_gamma", Tensor::full({64}, 1.0f));
    gen.bn2_beta = Parameter("g.bn2_beta", Tensor({64}));
    gen.bn2_stats = RunningStatsT<float>(64);
    gen.up2_k = Parameter("g.up2_k", Tensor({4, 4, 1, 64}));
    gen.out_b = Parameter("g.out_b", Tensor({1}));
    fill_gaussian(gen.fc_w.value, rng);
    fill_gaussian(gen.up1_k.value, rng);
    fill_gaussian(gen.up2_k.value, rng);

    DiscriminatorNet disc;
    disc.leaky_alpha = config.leaky_alpha;
    disc.c1_k = Parameter("d.c1_k", Tensor({4, 4, 1, 64}));
    disc.c1_b = Parameter("d.c1_b", Tensor({64}));
    disc.c2_k = Parameter("d.c2_k", Tensor({4, 4, 64, 128}));
    disc.bn_gamma = Parameter("d.bn_gamma", Tensor::full({128}, 1.0f));
    disc.bn_beta = Parameter("d.bn_beta", Tensor({128}));
    disc.bn_stats = RunningStatsT<float>(128);
    disc.head_w = Parameter("d.head_w", Tensor({kDiscFeatures, 1}));
    disc.head_b = Parameter("d.head_b", Tensor({1}));
    fill_gaussian(disc.c1_k.value, rng);
    fill_gaussian(disc.c2_k.value, rng);
    fill_gaussian(disc.head_w.value, rng);

    return {std::move(gen), std::move(disc)};
}

float gan_discriminator_step(GeneratorNet& gen, DiscriminatorNet& disc, const Tensor& real_batch, AdamState& d_adam,
                             Rng& rng, const GanConfig& config) {
    const int n = real_batch.dim(0);

    // Fakes are produced in a separate graph and fed to D as constants, so
    // this step's gradients never reach the generator.
    Tensor fake;
    {
        Graph pre;
        auto z = pre.input(draw_latent(n, config.latent_dim, rng), "z");
        fake = pre.value(gen.forward(pre, z, BnMode::train));
    }

    Graph g;
    auto real = g.input(real_batch, "real");
    auto fake_in = g.input(std::move(fake), "fake");
    auto d_real = disc.forward(g, real, BnMode::train);
    auto d_fake = disc.forward(g, fake_in, BnMode::train);
    auto loss_real = g.binary_cross_entropy(d_real, g.input(Tensor::full({n, 1}, 1.0f), "ones"));
    auto loss_fake = g.binary_cross_entropy(d_fake, g.input(Tensor({n, 1}), "zeros"));
    auto loss = g.add(loss_real, loss_fake);

    auto params = disc.parameters();
    zero_grads(params);
    g.backward(loss);
    adam_step(params, d_adam);
    return g.value(loss).data[0];
}

float gan_generator_step(GeneratorNet& gen, DiscriminatorNet& disc, int batch_size, AdamState& g_adam, Rng& rng,
                         const GanConfig& config) {
    Graph g;
    auto z = g.input(draw_latent(batch_size, config.latent_dim, rng), "z");
    auto fake = gen.forward(g, z, BnMode::train);
    auto d_fake = disc.forward(g, fake, BnMode::train);
    auto loss = g.binary_cross_entropy(d_fake, g.input(Tensor::full({batch_size, 1}, 1.0f), "ones"));

    auto g_params = gen.parameters();
    auto d_params = disc.parameters();
    zero_grads(g_params);
    zero_grads(d_params);  // discriminator gradients from this graph are discarded
    g.backward(loss);
    adam_step(g_params, g_adam);
    zero_grads(d_params);
    return g.value(loss).data[0];
}

GanCheckpoint train_gan(const Dataset& images, const GanConfig& config,
                        const std::function<void(const GanCheckpoint&)>& on_epoch) {
    if (images.empty()) throw Error::data("train_gan: dataset is empty");
    for (const auto& img : images)
        if (img.class_id != config.class_id)
            throw Error::data("train_gan: dataset contains class " + std::to_string(img.class_id) +
                              " but config.class_id is " + std::to_string(config.class_id));
    const std::size_t batches = images.size() / static_cast<std::size_t>(config.batch_size);
    if (batches == 0)
        throw Error::data("train_gan: dataset of " + std::to_string(images.size()) +
                          " images is smaller than one batch of " + std::to_string(config.batch_size));

    GanCheckpoint cp;
    cp.config = config;
    std::tie(cp.generator, cp.discriminator) = build_gan(config);
    cp.g_adam = AdamState(config.learning_rate, kAdamBeta1Gan);
    cp.d_adam = AdamState(config.learning_rate, kAdamBeta1Gan);
    cp.batches_per_epoch = static_cast<int>(batches);

    Rng rng(Rng::mix(config.seed, 0x7261696e));
    std::vector<std::size_t> order(images.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t b = 0; b < batches; ++b) {
            Tensor real = batch_tensor(images, order, b * static_cast<std::size_t>(config.batch_size),
                                       static_cast<std::size_t>(config.batch_size));
            const float d_loss = gan_discriminator_step(cp.generator, cp.discriminator, real, cp.d_adam, rng, config);
            const float g_loss = gan_generator_step(cp.generator, cp.discriminator, config.batch_size, cp.g_adam,
                                                    rng, config);
            cp.loss_history.emplace_back(d_loss, g_loss);
        }
        cp.epochs_completed = epoch + 1;
        if (on_epoch) on_epoch(cp);
    }
    return cp;
}

std::vector<Tensor> sample_generator(const GanCheckpoint& checkpoint, int n, std::uint64_t seed) {
    if (n < 1) throw Error::data("sample_generator: n must be >= 1");
    GeneratorNet gen = checkpoint.generator;  // forward is read-only in eval mode
    Rng rng(Rng::mix(seed, 0x73616d70));
    std::vector<Tensor> out;
    out.reserve(static_cast<std::size_t>(n));
    int remaining = n;
    while (remaining > 0) {
        const int chunk = std::min(remaining, 64);
        Graph g;
        auto z = g.input(draw_latent(chunk, gen.latent_dim, rng), "z");
        const Tensor& batch = g.value(gen.forward(g, z, BnMode::eval));
        for (int i = 0; i < chunk; ++i) {
            Tensor img({kImageSize, kImageSize, 1});
            std::copy(batch.data.begin() + static_cast<std::ptrdiff_t>(i) * img.numel(),
                      batch.data.begin() + static_cast<std::ptrdiff_t>(i + 1) * img.numel(), img.data.begin());
            out.push_back(std::move(img));
        }
        remaining -= chunk;
    }
    return out;
}

Dataset synthesize_labeled_set(const std::vector<const GanCheckpoint*>& checkpoints, int count_per_class,
                               std::uint64_t seed) {
    if (checkpoints.empty()) throw Error::data("synthesize_labeled_set: no checkpoints");
    if (count_per_class < 1) throw Error::data("synthesize_labeled_set: count_per_class must be >= 1");
    std::vector<const GanCheckpoint*> ordered = checkpoints;
    std::sort(ordered.begin(), ordered.end(),
              [](const GanCheckpoint* a, const GanCheckpoint* b) { return a->config.class_id < b->config.class_id; });
    for (std::size_t i = 1; i < ordered.size(); ++i)
        if (ordered[i]->config.class_id == ordered[i - 1]->config.class_id)
            throw Error::data("synthesize_labeled_set: duplicate checkpoint for class " +
                              std::to_string(ordered[i]->config.class_id));

    Dataset out;
    out.reserve(ordered.size() * static_cast<std::size_t>(count_per_class));
    for (const GanCheckpoint* cp : ordered) {
        auto samples = sample_generator(*cp, count_per_class, Rng::mix(seed, static_cast<std::uint64_t>(cp->config.class_id)));
        for (auto& px : samples) {
            LabeledImage img;
            img.pixels = std::move(px);
            img.class_id = static_cast<std::uint8_t>(cp->config.class_id);
            img.source_tag = "synthetic";
            out.push_back(std::move(img));
        }
    }
    return out;
}

GanAudit audit_gan(GeneratorNet& gen, DiscriminatorNet& disc, const GanConfig& config) {
    Graph gg;
    auto z = gg.input(Tensor({2, config.latent_dim}), "z");
    gen.forward(gg, z, BnMode::eval);
    Graph gd;
    auto imgs = gd.input(Tensor({2, kImageSize, kImageSize, 1}), "x");
    disc.forward(gd, imgs, BnMode::eval);

    const auto g_ops = gg.recorded_ops();
    const auto d_ops = gd.recorded_ops();
    auto count = [](const auto& ops, const std::string& kind) {
        std::size_t n = 0;
        for (const auto& op : ops)
            if (op.kind == kind) ++n;
        return n;
    };

    GanAudit audit;
    audit.no_pooling = count(g_ops, "max_pool2d") == 0 && count(d_ops, "max_pool2d") == 0;
    audit.batchnorm_in_both = count(g_ops, "batch_norm2d") > 0 && count(d_ops, "batch_norm2d") > 0;
    // The discriminator keeps exactly one dense layer: the scalar output head,
    // directly under the sigmoid.
    audit.no_hidden_dense_in_discriminator = count(d_ops, "dense") == 1 && d_ops.size() >= 2 &&
                                             d_ops[d_ops.size() - 2].kind == "dense" &&
                                             d_ops.back().kind == "sigmoid";
    audit.generator_relu_hidden_tanh_out =
        !g_ops.empty() && g_ops.back().kind == "tanh" && count(g_ops, "tanh") == 1 && count(g_ops, "relu") > 0 &&
        count(g_ops, "leaky_relu") == 0 && count(g_ops, "sigmoid") == 0;
    audit.discriminator_all_leaky = count(d_ops, "leaky_relu") > 0 && count(d_ops, "relu") == 0 &&
                                    count(d_ops, "tanh") == 0 && count(d_ops, "sigmoid") == 1 &&
                                    d_ops.back().kind == "sigmoid";
    bool gen_upsampling_strided = count(g_ops, "conv2d") == 0 && count(g_ops, "conv_transpose2d") > 0;
    bool disc_downsampling_strided = count(d_ops, "conv_transpose2d") == 0 && count(d_ops, "conv2d") > 0;
    for (const auto& op : g_ops)
        if (op.kind == "conv_transpose2d" && op.stride < 2) gen_upsampling_strided = false;
    for (const auto& op : d_ops)
        if (op.kind == "conv2d" && op.stride < 2) disc_downsampling_strided = false;
    audit.strided_convolutions = gen_upsampling_strided && disc_downsampling_strided;
    return audit;
}

// --- checkpoint serialization ------------------------------------------------

namespace {

void add_params(Container& c, const std::vector<const Parameter*>& params) {
    for (const Parameter* p : params) c.add_tensor(p->name, p->value);
}

void add_adam(Container& c, const std::string& prefix, const AdamState& st,
              const std::vector<const Parameter*>& params) {
    c.set_i64(prefix + ".steps", st.step_count);
    c.set_f32(prefix + ".lr", st.learning_rate);
    c.set_f32(prefix + ".beta1", st.beta1);
    c.set_f32(prefix + ".beta2", st.beta2);
    c.set_f32(prefix + ".eps", st.epsilon);
    for (std::size_t i = 0; i < st.first_moment.size(); ++i) {
        c.add_tensor(prefix + ".m." + params[i]->name, st.first_moment[i]);
        c.add_tensor(prefix + ".v." + params[i]->name, st.second_moment[i]);
    }
}

AdamState read_adam(const Container& c, const std::string& prefix, const std::vector<const Parameter*>& params) {
    AdamState st(c.get_f32(prefix + ".lr"), c.get_f32(prefix + ".beta1"), c.get_f32(prefix + ".beta2"),
                 c.get_f32(prefix + ".eps"));
    st.step_count = c.get_i64(prefix + ".steps");
    if (!params.empty() && c.has_tensor(prefix + ".m." + params[0]->name)) {
        for (const Parameter* p : params) {
            st.first_moment.push_back(c.tensor(prefix + ".m." + p->name));
            st.second_moment.push_back(c.tensor(prefix + ".v." + p->name));
        }
    }
    return st;
}

}  // namespace

std::vector<std::uint8_t> write_gan_checkpoint(const GanCheckpoint& cp) {
    Container c;
    c.magic = "GANC";
    c.set_i64("latent_dim", cp.config.latent_dim);
    c.set_i64("epochs", cp.config.epochs);
    c.set_i64("batch_size", cp.config.batch_size);
    c.set_f32("learning_rate", cp.config.learning_rate);
    c.set_f32("leaky_alpha", cp.config.leaky_alpha);
    c.set_u64("seed", cp.config.seed);
    c.set_i64("class_id", cp.config.class_id);
    c.set_i64("epochs_completed", cp.epochs_completed);
    c.set_i64("batches_per_epoch", cp.batches_per_epoch);

    add_params(c, cp.generator.parameters());
    c.add_tensor("g.bn1_mean", cp.generator.bn1_stats.mean);
    c.add_tensor("g.bn1_var", cp.generator.bn1_stats.var);
    c.add_tensor("g.bn2_mean", cp.generator.bn2_stats.mean);
    c.add_tensor("g.bn2_var", cp.generator.bn2_stats.var);
    add_params(c, cp.discriminator.parameters());
    c.add_tensor("d.bn_mean", cp.discriminator.bn_stats.mean);
    c.add_tensor("d.bn_var", cp.discriminator.bn_stats.var);
    add_adam(c, "adam_g", cp.g_adam, cp.generator.parameters());
    add_adam(c, "adam_d", cp.d_adam, cp.discriminator.parameters());

    if (!cp.loss_history.empty()) {
        Tensor hist({static_cast<int>(cp.loss_history.size()), 2});
        for (std::size_t i = 0; i < cp.loss_history.size(); ++i) {
            hist.at(static_cast<int>(i), 0) = cp.loss_history[i].first;
            hist.at(static_cast<int>(i), 1) = cp.loss_history[i].second;
        }
        c.add_tensor("loss_history", hist);
    }
    return write_container(c);
}

GanCheckpoint read_gan_checkpoint(std::span<const std::uint8_t> bytes) {
    const Container c = read_container(bytes, "GANC");
    GanCheckpoint cp;
    cp.config.latent_dim = static_cast<int>(c.get_i64("latent_dim"));
    cp.config.epochs = static_cast<int>(c.get_i64("epochs"));
    cp.config.batch_size = static_cast<int>(c.get_i64("batch_size"));
    cp.config.learning_rate = c.get_f32("learning_rate");
    cp.config.leaky_alpha = c.get_f32("leaky_alpha");
    cp.config.seed = c.get_u64("seed");
    cp.config.class_id = static_cast<int>(c.get_i64("class_id"));
    cp.epochs_completed = static_cast<int>(c.get_i64("epochs_completed"));
    cp.batches_per_epoch = static_cast<int>(c.get_i64("batches_per_epoch"));

    std::tie(cp.generator, cp.discriminator) = build_gan(cp.config);
    for (Parameter* p : cp.generator.parameters()) p->value = c.tensor(p->name);
    cp.generator.bn1_stats.mean = c.tensor("g.bn1_mean");
    cp.generator.bn1_stats.var = c.tensor("g.bn1_var");
    cp.generator.bn2_stats.mean = c.tensor("g.bn2_mean");
    cp.generator.bn2_stats.var = c.tensor("g.bn2_var");
    for (Parameter* p : cp.discriminator.parameters()) p->value = c.tensor(p->name);
    cp.discriminator.bn_stats.mean = c.tensor("d.bn_mean");
    cp.discriminator.bn_stats.var = c.tensor("d.bn_var");
    cp.g_adam = read_adam(c, "adam_g", std::as_const(cp.generator).parameters());
    cp.d_adam = read_adam(c, "adam_d", std::as_const(cp.discriminator).parameters());

    if (c.has_tensor("loss_history")) {
        const Tensor& hist = c.tensor("loss_history");
        for (int i = 0; i < hist.dim(0); ++i) cp.loss_history.emplace_back(hist.at(i, 0), hist.at(i, 1));
    }
    return cp;
}

void save_gan_checkpoint(const std::string& path, const GanCheckpoint& cp) {
    write_file(path, write_gan_checkpoint(cp));
}

GanCheckpoint load_gan_checkpoint(const std::string& path) {
    const auto bytes = read_file(path);
    return read_gan_checkpoint(bytes);
}

std::string loss_history_csv(const GanCheckpoint& cp) {
    std::ostringstream os;
    os << "epoch,batch,d_loss,g_loss\n";
    for (std::size_t i = 0; i < cp.loss_history.size(); ++i) {
        const std::size_t per = cp.batches_per_epoch > 0 ? static_cast<std::size_t>(cp.batches_per_epoch) : 1;
        os << i / per << "," << i % per << "," << format_fixed(cp.loss_history[i].first, 6) << ","
           << format_fixed(cp.loss_history[i].second, 6) << "\n";
    }
    return os.str();
}

}  // namespace signet
