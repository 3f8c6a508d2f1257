// Acceptance suite: runs each numbered criterion and prints one pass/fail
// line. Heavy training criteria store their metric artifacts under
// acceptance_work/ so the determinism criterion can re-run them and compare
// bytes.
//
//   acceptance [all | <criterion numbers...>]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "signet/augment.hpp"
#include "signet/classifier.hpp"
#include "signet/gan.hpp"
#include "signet/report.hpp"
#include "signet/snf.hpp"
#include "signet/toycorpus.hpp"
#include "signet/util.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace signet;
using oracle::random_tensor;

namespace {

// ---------------------------------------------------------------------------
// Tunables for the heavy criteria (fixed; changing any of these changes the
// byte-identical artifacts the determinism criterion compares).

struct Knobs {
    // criterion 6: GAN smoke
    int c6_images = 2000;
    int c6_epochs = 25;
    int c6_batch = 64;
    std::uint64_t c6_data_seed = 1001;
    std::uint64_t c6_train_seed = 7;
    int c6_samples = 512;
    double c6_mad_limit = 0.3;
    double c6_disc_acc_limit = 0.95;

    // criterion 7: classifier sanity
    int c7_train_per_class = 200;
    int c7_test_per_class = 50;
    int c7_epochs = 12;
    int c7_batch = 64;
    double c7_accuracy_floor = 90.0;

    // criterion 8: end-to-end trend
    int c8_base_per_class = 50;
    int c8_test_per_class = 80;
    int c8_seeds = 5;
    int c8_clf_epochs = 12;
    int c8_clf_batch = 25;
    int c8_finetune_epochs = 8;
    int c8_aug_multiplier = 2;
    int c8_gan_epochs = 40;
    int c8_gan_batch = 10;
    int c8_synth_per_class = 150;
    int c8_required_wins = 3;
    double c8_gan_margin = 2.0;
};

const Knobs kKnobs;

fs::path work_root() {
    const fs::path p = fs::current_path() / "acceptance_work";
    fs::create_directories(p);
    return p;
}

struct Criterion {
    int number;
    std::string name;
    std::function<bool(std::ostringstream&)> run;
};

// ---------------------------------------------------------------------------
// 1. report arithmetic

bool criterion1(std::ostringstream& log) {
    const std::array<double, 10> baseline = {73.1, 77.5, 78.0, 78.8, 80.6, 75.8, 77.4, 79.0, 78.6, 77.3};
    const std::array<double, 10> augmented = {75.2, 77.8, 78.4, 85.8, 81.8, 79.7, 83.0, 79.0, 82.5, 82.1};
    const std::array<double, 10> synthetic = {84.9, 85.5, 84.9, 88.2, 89.5, 88.5, 90.3, 88.2, 86.9, 87.3};
    const double m1 = aggregate_report(PerClassAccuracy::from_percentages(baseline));
    const double m2 = aggregate_report(PerClassAccuracy::from_percentages(augmented));
    const double m3 = aggregate_report(PerClassAccuracy::from_percentages(synthetic));
    log << "means " << format_fixed(m1, 4) << " / " << format_fixed(m2, 4) << " / " << format_fixed(m3, 4);
    return std::abs(m1 - 77.61) < 0.005 && std::abs(m2 - 80.53) < 0.005 && std::abs(m3 - 87.42) < 0.005;
}

// ---------------------------------------------------------------------------
// 2. gradient suite

struct GradCase {
    std::vector<TensorT<double>*> tensors;
    std::vector<const TensorT<double>*> analytic;
    std::function<double()> eval;
};

double grad_case_error(const std::string& op, std::uint64_t seed) {
    Rng meta(Rng::mix(0x67726164, seed));
    auto dim = [&](int lo, int hi) { return lo + static_cast<int>(meta.uniform_index(static_cast<std::uint64_t>(hi - lo + 1))); };

    GraphT<double> g;
    static thread_local ParameterT<double> pa, pb, pc;
    std::vector<TensorT<double>*> tensors;
    std::vector<const TensorT<double>*> analytic;
    std::function<double()> eval;

    if (op == "conv2d" || op == "conv_transpose2d") {
        const int h = dim(3, 8), w = dim(3, 8), ci = dim(1, 4), co = dim(1, 4), kh = dim(1, 3);
        const int stride = dim(1, 2), pad = dim(0, 1);
        if (op == "conv2d") {
            if (h + 2 * pad < kh || w + 2 * pad < kh) return grad_case_error(op, seed + 1000);
            pa = {"x", random_tensor<double>({2, h, w, ci}, meta)};
            pb = {"k", random_tensor<double>({kh, kh, ci, co}, meta)};
            auto out = g.conv2d(g.param(pa), g.param(pb), stride, pad);
            auto wts = random_tensor<double>(g.value(out).shape, meta);
            g.backward(g.weighted_sum(out, wts));
            eval = [&, wts, stride, pad] { return oracle::inner_product(ops::conv2d(pa.value, pb.value, stride, pad), wts); };
        } else {
            const int kk = dim(2, 4);
            if ((h - 1) * stride - 2 * pad + kk < 1) return grad_case_error(op, seed + 1000);
            pa = {"x", random_tensor<double>({2, h, w, co}, meta)};
            pb = {"k", random_tensor<double>({kk, kk, ci, co}, meta)};
            auto out = g.conv_transpose2d(g.param(pa), g.param(pb), stride, pad);
            auto wts = random_tensor<double>(g.value(out).shape, meta);
            g.backward(g.weighted_sum(out, wts));
            eval = [&, wts, stride, pad] {
                return oracle::inner_product(ops::conv_transpose2d(pa.value, pb.value, stride, pad), wts);
            };
        }
        tensors = {&pa.value, &pb.value};
        analytic = {&pa.grad, &pb.grad};
    } else if (op == "batch_norm2d") {
        const int c = dim(1, 4);
        pa = {"x", random_tensor<double>({dim(2, 6), dim(2, 5), dim(2, 5), c}, meta)};
        pb = {"gamma", random_tensor<double>({c}, meta, 0.5, 1.5)};
        pc = {"beta", random_tensor<double>({c}, meta, -0.5, 0.5)};
        auto out = g.batch_norm2d(g.param(pa), g.param(pb), g.param(pc), nullptr, BnMode::train, 0.9, 1e-5);
        auto wts = random_tensor<double>(g.value(out).shape, meta);
        g.backward(g.weighted_sum(out, wts));
        tensors = {&pa.value, &pb.value, &pc.value};
        analytic = {&pa.grad, &pb.grad, &pc.grad};
        eval = [&, wts] {
            auto o = ops::batch_norm2d(pa.value, pb.value, pc.value, static_cast<TensorT<double>*>(nullptr),
                                       static_cast<TensorT<double>*>(nullptr), true, 0.9, 1e-5,
                                       static_cast<ops::BnCache<double>*>(nullptr));
            return oracle::inner_product(o, wts);
        };
    } else if (op == "dense") {
        pa = {"x", random_tensor<double>({dim(1, 6), dim(1, 8)}, meta)};
        pb = {"w", random_tensor<double>({pa.value.dim(1), dim(1, 8)}, meta)};
        pc = {"b", random_tensor<double>({pb.value.dim(1)}, meta)};
        auto out = g.dense(g.param(pa), g.param(pb), g.param(pc));
        auto wts = random_tensor<double>(g.value(out).shape, meta);
        g.backward(g.weighted_sum(out, wts));
        tensors = {&pa.value, &pb.value, &pc.value};
        analytic = {&pa.grad, &pb.grad, &pc.grad};
        eval = [&, wts] { return oracle::inner_product(ops::dense(pa.value, pb.value, pc.value), wts); };
    } else if (op == "max_pool2d") {
        const int h = 2 * dim(1, 4), w = 2 * dim(1, 4);
        pa = {"x", random_tensor<double>({dim(1, 3), h, w, dim(1, 4)}, meta)};
        auto out = g.max_pool2d(g.param(pa), 2);
        auto wts = random_tensor<double>(g.value(out).shape, meta);
        g.backward(g.weighted_sum(out, wts));
        tensors = {&pa.value};
        analytic = {&pa.grad};
        eval = [&, wts] { return oracle::inner_product(ops::max_pool2d(pa.value, 2), wts); };
    } else if (op == "softmax_cross_entropy") {
        const int n = dim(1, 6), c = dim(2, 10);
        pa = {"logits", random_tensor<double>({n, c}, meta, -2, 2)};
        std::vector<int> labels;
        for (int i = 0; i < n; ++i) labels.push_back(static_cast<int>(meta.uniform_index(static_cast<std::uint64_t>(c))));
        g.backward(g.softmax_cross_entropy(g.param(pa), labels));
        tensors = {&pa.value};
        analytic = {&pa.grad};
        eval = [&, labels] { return ops::softmax_cross_entropy(pa.value, labels); };
    } else if (op == "binary_cross_entropy") {
        pa = {"p", random_tensor<double>({dim(1, 6), dim(1, 6)}, meta, 0.1, 0.9)};
        TensorT<double> targets(pa.value.shape);
        for (auto& v : targets.data) v = meta.uniform() < 0.5 ? 0.0 : 1.0;
        pb = {"t", targets};
        g.backward(g.binary_cross_entropy(g.param(pa), g.param(pb)));
        tensors = {&pa.value, &pb.value};
        analytic = {&pa.grad, &pb.grad};
        eval = [&] { return ops::binary_cross_entropy(pa.value, pb.value); };
    } else if (op == "elastic_net") {
        pa = {"w", random_tensor<double>({dim(1, 5), dim(1, 5)}, meta, -2, 2, 0.05)};
        const double l1 = meta.uniform(0, 1), l2 = meta.uniform(0, 1);
        g.backward(g.elastic_net({g.param(pa)}, l1, l2));
        tensors = {&pa.value};
        analytic = {&pa.grad};
        eval = [&, l1, l2] { return ops::elastic_net_penalty<double>({&pa.value}, l1, l2); };
    } else {
        ops::Act kind = ops::Act::relu;
        if (op == "leaky_relu") kind = ops::Act::leaky_relu;
        if (op == "tanh") kind = ops::Act::tanh;
        if (op == "sigmoid") kind = ops::Act::sigmoid;
        pa = {"x", random_tensor<double>({dim(1, 6), dim(1, 8)}, meta, -2, 2, 1e-3)};
        auto out = g.activation(g.param(pa), kind, 0.2);
        auto wts = random_tensor<double>(g.value(out).shape, meta);
        g.backward(g.weighted_sum(out, wts));
        tensors = {&pa.value};
        analytic = {&pa.grad};
        eval = [&, wts, kind] { return oracle::inner_product(ops::activation(pa.value, kind, 0.2), wts); };
    }
    return oracle::fd_max_rel_error(eval, tensors, analytic);
}

double composite_gradient_error(std::uint64_t seed, int* kinks_skipped) {
    ClassifierNetT<double> net;
    net.init(seed);
    const Dataset ds = make_toy_dataset(1, Rng::mix(seed, 5));
    TensorT<double> batch({2, 28, 28, 1});
    // Dither breaks the exact pixel ties the toy renderer's clamp produces;
    // max-pool is non-differentiable at ties and finite differences are
    // meaningless there.
    Rng dither(Rng::mix(seed, 99));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 784; ++j)
            batch.data[static_cast<std::size_t>(i * 784 + j)] =
                ds[static_cast<std::size_t>(i)].pixels.data[static_cast<std::size_t>(j)] + dither.uniform(-1e-3, 1e-3);
    const std::vector<int> labels = {ds[0].class_id, ds[1].class_id};
    GraphT<double> g;
    g.backward(g.softmax_cross_entropy(net.forward(g, g.input(batch, "x")), labels));
    std::vector<TensorT<double>*> tensors;
    std::vector<const TensorT<double>*> analytic;
    for (auto* p : net.parameters()) {
        tensors.push_back(&p->value);
        analytic.push_back(&p->grad);
    }
    auto eval = [&] {
        GraphT<double> fg;
        return static_cast<double>(
            fg.value(fg.softmax_cross_entropy(net.forward(fg, fg.input(batch, "x")), labels)).data[0]);
    };
    // h = 1e-6 keeps the two-sided difference on one side of the network's
    // ReLU/max-pool kinks; straddled coordinates are verified one-sided.
    return oracle::fd_max_rel_error(eval, tensors, analytic, 1e-6, 1e-3, 20, seed, kinks_skipped);
}

bool criterion2(std::ostringstream& log) {
    const std::vector<std::string> ops_list = {"conv2d", "conv_transpose2d", "batch_norm2d", "dense",
                                               "max_pool2d", "softmax_cross_entropy", "binary_cross_entropy",
                                               "elastic_net", "relu", "leaky_relu", "tanh", "sigmoid"};
    bool ok = true;
    for (const auto& op : ops_list) {
        double worst = 0;
        for (std::uint64_t seed = 1; seed <= 100; ++seed) worst = std::max(worst, grad_case_error(op, seed));
        log << op << " " << format_fixed(worst * 1e6, 3) << "e-6; ";
        if (worst >= 1e-5) ok = false;
    }
    double composite = 0;
    int kinks = 0;
    for (std::uint64_t seed = 1; seed <= 2; ++seed)
        composite = std::max(composite, composite_gradient_error(seed, &kinks));
    log << "composite " << format_fixed(composite * 1e6, 3) << "e-6 (" << kinks
        << " kink-straddling coords checked one-sided)";
    // 320 coordinates total; many kink hits would mean the evaluation point
    // is not generic.
    return ok && composite < 1e-4 && kinks <= 8;
}

// ---------------------------------------------------------------------------
// 3. oracle equivalence

bool criterion3(std::ostringstream& log) {
    Rng meta(0x726566);
    double worst32 = 0;
    bool exact64 = true;
    for (int trial = 0; trial < 40; ++trial) {
        const int h = 3 + static_cast<int>(meta.uniform_index(6));
        const int w = 3 + static_cast<int>(meta.uniform_index(6));
        const int ci = 1 + static_cast<int>(meta.uniform_index(4));
        const int co = 1 + static_cast<int>(meta.uniform_index(4));
        const int kh = 1 + static_cast<int>(meta.uniform_index(3));
        const int stride = 1 + static_cast<int>(meta.uniform_index(2));
        const int pad = static_cast<int>(meta.uniform_index(2));
        Rng rng(Rng::mix(0xabc, static_cast<std::uint64_t>(trial)));

        if (h + 2 * pad >= kh && w + 2 * pad >= kh) {
            auto x = random_tensor<double>({2, h, w, ci}, rng);
            auto k = random_tensor<double>({kh, kh, ci, co}, rng);
            if (oracle::max_abs_diff(ops::conv2d(x, k, stride, pad), oracle::conv2d_ref(x, k, stride, pad)) != 0)
                exact64 = false;
            Tensor xf(x.shape), kf(k.shape);
            for (std::size_t i = 0; i < x.data.size(); ++i) xf.data[i] = static_cast<float>(x.data[i]);
            for (std::size_t i = 0; i < k.data.size(); ++i) kf.data[i] = static_cast<float>(k.data[i]);
            worst32 = std::max(worst32, oracle::max_rel_diff(ops::conv2d(xf, kf, stride, pad),
                                                             oracle::conv2d_ref(xf, kf, stride, pad)));
        }
        {
            const int kk = 2 + static_cast<int>(meta.uniform_index(3));
            if ((h - 1) * stride - 2 * pad + kk >= 1) {
                auto y = random_tensor<double>({2, h, w, co}, rng);
                auto k = random_tensor<double>({kk, kk, ci, co}, rng);
                if (oracle::max_abs_diff(ops::conv_transpose2d(y, k, stride, pad),
                                         oracle::conv_transpose2d_ref(y, k, stride, pad)) != 0)
                    exact64 = false;
                Tensor yf(y.shape), kf(k.shape);
                for (std::size_t i = 0; i < y.data.size(); ++i) yf.data[i] = static_cast<float>(y.data[i]);
                for (std::size_t i = 0; i < k.data.size(); ++i) kf.data[i] = static_cast<float>(k.data[i]);
                worst32 = std::max(worst32, oracle::max_rel_diff(ops::conv_transpose2d(yf, kf, stride, pad),
                                                                 oracle::conv_transpose2d_ref(yf, kf, stride, pad)));
            }
        }
        {
            auto x = random_tensor<double>({2 + static_cast<int>(meta.uniform_index(4)), 3 + static_cast<int>(meta.uniform_index(6))}, rng);
            auto wm = random_tensor<double>({x.dim(1), 1 + static_cast<int>(meta.uniform_index(6))}, rng);
            auto b = random_tensor<double>({wm.dim(1)}, rng);
            if (oracle::max_abs_diff(ops::dense(x, wm, b), oracle::dense_ref(x, wm, b)) != 0) exact64 = false;
        }
    }
    log << "64-bit exact " << (exact64 ? "yes" : "NO") << ", 32-bit worst rel " << format_fixed(worst32 * 1e6, 3)
        << "e-6";
    return exact64 && worst32 < 1e-5;
}

// ---------------------------------------------------------------------------
// 4. augmentation property suite

bool criterion4(std::ostringstream& log) {
    bool ok = true;

    // identities
    Rng rng(0x617567);
    Tensor img({28, 28, 1});
    for (auto& v : img.data) v = static_cast<float>(rng.uniform(-1, 1));
    AugmentOpSpec rot0;
    rot0.kind = AugmentOp::rotate;
    ok &= homography_for(rot0).is_identity();
    ok &= bit_equal(warp(img, Mat3::identity()), img);
    ok &= bit_equal(salt_pepper(img, 0.0, 9), img);
    ok &= bit_equal(adjust_lighting(img, 0.0, 1.0), img);
    ok &= bit_equal(flip(flip(img, true), true), img);
    ok &= bit_equal(flip(flip(img, false), false), img);
    if (!ok) log << "identity checks failed; ";

    // policy audit over >= 10000 logged variants
    const Dataset src = make_toy_dataset(50, 2024);  // 500 images
    AugmentPlan plan;
    plan.multiplier = 20;  // 10000 variants
    plan.seed = 99;
    std::vector<EmissionRecord> emission;
    const Dataset out = build_augmented_dataset(src, plan, &emission);
    int violations = 0;
    for (const auto& rec : emission)
        if (!spec_within_policy(rec.class_id, plan.policy, rec.op)) ++violations;
    int label_mismatches = 0;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out[i].class_id != src[i / static_cast<std::size_t>(1 + plan.multiplier)].class_id) ++label_mismatches;
    log << emission.size() << " variants, " << violations << " policy violations, " << label_mismatches
        << " label changes; ";
    ok &= emission.size() == 10000 && violations == 0 && label_mismatches == 0;

    // salt-and-pepper binomial: mean 78.4, sigma 8.4 at p=0.1 on 784 pixels
    Tensor zeros({28, 28, 1});
    int outliers = 0;
    double total = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        int corrupted = 0;
        for (float v : salt_pepper(zeros, 0.1, seed).data)
            if (v != 0.0f) ++corrupted;
        total += corrupted;
        if (std::abs(corrupted - 78.4) > 3 * 8.4) ++outliers;
    }
    log << "salt-pepper mean " << format_fixed(total / 100.0, 2) << ", 3-sigma outliers " << outliers;
    ok &= outliers == 0;
    return ok;
}

// ---------------------------------------------------------------------------
// 5. architecture audit

bool criterion5(std::ostringstream& log) {
    GanConfig config;
    config.seed = 5;
    auto [gen, disc] = build_gan(config);
    const GanAudit audit = audit_gan(gen, disc, config);
    log << "no_pooling " << audit.no_pooling << ", batchnorm_both " << audit.batchnorm_in_both
        << ", no_hidden_dense " << audit.no_hidden_dense_in_discriminator << ", gen relu+tanh "
        << audit.generator_relu_hidden_tanh_out << ", disc leaky " << audit.discriminator_all_leaky
        << ", strided " << audit.strided_convolutions;
    return audit.all_pass();
}

// ---------------------------------------------------------------------------
// 6. GAN smoke training

struct C6Result {
    bool losses_finite = false;
    bool samples_in_range = false;
    double mean_mad = 1e9;
    double disc_accuracy = 1.0;
};

C6Result run_c6(const fs::path& dir) {
    fs::create_directories(dir);
    Dataset train;
    for (int i = 0; i < kKnobs.c6_images; ++i)
        train.push_back(render_toy_sign(0, Rng::mix(kKnobs.c6_data_seed, static_cast<std::uint64_t>(i))));

    GanConfig config;
    config.epochs = kKnobs.c6_epochs;
    config.batch_size = kKnobs.c6_batch;
    config.seed = kKnobs.c6_train_seed;
    config.class_id = 0;
    const GanCheckpoint cp = train_gan(train, config, [&](const GanCheckpoint& snap) {
        const auto& [d, g] = snap.loss_history.back();
        std::cout << "    c6 epoch " << snap.epochs_completed << "/" << config.epochs << " d " << format_fixed(d, 3)
                  << " g " << format_fixed(g, 3) << "\n"
                  << std::flush;
    });

    C6Result result;
    result.losses_finite = true;
    for (const auto& [d, g] : cp.loss_history)
        if (!std::isfinite(d) || !std::isfinite(g)) result.losses_finite = false;

    const auto samples = sample_generator(cp, kKnobs.c6_samples, 333);
    result.samples_in_range = true;
    Tensor sample_mean({28, 28, 1});
    for (const auto& s : samples) {
        for (std::int64_t i = 0; i < s.numel(); ++i) {
            const float v = s.data[static_cast<std::size_t>(i)];
            if (v < -1.0f || v > 1.0f) result.samples_in_range = false;
            sample_mean.data[static_cast<std::size_t>(i)] += v / static_cast<float>(samples.size());
        }
    }
    Tensor train_mean({28, 28, 1});
    for (const auto& img : train)
        for (std::int64_t i = 0; i < img.pixels.numel(); ++i)
            train_mean.data[static_cast<std::size_t>(i)] += img.pixels.data[static_cast<std::size_t>(i)] / static_cast<float>(train.size());
    double mad = 0;
    for (std::int64_t i = 0; i < train_mean.numel(); ++i)
        mad += std::abs(sample_mean.data[static_cast<std::size_t>(i)] - train_mean.data[static_cast<std::size_t>(i)]);
    result.mean_mad = mad / static_cast<double>(train_mean.numel());

    // end-of-training discriminator real-vs-fake accuracy at threshold 0.5
    GanCheckpoint eval_cp = cp;
    int correct = 0, total = 0;
    const int eval_n = 512;
    Graph g;
    Tensor real_batch({eval_n, 28, 28, 1});
    for (int i = 0; i < eval_n; ++i)
        std::copy(train[static_cast<std::size_t>(i)].pixels.data.begin(),
                  train[static_cast<std::size_t>(i)].pixels.data.end(),
                  real_batch.data.begin() + static_cast<std::ptrdiff_t>(i) * 784);
    const Tensor& d_real = g.value(eval_cp.discriminator.forward(g, g.input(std::move(real_batch), "real"), BnMode::eval));
    for (int i = 0; i < eval_n; ++i, ++total)
        if (d_real.data[static_cast<std::size_t>(i)] > 0.5f) ++correct;
    const auto fakes = sample_generator(cp, eval_n, 444);
    Graph g2;
    Tensor fake_batch({eval_n, 28, 28, 1});
    for (int i = 0; i < eval_n; ++i)
        std::copy(fakes[static_cast<std::size_t>(i)].data.begin(), fakes[static_cast<std::size_t>(i)].data.end(),
                  fake_batch.data.begin() + static_cast<std::ptrdiff_t>(i) * 784);
    const Tensor& d_fake = g2.value(eval_cp.discriminator.forward(g2, g2.input(std::move(fake_batch), "fake"), BnMode::eval));
    for (int i = 0; i < eval_n; ++i, ++total)
        if (d_fake.data[static_cast<std::size_t>(i)] <= 0.5f) ++correct;
    result.disc_accuracy = static_cast<double>(correct) / total;

    // metric artifacts for the determinism criterion
    write_text_file((dir / "loss_history.csv").string(), loss_history_csv(cp));
    std::ostringstream metrics;
    metrics << "mean_mad," << format_fixed(result.mean_mad, 6) << "\n"
            << "disc_accuracy," << format_fixed(result.disc_accuracy, 6) << "\n";
    write_text_file((dir / "metrics.csv").string(), metrics.str());
    return result;
}

bool criterion6(std::ostringstream& log) {
    const C6Result r = run_c6(work_root() / "c6_run1");
    log << "losses finite " << r.losses_finite << ", samples in range " << r.samples_in_range << ", mean MAD "
        << format_fixed(r.mean_mad, 4) << " (limit " << kKnobs.c6_mad_limit << "), disc accuracy "
        << format_fixed(r.disc_accuracy, 4) << " (limit " << kKnobs.c6_disc_acc_limit << ")";
    return r.losses_finite && r.samples_in_range && r.mean_mad < kKnobs.c6_mad_limit &&
           r.disc_accuracy <= kKnobs.c6_disc_acc_limit;
}

// ---------------------------------------------------------------------------
// 7. classifier sanity

double run_c7(const fs::path& dir) {
    fs::create_directories(dir);
    const Dataset train = make_toy_dataset(kKnobs.c7_train_per_class, 4242);
    const Dataset test = make_toy_dataset(kKnobs.c7_test_per_class, 171717);

    TrainConfig config;
    config.epochs = kKnobs.c7_epochs;
    config.batch_size = kKnobs.c7_batch;
    config.seed = 11;
    const ClfCheckpoint cp = train_classifier(build_classifier(11), train, config);

    const Predictions preds = predict_batch(cp, test);
    std::vector<int> labels;
    for (const auto& img : test) labels.push_back(img.class_id);
    const PerClassAccuracy acc = per_class_accuracy(preds.class_ids, labels);
    const double mean = aggregate_report(acc);

    const RunReport report = make_run_report("c7", acc, config.seed, "c7cfg", "c7test", train.size(), test.size());
    write_text_file((dir / "report.csv").string(), emit_csv(report));
    write_text_file((dir / "loss_curve.csv").string(), loss_curve_csv(cp));
    return mean;
}

bool criterion7(std::ostringstream& log) {
    const double mean = run_c7(work_root() / "c7_run1");
    log << "mean per-class accuracy " << format_fixed(mean, 2) << "% after " << kKnobs.c7_epochs << " epochs (floor "
        << format_fixed(kKnobs.c7_accuracy_floor, 0) << "%)";
    return mean >= kKnobs.c7_accuracy_floor;
}

// ---------------------------------------------------------------------------
// 8. end-to-end trend

struct ArmResult {
    double baseline = 0, augmented = 0, gan = 0;
};

ArmResult run_c8_seed(int seed_index, const fs::path& dir, const Dataset& test_set, std::ostream& progress) {
    fs::create_directories(dir);
    const std::uint64_t seed = 100 + static_cast<std::uint64_t>(seed_index);
    const Dataset base = make_toy_dataset(kKnobs.c8_base_per_class, Rng::mix(7777, seed));

    std::vector<int> test_labels;
    for (const auto& img : test_set) test_labels.push_back(img.class_id);
    auto evaluate_mean = [&](const ClfCheckpoint& cp) {
        const Predictions preds = predict_batch(cp, test_set);
        return aggregate_report(per_class_accuracy(preds.class_ids, test_labels));
    };

    // baseline arm: pretrain on the impoverished base set
    TrainConfig pre;
    pre.epochs = kKnobs.c8_clf_epochs;
    pre.batch_size = kKnobs.c8_clf_batch;
    pre.seed = seed;
    const ClfCheckpoint baseline_cp = train_classifier(build_classifier(seed), base, pre);
    ArmResult result;
    result.baseline = evaluate_mean(baseline_cp);
    progress << "    c8 seed " << seed_index << " baseline " << format_fixed(result.baseline, 2) << "%\n" << std::flush;

    // classical augmentation arm: fine-tune on base + augmented variants
    AugmentPlan plan;
    plan.multiplier = kKnobs.c8_aug_multiplier;
    plan.seed = Rng::mix(seed, 2);
    const Dataset augmented = build_augmented_dataset(base, plan);
    TrainConfig ft = TrainConfig::finetune_defaults();
    ft.epochs = kKnobs.c8_finetune_epochs;
    ft.batch_size = kKnobs.c8_clf_batch;
    ft.seed = Rng::mix(seed, 3);
    const ClfCheckpoint aug_cp = train_classifier(baseline_cp, augmented, ft);
    result.augmented = evaluate_mean(aug_cp);
    progress << "    c8 seed " << seed_index << " augmented " << format_fixed(result.augmented, 2) << "%\n" << std::flush;

    // GAN arm: per-class DCGANs on the base set, synthesize, fine-tune
    std::vector<GanCheckpoint> gans;
    for (int c = 0; c < kNumClasses; ++c) {
        Dataset slice;
        for (const auto& img : base)
            if (img.class_id == c) slice.push_back(img);
        GanConfig gc;
        gc.epochs = kKnobs.c8_gan_epochs;
        gc.batch_size = kKnobs.c8_gan_batch;
        gc.seed = Rng::mix(seed, 1000 + static_cast<std::uint64_t>(c));
        gc.class_id = c;
        gans.push_back(train_gan(slice, gc));
    }
    std::vector<const GanCheckpoint*> gan_ptrs;
    for (const auto& cp : gans) gan_ptrs.push_back(&cp);
    const Dataset synthetic = synthesize_labeled_set(gan_ptrs, kKnobs.c8_synth_per_class, Rng::mix(seed, 4));
    Dataset extended = base;
    extended.insert(extended.end(), synthetic.begin(), synthetic.end());
    TrainConfig ft2 = ft;
    ft2.seed = Rng::mix(seed, 5);
    const ClfCheckpoint gan_cp = train_classifier(baseline_cp, extended, ft2);
    result.gan = evaluate_mean(gan_cp);
    progress << "    c8 seed " << seed_index << " gan-extended " << format_fixed(result.gan, 2) << "%\n" << std::flush;

    std::ostringstream csv;
    csv << "arm,mean_accuracy\n"
        << "baseline," << format_fixed(result.baseline, 2) << "\n"
        << "augmented," << format_fixed(result.augmented, 2) << "\n"
        << "gan_extended," << format_fixed(result.gan, 2) << "\n";
    write_text_file((dir / "metrics.csv").string(), csv.str());
    return result;
}

bool run_c8(const fs::path& dir, std::ostringstream& log) {
    const Dataset test_set = make_toy_dataset(kKnobs.c8_test_per_class, 999999);
    int wins = 0;
    for (int s = 0; s < kKnobs.c8_seeds; ++s) {
        const ArmResult r = run_c8_seed(s, dir / ("seed" + std::to_string(s)), test_set, std::cout);
        const bool aug_win = r.baseline < r.augmented;
        const bool gan_win = r.baseline + kKnobs.c8_gan_margin <= r.gan;
        if (aug_win && gan_win) ++wins;
        log << "seed" << s << " " << format_fixed(r.baseline, 2) << "/" << format_fixed(r.augmented, 2) << "/"
            << format_fixed(r.gan, 2) << (aug_win && gan_win ? " WIN; " : " miss; ");
    }
    log << wins << "/" << kKnobs.c8_seeds << " seeds (need " << kKnobs.c8_required_wins << ")";
    return wins >= kKnobs.c8_required_wins;
}

bool criterion8(std::ostringstream& log) { return run_c8(work_root() / "c8_run1", log); }

// ---------------------------------------------------------------------------
// 9. determinism

bool files_equal(const fs::path& a, const fs::path& b) {
    return fs::exists(a) && fs::exists(b) && read_file(a.string()) == read_file(b.string());
}

bool criterion9(std::ostringstream& log) {
    const fs::path root = work_root();
    bool ok = true;

    if (!fs::exists(root / "c6_run1" / "metrics.csv")) run_c6(root / "c6_run1");
    run_c6(root / "c6_rerun");
    const bool c6_ok = files_equal(root / "c6_run1" / "loss_history.csv", root / "c6_rerun" / "loss_history.csv") &&
                       files_equal(root / "c6_run1" / "metrics.csv", root / "c6_rerun" / "metrics.csv");
    log << "c6 csv identical " << c6_ok << "; ";
    ok &= c6_ok;

    if (!fs::exists(root / "c7_run1" / "report.csv")) run_c7(root / "c7_run1");
    run_c7(root / "c7_rerun");
    const bool c7_ok = files_equal(root / "c7_run1" / "report.csv", root / "c7_rerun" / "report.csv") &&
                       files_equal(root / "c7_run1" / "loss_curve.csv", root / "c7_rerun" / "loss_curve.csv");
    log << "c7 csv identical " << c7_ok << "; ";
    ok &= c7_ok;

    std::ostringstream scratch;
    if (!fs::exists(root / "c8_run1" / "seed0" / "metrics.csv")) run_c8(root / "c8_run1", scratch);
    run_c8(root / "c8_rerun", scratch);
    bool c8_ok = true;
    for (int s = 0; s < kKnobs.c8_seeds; ++s)
        c8_ok &= files_equal(root / "c8_run1" / ("seed" + std::to_string(s)) / "metrics.csv",
                             root / "c8_rerun" / ("seed" + std::to_string(s)) / "metrics.csv");
    log << "c8 csv identical " << c8_ok;
    ok &= c8_ok;
    return ok;
}

// ---------------------------------------------------------------------------
// 10. container formats

bool criterion10(std::ostringstream& log) {
    bool ok = true;

    // SNF round trip + corruption
    const Dataset ds = make_toy_dataset(3, 808);
    const auto snf = write_snf(ds);
    ok &= write_snf(read_snf(snf)) == snf;
    auto bad_magic = snf;
    bad_magic[1] ^= 0x20;
    try {
        read_snf(bad_magic);
        ok = false;
        log << "snf bad magic not caught; ";
    } catch (const Error&) {
    }
    auto bad_size = snf;
    bad_size.resize(bad_size.size() - 3);
    try {
        read_snf(bad_size);
        ok = false;
        log << "snf bad size not caught; ";
    } catch (const Error&) {
    }

    // GAN checkpoint round trip + corruption
    GanConfig gc;
    gc.epochs = 1;
    gc.batch_size = 8;
    gc.seed = 3;
    Dataset slice;
    for (int i = 0; i < 8; ++i) slice.push_back(render_toy_sign(0, Rng::mix(5, static_cast<std::uint64_t>(i))));
    const GanCheckpoint gcp = train_gan(slice, gc);
    const auto ganc = write_gan_checkpoint(gcp);
    ok &= write_gan_checkpoint(read_gan_checkpoint(ganc)) == ganc;
    auto bad_ganc = ganc;
    bad_ganc[0] = 'Z';
    try {
        read_gan_checkpoint(bad_ganc);
        ok = false;
        log << "ganc bad magic not caught; ";
    } catch (const Error&) {
    }
    auto short_ganc = ganc;
    short_ganc.resize(short_ganc.size() / 3);
    try {
        read_gan_checkpoint(short_ganc);
        ok = false;
        log << "ganc truncation not caught; ";
    } catch (const Error&) {
    }

    // classifier checkpoint round trip
    TrainConfig tc;
    tc.epochs = 1;
    tc.batch_size = 16;
    const ClfCheckpoint ccp = train_classifier(build_classifier(1), make_toy_dataset(2, 42), tc);
    const auto clfc = write_clf_checkpoint(ccp);
    ok &= write_clf_checkpoint(read_clf_checkpoint(clfc)) == clfc;
    auto bad_clfc = clfc;
    bad_clfc[2] = '?';
    try {
        read_clf_checkpoint(bad_clfc);
        ok = false;
        log << "clfc bad magic not caught; ";
    } catch (const Error&) {
    }

    log << "snf/ganc/clfc round trips bit-exact, corruption raises structured errors";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria = {
        {1, "report arithmetic reproduces 77.61 / 80.53 / 87.42", criterion1},
        {2, "gradient suite: every operation vs central finite differences", criterion2},
        {3, "oracle equivalence: conv2d / conv_transpose2d / dense", criterion3},
        {4, "augmentation property suite and policy audit", criterion4},
        {5, "DCGAN architecture audit (five guidelines)", criterion5},
        {6, "GAN smoke training, 25 epochs on 2000 toy images", criterion6},
        {7, "classifier sanity: >= 90% on held-out toy split", criterion7},
        {8, "end-to-end trend: baseline < augmented, baseline + 2 <= GAN-extended", criterion8},
        {9, "determinism: repeated runs yield byte-identical metrics CSVs", criterion9},
        {10, "container formats round-trip and fail safely", criterion10},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "all") {
            selected.clear();
            for (const auto& c : criteria) selected.push_back(c.number);
            break;
        }
        selected.push_back(std::atoi(arg.c_str()));
    }
    if (selected.empty())
        for (const auto& c : criteria) selected.push_back(c.number);

    int failures = 0;
    for (const auto& c : criteria) {
        if (std::find(selected.begin(), selected.end(), c.number) == selected.end()) continue;
        std::ostringstream detail;
        const auto start = std::chrono::steady_clock::now();
        bool pass = false;
        std::string error;
        try {
            pass = c.run(detail);
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << c.number << ": " << c.name << " ("
                  << format_fixed(secs, 1) << "s)";
        if (!detail.str().empty()) std::cout << " — " << detail.str();
        if (!error.empty()) std::cout << " — exception: " << error;
        std::cout << "\n" << std::flush;
        if (!pass) ++failures;
    }
    if (failures > 0) {
        std::cout << failures << " criteria failed\n";
        return 1;
    }
    std::cout << "all selected criteria passed\n";
    return 0;
}
