#include "signet/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "signet/checkpoint.hpp"
#include "signet/error.hpp"
#include "signet/util.hpp"

namespace signet {

namespace {

constexpr float kAdamBeta1Clf = 0.9f;
constexpr int kPredictChunk = 128;

Tensor image_batch(const Dataset& images, const std::vector<std::size_t>& order, std::size_t begin,
                   std::size_t count, std::vector<int>* labels) {
    Tensor batch({static_cast<int>(count), kImageSize, kImageSize, 1});
    if (labels) labels->clear();
    for (std::size_t i = 0; i < count; ++i) {
        const LabeledImage& img = images[order[begin + i]];
        std::copy(img.pixels.data.begin(), img.pixels.data.end(),
                  batch.data.begin() + static_cast<std::ptrdiff_t>(i * img.pixels.data.size()));
        if (labels) labels->push_back(img.class_id);
    }
    return batch;
}

ClfCheckpoint run_training(ClassifierNet net, const Dataset& images, const TrainConfig& config) {
    if (images.empty()) throw Error::data("train_classifier: dataset is empty");
    if (config.batch_size < 1) throw Error::data("train_classifier: batch_size must be positive");
    if (config.epochs < 0) throw Error::data("train_classifier: epochs must be non-negative");

    ClfCheckpoint cp;
    cp.config = config;
    cp.net = std::move(net);
    cp.adam = AdamState(config.learning_rate, kAdamBeta1Clf);
    const std::size_t n = images.size();
    const std::size_t batches = (n + static_cast<std::size_t>(config.batch_size) - 1) /
                                static_cast<std::size_t>(config.batch_size);
    cp.batches_per_epoch = static_cast<int>(batches);

    Rng rng(Rng::mix(config.seed, 0x636c6673));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    auto params = cp.net.parameters();
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t begin = b * static_cast<std::size_t>(config.batch_size);
            const std::size_t count = std::min(static_cast<std::size_t>(config.batch_size), n - begin);
            std::vector<int> labels;
            Tensor batch = image_batch(images, order, begin, count, &labels);

            Graph g;
            auto x = g.input(std::move(batch), "images");
            auto logits = cp.net.forward(g, x);
            auto loss = g.softmax_cross_entropy(logits, labels);
            if (config.lambda1 > 0.0f || config.lambda2 > 0.0f) {
                std::vector<Graph::Value> weights;
                for (Parameter* p : cp.net.weight_parameters()) weights.push_back(g.param(*p));
                loss = g.add(loss, g.elastic_net(weights, config.lambda1, config.lambda2));
            }
            zero_grads(params);
            g.backward(loss);
            adam_step(params, cp.adam);
            cp.loss_curve.push_back(g.value(loss).data[0]);
        }
        cp.epochs_completed = epoch + 1;
    }
    return cp;
}

}  // namespace

ClassifierNet build_classifier(std::uint64_t seed) {
    ClassifierNet net;
    net.init(seed);
    return net;
}

ClfCheckpoint train_classifier(const ClassifierNet& start, const Dataset& images, const TrainConfig& config) {
    if (config.stage == TrainStage::finetune)
        throw Error::data("train_classifier: fine-tuning requires an existing checkpoint");
    return run_training(start, images, config);
}

ClfCheckpoint train_classifier(const ClfCheckpoint& start, const Dataset& images, const TrainConfig& config) {
    return run_training(start.net, images, config);
}

Predictions predict_batch(const ClassifierNet& net, const Dataset& images) {
    if (images.empty()) throw Error::data("predict_batch: no images");
    Predictions out;
    out.probabilities = Tensor({static_cast<int>(images.size()), kNumClasses});
    ClassifierNet local = net;  // forward records parameter leaves; keep input const
    std::vector<std::size_t> order(images.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::size_t done = 0;
    while (done < images.size()) {
        const std::size_t count = std::min<std::size_t>(kPredictChunk, images.size() - done);
        Tensor batch = image_batch(images, order, done, count, nullptr);
        Graph g;
        auto logits_v = local.forward(g, g.input(std::move(batch), "images"));
        const Tensor& logits = g.value(logits_v);
        for (std::size_t i = 0; i < count; ++i) {
            const float* row = logits.data.data() + static_cast<std::ptrdiff_t>(i) * kNumClasses;
            float mx = row[0];
            int arg = 0;
            for (int j = 1; j < kNumClasses; ++j)
                if (row[j] > mx) {  // ties break toward the lower class id
                    mx = row[j];
                    arg = j;
                }
            double denom = 0;
            for (int j = 0; j < kNumClasses; ++j) denom += std::exp(static_cast<double>(row[j]) - mx);
            for (int j = 0; j < kNumClasses; ++j)
                out.probabilities.at(static_cast<int>(done + i), j) =
                    static_cast<float>(std::exp(static_cast<double>(row[j]) - mx) / denom);
            out.class_ids.push_back(arg);
        }
        done += count;
    }
    return out;
}

Predictions predict_batch(const ClfCheckpoint& checkpoint, const Dataset& images) {
    return predict_batch(checkpoint.net, images);
}

std::vector<std::uint8_t> write_clf_checkpoint(const ClfCheckpoint& cp) {
    Container c;
    c.magic = "CLFC";
    c.set(("stage"), cp.config.stage == TrainStage::finetune ? "finetune" : "pretrain");
    c.set_f32("learning_rate", cp.config.learning_rate);
    c.set_i64("epochs", cp.config.epochs);
    c.set_i64("batch_size", cp.config.batch_size);
    c.set_u64("seed", cp.config.seed);
    c.set_f32("lambda1", cp.config.lambda1);
    c.set_f32("lambda2", cp.config.lambda2);
    c.set_i64("epochs_completed", cp.epochs_completed);
    c.set_i64("batches_per_epoch", cp.batches_per_epoch);
    c.set_i64("adam.steps", cp.adam.step_count);
    c.set_f32("adam.lr", cp.adam.learning_rate);
    c.set_f32("adam.beta1", cp.adam.beta1);
    c.set_f32("adam.beta2", cp.adam.beta2);
    c.set_f32("adam.eps", cp.adam.epsilon);

    for (const Parameter* p : cp.net.parameters()) c.add_tensor(p->name, p->value);
    const auto params = cp.net.parameters();
    for (std::size_t i = 0; i < cp.adam.first_moment.size(); ++i) {
        c.add_tensor("adam.m." + params[i]->name, cp.adam.first_moment[i]);
        c.add_tensor("adam.v." + params[i]->name, cp.adam.second_moment[i]);
    }
    if (!cp.loss_curve.empty()) c.add_tensor("loss_curve", Tensor({static_cast<int>(cp.loss_curve.size())}, cp.loss_curve));
    return write_container(c);
}

ClfCheckpoint read_clf_checkpoint(std::span<const std::uint8_t> bytes) {
    const Container c = read_container(bytes, "CLFC");
    ClfCheckpoint cp;
    cp.config.stage = c.get("stage") == "finetune" ? TrainStage::finetune : TrainStage::pretrain;
    cp.config.learning_rate = c.get_f32("learning_rate");
    cp.config.epochs = static_cast<int>(c.get_i64("epochs"));
    cp.config.batch_size = static_cast<int>(c.get_i64("batch_size"));
    cp.config.seed = c.get_u64("seed");
    cp.config.lambda1 = c.get_f32("lambda1");
    cp.config.lambda2 = c.get_f32("lambda2");
    cp.epochs_completed = static_cast<int>(c.get_i64("epochs_completed"));
    cp.batches_per_epoch = static_cast<int>(c.get_i64("batches_per_epoch"));
    cp.adam = AdamState(c.get_f32("adam.lr"), c.get_f32("adam.beta1"), c.get_f32("adam.beta2"), c.get_f32("adam.eps"));
    cp.adam.step_count = c.get_i64("adam.steps");

    cp.net.init(0);
    for (Parameter* p : cp.net.parameters()) p->value = c.tensor(p->name);
    const auto params = cp.net.parameters();
    if (c.has_tensor("adam.m." + params[0]->name)) {
        for (Parameter* p : params) {
            cp.adam.first_moment.push_back(c.tensor("adam.m." + p->name));
            cp.adam.second_moment.push_back(c.tensor("adam.v." + p->name));
        }
    }
    if (c.has_tensor("loss_curve")) cp.loss_curve = c.tensor("loss_curve").data;
    return cp;
}

void save_clf_checkpoint(const std::string& path, const ClfCheckpoint& cp) {
    write_file(path, write_clf_checkpoint(cp));
}

ClfCheckpoint load_clf_checkpoint(const std::string& path) {
    const auto bytes = read_file(path);
    return read_clf_checkpoint(bytes);
}

std::string loss_curve_csv(const ClfCheckpoint& cp) {
    std::ostringstream os;
    os << "epoch,batch,loss\n";
    const std::size_t per = cp.batches_per_epoch > 0 ? static_cast<std::size_t>(cp.batches_per_epoch) : 1;
    for (std::size_t i = 0; i < cp.loss_curve.size(); ++i)
        os << i / per << "," << i % per << "," << format_fixed(cp.loss_curve[i], 6) << "\n";
    return os.str();
}

}  // namespace signet
