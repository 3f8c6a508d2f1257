// Python bindings for the pipeline's main operations: the numeric kernels,
// dataset plumbing, augmentation transforms, and report arithmetic. Heavy
// training runs are driven through the `signet` CLI; these bindings cover
// scripting and verification from Python.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "signet/augment.hpp"
#include "signet/classifier.hpp"
#include "signet/dataset.hpp"
#include "signet/error.hpp"
#include "signet/gan.hpp"
#include "signet/image.hpp"
#include "signet/ops.hpp"
#include "signet/report.hpp"
#include "signet/snf.hpp"
#include "signet/toycorpus.hpp"
#include "signet/util.hpp"

namespace py = pybind11;
using namespace signet;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Tensor tensor_from(const FloatArray& arr) {
    std::vector<int> shape(static_cast<std::size_t>(arr.ndim()));
    for (py::ssize_t i = 0; i < arr.ndim(); ++i) shape[static_cast<std::size_t>(i)] = static_cast<int>(arr.shape(i));
    Tensor t(shape);
    std::copy(arr.data(), arr.data() + arr.size(), t.data.begin());
    return t;
}

py::array_t<float> array_from(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
    py::array_t<float> arr(shape);
    std::copy(t.data.begin(), t.data.end(), arr.mutable_data());
    return arr;
}

ops::Act act_from(const std::string& kind) {
    if (kind == "relu") return ops::Act::relu;
    if (kind == "leaky_relu") return ops::Act::leaky_relu;
    if (kind == "tanh") return ops::Act::tanh;
    if (kind == "sigmoid") return ops::Act::sigmoid;
    throw Error::data("unknown activation '" + kind + "'");
}

Dataset dataset_from(const FloatArray& images, const std::vector<int>& labels, const std::string& tag) {
    if (images.ndim() != 4 || images.shape(1) != kImageSize || images.shape(2) != kImageSize || images.shape(3) != 1)
        throw Error::data("dataset images must be (N,28,28,1)");
    if (static_cast<std::size_t>(images.shape(0)) != labels.size())
        throw Error::data("label count does not match image count");
    Dataset out;
    const auto per = static_cast<std::size_t>(kImageSize) * kImageSize;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        LabeledImage img;
        img.pixels = Tensor({kImageSize, kImageSize, 1});
        std::copy(images.data() + i * per, images.data() + (i + 1) * per, img.pixels.data.begin());
        img.class_id = static_cast<std::uint8_t>(labels[i]);
        img.source_tag = tag;
        out.push_back(std::move(img));
    }
    return out;
}

py::tuple dataset_to(const Dataset& ds) {
    py::array_t<float> images({static_cast<py::ssize_t>(ds.size()), static_cast<py::ssize_t>(kImageSize),
                               static_cast<py::ssize_t>(kImageSize), static_cast<py::ssize_t>(1)});
    std::vector<int> labels;
    labels.reserve(ds.size());
    float* dst = images.mutable_data();
    for (const auto& img : ds) {
        dst = std::copy(img.pixels.data.begin(), img.pixels.data.end(), dst);
        labels.push_back(img.class_id);
    }
    return py::make_tuple(images, labels);
}

}  // namespace

PYBIND11_MODULE(signet, m) {
    m.doc() = "GAN-extended traffic-sign pipeline: numeric core and data plumbing";

    py::register_exception<Error>(m, "SignetError");

    // --- numeric core ---------------------------------------------------
    m.def("conv2d", [](const FloatArray& x, const FloatArray& k, int stride, int pad) {
        return array_from(ops::conv2d(tensor_from(x), tensor_from(k), stride, pad));
    }, py::arg("input"), py::arg("kernels"), py::arg("stride") = 1, py::arg("padding") = 0,
       "NHWC convolution with KhKwCinCout kernels");

    m.def("conv_transpose2d", [](const FloatArray& x, const FloatArray& k, int stride, int pad) {
        return array_from(ops::conv_transpose2d(tensor_from(x), tensor_from(k), stride, pad));
    }, py::arg("input"), py::arg("kernels"), py::arg("stride") = 1, py::arg("padding") = 0,
       "Adjoint of conv2d with matched stride/padding");

    m.def("dense", [](const FloatArray& x, const FloatArray& w, const FloatArray& b) {
        return array_from(ops::dense(tensor_from(x), tensor_from(w), tensor_from(b)));
    });

    m.def("activation", [](const FloatArray& x, const std::string& kind, float alpha) {
        return array_from(ops::activation(tensor_from(x), act_from(kind), alpha));
    }, py::arg("input"), py::arg("kind"), py::arg("alpha") = 0.2f);

    m.def("max_pool2d", [](const FloatArray& x, int window) {
        return array_from(ops::max_pool2d(tensor_from(x), window));
    }, py::arg("input"), py::arg("window") = 2);

    m.def("softmax_cross_entropy", [](const FloatArray& logits, const std::vector<int>& labels) {
        Tensor probs;
        const float loss = ops::softmax_cross_entropy(tensor_from(logits), labels, &probs);
        return py::make_tuple(loss, array_from(ops::softmax_cross_entropy_backward(probs, labels, 1.0f)));
    }, "Returns (loss, gradient w.r.t. logits)");

    m.def("binary_cross_entropy", [](const FloatArray& p, const FloatArray& t) {
        return ops::binary_cross_entropy(tensor_from(p), tensor_from(t));
    });

    m.def("elastic_net_penalty", [](const FloatArray& w, float lambda1, float lambda2) {
        const Tensor wt = tensor_from(w);
        const float penalty = ops::elastic_net_penalty<float>({&wt}, lambda1, lambda2);
        return py::make_tuple(penalty, array_from(ops::elastic_net_gradient(wt, lambda1, lambda2, 1.0f)));
    }, "Returns (penalty, gradient)");

    // --- data i/o ---------------------------------------------------------
    m.def("preprocess", [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> rgb) {
        if (rgb.ndim() != 3 || rgb.shape(2) != 3) throw Error::data("preprocess expects (H,W,3) uint8");
        ImageU8 img;
        img.height = static_cast<int>(rgb.shape(0));
        img.width = static_cast<int>(rgb.shape(1));
        img.rgb.assign(rgb.data(), rgb.data() + rgb.size());
        return array_from(preprocess(img));
    }, "RGB uint8 (H,W,3) -> grayscale 28x28x1 in [-1,1]");

    m.def("decode_image", [](py::bytes data) {
        const std::string s = data;
        const ImageU8 img = decode_image_auto(
            std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
        py::array_t<std::uint8_t> arr({static_cast<py::ssize_t>(img.height), static_cast<py::ssize_t>(img.width),
                                       static_cast<py::ssize_t>(3)});
        std::copy(img.rgb.begin(), img.rgb.end(), arr.mutable_data());
        return arr;
    }, "Decode PPM(P6)/PNG bytes to an (H,W,3) uint8 array");

    m.def("save_snf", [](const std::string& path, const FloatArray& images, const std::vector<int>& labels) {
        save_snf(path, dataset_from(images, labels, "python"));
    });

    m.def("load_snf", [](const std::string& path) { return dataset_to(load_snf(path)); },
          "Returns (images (N,28,28,1) float32, labels list)");

    m.def("split_dataset", [](const FloatArray& images, const std::vector<int>& labels, double fraction,
                              std::uint64_t seed) {
        const DatasetSplit split = split_dataset(dataset_from(images, labels, "python"), fraction, seed);
        return py::make_tuple(dataset_to(split.train), dataset_to(split.test));
    }, py::arg("images"), py::arg("labels"), py::arg("test_fraction") = 0.1, py::arg("seed") = 1,
       "Stratified seeded split; returns ((train_images, train_labels), (test_images, test_labels))");

    m.def("sign_classes", [] {
        py::list out;
        for (const auto& c : sign_classes()) {
            py::dict d;
            d["id"] = c.id;
            d["name"] = c.name;
            d["feature_tags"] = c.feature_tags;
            out.append(d);
        }
        return out;
    });

    m.def("make_toy_dataset", [](int per_class, std::uint64_t seed) {
        return dataset_to(make_toy_dataset(per_class, seed));
    }, py::arg("per_class") = 10, py::arg("seed") = 1);

    // --- augmentation ------------------------------------------------------
    m.def("rotate", [](const FloatArray& img, double degrees) {
        AugmentOpSpec spec;
        spec.kind = AugmentOp::rotate;
        spec.rotate_deg = degrees;
        return array_from(warp(tensor_from(img), homography_for(spec)));
    });

    m.def("flip", [](const FloatArray& img, const std::string& axis) {
        if (axis != "h" && axis != "v") throw Error::data("flip axis must be 'h' or 'v'");
        return array_from(flip(tensor_from(img), axis == "h"));
    });

    m.def("salt_pepper", [](const FloatArray& img, double p, std::uint64_t seed) {
        return array_from(salt_pepper(tensor_from(img), p, seed));
    });

    m.def("adjust_lighting", [](const FloatArray& img, double brightness, double contrast) {
        return array_from(adjust_lighting(tensor_from(img), brightness, contrast));
    });

    m.def("allowed_ops", [](int class_id) {
        std::vector<std::string> names;
        for (AugmentOp op : allowed_ops(class_id, ClassPolicy::defaults())) names.emplace_back(augment_op_name(op));
        return names;
    }, "Default class-safety policy lookup");

    m.def("default_policy_text", [] { return ClassPolicy::defaults().to_text(); });

    m.def("build_augmented_dataset", [](const FloatArray& images, const std::vector<int>& labels, int multiplier,
                                        std::uint64_t seed) {
        AugmentPlan plan;
        plan.multiplier = multiplier;
        plan.seed = seed;
        return dataset_to(build_augmented_dataset(dataset_from(images, labels, "python"), plan));
    }, py::arg("images"), py::arg("labels"), py::arg("multiplier") = 2, py::arg("seed") = 1);

    // --- evaluation ---------------------------------------------------------
    m.def("per_class_accuracy", [](const std::vector<int>& predictions, const std::vector<int>& labels) {
        const PerClassAccuracy acc = per_class_accuracy(predictions, labels);
        py::dict out;
        for (int c = 0; c < kNumClasses; ++c)
            if (acc.present(c)) out[py::int_(c)] = acc.accuracy_percent(c);
        return out;
    });

    m.def("aggregate_mean", [](const std::vector<double>& per_class_percent) {
        if (per_class_percent.size() != kNumClasses)
            throw Error::data("aggregate_mean expects exactly 10 per-class accuracies");
        std::array<double, kNumClasses> a{};
        std::copy(per_class_percent.begin(), per_class_percent.end(), a.begin());
        return aggregate_report(PerClassAccuracy::from_percentages(a));
    }, "Unweighted mean of 10 per-class accuracy percentages");
}
