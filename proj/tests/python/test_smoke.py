"""Smoke tests for the signet python bindings."""

import math
import os
import sys
import tempfile

import numpy as np

import signet


def check(name, cond):
    if not cond:
        print(f"FAIL {name}")
        sys.exit(1)
    print(f"ok {name}")


def main():
    # conv2d: 1x1 identity kernel
    x = np.random.default_rng(1).uniform(-1, 1, size=(1, 6, 6, 1)).astype(np.float32)
    k = np.ones((1, 1, 1, 1), dtype=np.float32)
    y = signet.conv2d(x, k, 1, 0)
    check("conv2d identity", np.array_equal(x, y))

    # conv2d: 3x3 ones -> 9
    ones = np.ones((1, 3, 3, 1), dtype=np.float32)
    k3 = np.ones((3, 3, 1, 1), dtype=np.float32)
    check("conv2d ones", abs(signet.conv2d(ones, k3, 1, 0).item() - 9.0) < 1e-6)

    # conv_transpose2d shape: 7 -> 14 with k=4, s=2, p=1
    z = np.zeros((1, 7, 7, 3), dtype=np.float32)
    kt = np.zeros((4, 4, 2, 3), dtype=np.float32)
    check("conv_transpose2d shape", signet.conv_transpose2d(z, kt, 2, 1).shape == (1, 14, 14, 2))

    # softmax cross entropy on uniform logits = ln C
    loss, grad = signet.softmax_cross_entropy(np.zeros((2, 10), dtype=np.float32), [0, 5])
    check("softmax ln10", abs(loss - math.log(10)) < 1e-5)
    check("softmax grad shape", grad.shape == (2, 10))

    # binary cross entropy at p = 0.5
    p = np.full((2, 2), 0.5, dtype=np.float32)
    t = np.array([[1, 0], [0, 1]], dtype=np.float32)
    check("bce ln2", abs(signet.binary_cross_entropy(p, t) - math.log(2)) < 1e-6)

    # elastic net on (3, -4)
    w = np.array([3.0, -4.0], dtype=np.float32)
    pen_l1, _ = signet.elastic_net_penalty(w, 1.0, 0.0)
    pen_l2, _ = signet.elastic_net_penalty(w, 0.0, 1.0)
    check("elastic net", pen_l1 == 7.0 and pen_l2 == 25.0)

    # activation ranges
    big = np.array([[-40.0, 40.0]], dtype=np.float32)
    sig = signet.activation(big, "sigmoid")
    check("sigmoid open interval", 0.0 < sig.min() and sig.max() < 1.0)

    # preprocess endpoints: white 28x28 -> +1
    white = np.full((28, 28, 3), 255, dtype=np.uint8)
    check("preprocess white", abs(signet.preprocess(white).max() - 1.0) < 1e-6)

    # toy dataset + snf round trip
    images, labels = signet.make_toy_dataset(3, 7)
    check("toy shape", images.shape == (30, 28, 28, 1))
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "toy.snf")
        signet.save_snf(path, images, labels)
        back_images, back_labels = signet.load_snf(path)
        check("snf round trip", np.array_equal(images, back_images) and list(labels) == list(back_labels))

    # stratified split
    (train_x, train_y), (test_x, test_y) = signet.split_dataset(images, labels, 0.3, 11)
    check("split sizes", len(train_y) == 21 and len(test_y) == 9)

    # augmentation basics
    img = images[0]
    check("rotate0 identity", np.array_equal(signet.rotate(img, 0.0), img))
    check("flip involution", np.array_equal(signet.flip(signet.flip(img, "h"), "h"), img))
    noisy = signet.salt_pepper(np.zeros((28, 28, 1), dtype=np.float32), 1.0, 3)
    check("salt pepper extremes", set(np.unique(noisy)) <= {-1.0, 1.0})

    # class policy
    check("policy stop sign", "flip_h" not in signet.allowed_ops(2))
    check("policy give way", "flip_h" in signet.allowed_ops(9) and "flip_v" not in signet.allowed_ops(9))
    check("policy class 0", len(signet.allowed_ops(0)) == 8)

    # report arithmetic against the published coordinates
    baseline = [73.1, 77.5, 78.0, 78.8, 80.6, 75.8, 77.4, 79.0, 78.6, 77.3]
    check("mean 77.61", abs(signet.aggregate_mean(baseline) - 77.61) < 0.005)
    synthetic = [84.9, 85.5, 84.9, 88.2, 89.5, 88.5, 90.3, 88.2, 86.9, 87.3]
    check("mean 87.42", abs(signet.aggregate_mean(synthetic) - 87.42) < 0.005)

    # per-class accuracy dict
    acc = signet.per_class_accuracy([0, 1, 1, 2], [0, 1, 2, 2])
    check("per-class accuracy", acc[0] == 100.0 and acc[2] == 50.0)

    print("all python smoke tests passed")


if __name__ == "__main__":
    main()
