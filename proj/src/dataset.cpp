#include "signet/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "signet/error.hpp"
#include "signet/rng.hpp"

namespace signet {

const std::array<SignClass, kNumClasses>& sign_classes() {
    static const std::array<SignClass, kNumClasses> classes = {{
        {0, "Closed to all in both directions", {"circle", "white", "red"}},
        {1, "No entry", {"circle", "white stripe", "red"}},
        {2, "Stop and give way", {"white text", "red"}},
        {3, "Speed limit 30", {"circle", "white", "red", "black text"}},
        {4, "Speed limit 50", {"circle", "white", "red", "black text"}},
        {5, "Speed limit 70", {"circle", "white", "red", "black text"}},
        {6, "Speed limit 100", {"circle", "white", "red", "black text"}},
        {7, "End of restriction", {"circle", "white", "black"}},
        {8, "Priority road", {"diamond", "white", "yellow"}},
        {9, "Give way", {"triangle", "white", "red"}},
    }};
    return classes;
}

std::array<int, kNumClasses> class_histogram(const Dataset& images) {
    std::array<int, kNumClasses> counts{};
    for (const auto& img : images) {
        if (img.class_id >= kNumClasses)
            throw Error::data("class_histogram: class id " + std::to_string(img.class_id) + " out of range");
        counts[img.class_id] += 1;
    }
    return counts;
}

DatasetSplit split_dataset(const Dataset& images, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error::data("split_dataset: test_fraction must be in (0,1), got " + std::to_string(test_fraction));

    std::array<std::vector<std::size_t>, kNumClasses> per_class;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i].class_id >= kNumClasses)
            throw Error::data("split_dataset: class id " + std::to_string(images[i].class_id) + " out of range");
        per_class[images[i].class_id].push_back(i);
    }
    for (int c = 0; c < kNumClasses; ++c)
        if (per_class[static_cast<std::size_t>(c)].size() < 2)
            throw Error::data("split_dataset: class " + std::to_string(c) + " (" + sign_classes()[static_cast<std::size_t>(c)].name +
                              ") has " + std::to_string(per_class[static_cast<std::size_t>(c)].size()) +
                              " images; need at least 2");

    // Largest-remainder apportionment: total test size is round(f * N) and
    // every class receives floor or ceil of its proportional share.
    const auto total = static_cast<double>(images.size());
    const auto target_total = static_cast<std::int64_t>(std::llround(test_fraction * total));
    std::array<std::int64_t, kNumClasses> quota{};
    std::array<double, kNumClasses> remainder{};
    std::int64_t assigned = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        const double exact = test_fraction * static_cast<double>(per_class[static_cast<std::size_t>(c)].size());
        quota[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(std::floor(exact));
        remainder[static_cast<std::size_t>(c)] = exact - std::floor(exact);
        assigned += quota[static_cast<std::size_t>(c)];
    }
    std::array<int, kNumClasses> order{};
    for (int c = 0; c < kNumClasses; ++c) order[static_cast<std::size_t>(c)] = c;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return remainder[static_cast<std::size_t>(a)] > remainder[static_cast<std::size_t>(b)]; });
    for (int i = 0; assigned < target_total && i < kNumClasses; ++i, ++assigned)
        quota[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] += 1;

    std::vector<char> in_test(images.size(), 0);
    for (int c = 0; c < kNumClasses; ++c) {
        auto& idx = per_class[static_cast<std::size_t>(c)];
        Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(idx);
        const auto take = std::min<std::int64_t>(quota[static_cast<std::size_t>(c)],
                                                 static_cast<std::int64_t>(idx.size()) - 1);
        for (std::int64_t i = 0; i < take; ++i) in_test[idx[static_cast<std::size_t>(i)]] = 1;
    }

    DatasetSplit split;
    split.seed = seed;
    split.test_fraction = test_fraction;
    for (std::size_t i = 0; i < images.size(); ++i)
        (in_test[i] ? split.test : split.train).push_back(images[i]);
    return split;
}

}  // namespace signet
