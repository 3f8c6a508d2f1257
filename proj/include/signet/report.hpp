#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "signet/dataset.hpp"

namespace signet {

struct PerClassAccuracy {
    std::array<int, kNumClasses> correct{};
    std::array<int, kNumClasses> count{};

    bool present(int class_id) const { return count[static_cast<std::size_t>(class_id)] > 0; }
    double accuracy_percent(int class_id) const;  // 100 * correct / count

    static PerClassAccuracy from_percentages(const std::array<double, kNumClasses>& percents, int per_class_count = 1000);
};

// Exact counting; classes absent from the test set stay absent (count 0).
PerClassAccuracy per_class_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

// Unweighted arithmetic mean over all ten classes; a missing class is an
// error naming it.
double aggregate_report(const PerClassAccuracy& per_class);

struct RunReport {
    std::string label;
    PerClassAccuracy per_class;
    double mean_accuracy = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string test_hash;  // identifies the test split this row was scored on
    std::size_t train_size = 0;
    std::size_t test_size = 0;
};

RunReport make_run_report(const std::string& label, const PerClassAccuracy& per_class, std::uint64_t seed,
                          const std::string& config_hash, const std::string& test_hash, std::size_t train_size,
                          std::size_t test_size);

// header `class_id,accuracy_percent,count`, ten class rows, then
// `mean,<value>,<total>`; two decimals, LF endings.
std::string emit_csv(const RunReport& report);

// Parses emit_csv output back (used by the report command and round-trip tests).
RunReport parse_report_csv(const std::string& text);

// All rows must share one test split.
struct ComparisonTable {
    std::vector<RunReport> rows;

    void add(RunReport report);
};

// One line per run: label, then the per-class accuracy pairs `(class,acc)`
// with no spaces, trailing zeros trimmed.
std::string emit_plot_series(const ComparisonTable& comparison);

std::vector<std::pair<int, double>> parse_plot_series_line(const std::string& line);

}  // namespace signet
