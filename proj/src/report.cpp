#include "signet/report.hpp"

#include <cmath>
#include <sstream>

#include "signet/error.hpp"
#include "signet/util.hpp"

namespace signet {

double PerClassAccuracy::accuracy_percent(int class_id) const {
    if (class_id < 0 || class_id >= kNumClasses)
        throw Error::data("accuracy: class " + std::to_string(class_id) + " out of range");
    if (!present(class_id)) throw Error::data("accuracy: class " + std::to_string(class_id) + " absent from test set");
    return 100.0 * correct[static_cast<std::size_t>(class_id)] / count[static_cast<std::size_t>(class_id)];
}

PerClassAccuracy PerClassAccuracy::from_percentages(const std::array<double, kNumClasses>& percents,
                                                    int per_class_count) {
    PerClassAccuracy a;
    for (int c = 0; c < kNumClasses; ++c) {
        a.count[static_cast<std::size_t>(c)] = per_class_count;
        a.correct[static_cast<std::size_t>(c)] =
            static_cast<int>(std::llround(percents[static_cast<std::size_t>(c)] / 100.0 * per_class_count));
    }
    return a;
}

PerClassAccuracy per_class_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size())
        throw Error::data("per_class_accuracy: " + std::to_string(predictions.size()) + " predictions vs " +
                          std::to_string(labels.size()) + " labels");
    PerClassAccuracy a;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int label = labels[i];
        if (label < 0 || label >= kNumClasses)
            throw Error::data("per_class_accuracy: label " + std::to_string(label) + " out of range [0,10)");
        a.count[static_cast<std::size_t>(label)] += 1;
        if (predictions[i] == label) a.correct[static_cast<std::size_t>(label)] += 1;
    }
    return a;
}

double aggregate_report(const PerClassAccuracy& per_class) {
    double sum = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        if (!per_class.present(c))
            throw Error::data("aggregate_report: class " + std::to_string(c) + " (" +
                              sign_classes()[static_cast<std::size_t>(c)].name + ") absent from test set");
        sum += per_class.accuracy_percent(c);
    }
    return sum / kNumClasses;
}

RunReport make_run_report(const std::string& label, const PerClassAccuracy& per_class, std::uint64_t seed,
                          const std::string& config_hash, const std::string& test_hash, std::size_t train_size,
                          std::size_t test_size) {
    RunReport r;
    r.label = label;
    r.per_class = per_class;
    r.mean_accuracy = aggregate_report(per_class);
    r.seed = seed;
    r.config_hash = config_hash;
    r.test_hash = test_hash;
    r.train_size = train_size;
    r.test_size = test_size;
    return r;
}

std::string emit_csv(const RunReport& report) {
    std::ostringstream os;
    os << "class_id,accuracy_percent,count\n";
    long total = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        os << c << "," << format_fixed(report.per_class.accuracy_percent(c), 2) << ","
           << report.per_class.count[static_cast<std::size_t>(c)] << "\n";
        total += report.per_class.count[static_cast<std::size_t>(c)];
    }
    os << "mean," << format_fixed(report.mean_accuracy, 2) << "," << total << "\n";
    return os.str();
}

RunReport parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "class_id,accuracy_percent,count")
        throw Error::data("report csv: bad header");
    RunReport r;
    bool saw_mean = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string id_field, acc_field, count_field;
        if (!std::getline(ls, id_field, ',') || !std::getline(ls, acc_field, ',') || !std::getline(ls, count_field))
            throw Error::data("report csv: malformed row '" + line + "'");
        if (id_field == "mean") {
            r.mean_accuracy = std::stod(acc_field);
            saw_mean = true;
            continue;
        }
        const int c = std::stoi(id_field);
        if (c < 0 || c >= kNumClasses) throw Error::data("report csv: class " + id_field + " out of range");
        const double acc = std::stod(acc_field);
        const int count = std::stoi(count_field);
        r.per_class.count[static_cast<std::size_t>(c)] = count;
        r.per_class.correct[static_cast<std::size_t>(c)] = static_cast<int>(std::llround(acc / 100.0 * count));
    }
    if (!saw_mean) throw Error::data("report csv: missing mean row");
    return r;
}

void ComparisonTable::add(RunReport report) {
    if (!rows.empty() && rows.front().test_hash != report.test_hash)
        throw Error::data("comparison: run '" + report.label + "' was evaluated on test split " + report.test_hash +
                          " but the table uses " + rows.front().test_hash);
    rows.push_back(std::move(report));
}

std::string emit_plot_series(const ComparisonTable& comparison) {
    if (comparison.rows.empty()) throw Error::data("emit_plot_series: empty comparison");
    std::ostringstream os;
    for (const RunReport& r : comparison.rows) {
        os << r.label << " ";
        for (int c = 0; c < kNumClasses; ++c) {
            if (!r.per_class.present(c)) continue;
            os << "(" << c << "," << format_trimmed(r.per_class.accuracy_percent(c), 2) << ")";
        }
        os << "\n";
    }
    return os.str();
}

std::vector<std::pair<int, double>> parse_plot_series_line(const std::string& line) {
    std::vector<std::pair<int, double>> out;
    std::size_t pos = line.find('(');
    while (pos != std::string::npos) {
        const std::size_t comma = line.find(',', pos);
        const std::size_t close = line.find(')', pos);
        if (comma == std::string::npos || close == std::string::npos || comma > close)
            throw Error::data("plot series: malformed pair near '" + line.substr(pos, 8) + "'");
        out.emplace_back(std::stoi(line.substr(pos + 1, comma - pos - 1)),
                         std::stod(line.substr(comma + 1, close - comma - 1)));
        pos = line.find('(', close);
    }
    return out;
}

}  // namespace signet
