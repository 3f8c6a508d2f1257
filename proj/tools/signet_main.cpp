// signet: desk-scale traffic-sign pipeline driver.
//
// Subcommands map one-to-one to library stages: ingest, augment, gan-train,
// gan-sample, clf-train, clf-finetune, evaluate, report. Every run writes the
// fully resolved configuration and its hash into the output directory so the
// run can be replayed byte-for-byte.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "signet/augment.hpp"
#include "signet/classifier.hpp"
#include "signet/dataset.hpp"
#include "signet/error.hpp"
#include "signet/gan.hpp"
#include "signet/image.hpp"
#include "signet/report.hpp"
#include "signet/snf.hpp"
#include "signet/util.hpp"

namespace fs = std::filesystem;
using namespace signet;

namespace {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string resolve_out_dir(const std::string& out_flag, const std::string& subcommand) {
    if (!out_flag.empty()) return out_flag;
    const char* root = std::getenv("SIGNET_OUT_DIR");
    return (fs::path(root ? root : "runs") / subcommand).string();
}

// Writes config.resolved and config.hash; returns the hash.
std::string snapshot_config(const std::string& out_dir, const std::string& subcommand, const KeyValues& values) {
    fs::create_directories(out_dir);
    std::ostringstream os;
    os << "[" << subcommand << "]\n";
    for (const auto& [k, v] : values) os << k << " = " << v << "\n";
    const std::string text = os.str();
    const std::string hash = hex64(fnv1a64(text));
    write_text_file((fs::path(out_dir) / "config.resolved").string(), text);
    write_text_file((fs::path(out_dir) / "config.hash").string(), hash + "\n");
    return hash;
}

std::string file_hash(const std::string& path) {
    const auto bytes = read_file(path);
    return hex64(fnv1a64(bytes.data(), bytes.size()));
}

KeyValues read_meta(const std::string& path) {
    KeyValues kv;
    std::istringstream in(read_text_file(path));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.pop_back();
        };
        trim(key);
        trim(value);
        kv.emplace_back(key, value);
    }
    return kv;
}

std::string meta_get(const KeyValues& kv, const std::string& key) {
    for (const auto& [k, v] : kv)
        if (k == key) return v;
    throw Error::data("missing key '" + key + "' in run metadata");
}

void check_heights(int input_height, int output_height) {
    if (input_height != kImageSize || output_height != kImageSize)
        throw Error::usage("unsupported size: this pipeline is fixed at 28x28 (got input_height=" +
                           std::to_string(input_height) + ", output_height=" + std::to_string(output_height) + ")");
}

// --- subcommand bodies -------------------------------------------------------

struct IngestArgs {
    std::string input, out;
    double test_fraction = 0.1;
    std::uint64_t seed = 1;
};

int run_ingest(const IngestArgs& a) {
    const std::string out = resolve_out_dir(a.out, "ingest");
    snapshot_config(out, "ingest",
                    {{"input", a.input}, {"test_fraction", format_trimmed(a.test_fraction, 6)}, {"seed", std::to_string(a.seed)}});

    Dataset all;
    for (int c = 0; c < kNumClasses; ++c) {
        const fs::path class_dir = fs::path(a.input) / std::to_string(c);
        if (!fs::is_directory(class_dir)) continue;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(class_dir))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            const auto bytes = read_file(file.string());
            LabeledImage img;
            img.pixels = preprocess(decode_image_auto(bytes));
            img.class_id = static_cast<std::uint8_t>(c);
            img.source_tag = std::to_string(c) + "/" + file.filename().string();
            all.push_back(std::move(img));
        }
    }
    if (all.empty()) throw Error::data("ingest: no images found under " + a.input + " (expected <root>/<class_id>/*)");

    const DatasetSplit split = split_dataset(all, a.test_fraction, a.seed);
    save_snf((fs::path(out) / "train.snf").string(), split.train);
    save_snf((fs::path(out) / "test.snf").string(), split.test);
    std::cout << "ingest: " << all.size() << " images -> " << split.train.size() << " train / " << split.test.size()
              << " test\n";
    std::cout << "train.snf test.snf written to " << out << "\n";
    return 0;
}

struct AugmentArgs {
    std::string in, out, policy_file;
    int multiplier = 2;
    std::uint64_t seed = 1;
};

int run_augment(const AugmentArgs& a) {
    const std::string out = resolve_out_dir(a.out, "augment");
    snapshot_config(out, "augment",
                    {{"in", a.in},
                     {"multiplier", std::to_string(a.multiplier)},
                     {"seed", std::to_string(a.seed)},
                     {"policy", a.policy_file.empty() ? "<default>" : a.policy_file}});

    AugmentPlan plan;
    plan.multiplier = a.multiplier;
    plan.seed = a.seed;
    plan.policy = a.policy_file.empty() ? ClassPolicy::defaults() : ClassPolicy::from_text(read_text_file(a.policy_file));

    const Dataset input = load_snf(a.in);
    std::vector<EmissionRecord> log;
    const Dataset augmented = build_augmented_dataset(input, plan, &log);
    save_snf((fs::path(out) / "augmented.snf").string(), augmented);
    write_text_file((fs::path(out) / "emission.log").string(), emission_log_text(log));
    write_text_file((fs::path(out) / "policy.txt").string(), plan.policy.to_text());
    std::cout << "augment: " << input.size() << " -> " << augmented.size() << " images (" << log.size()
              << " variants logged) in " << out << "\n";
    return 0;
}

struct GanTrainArgs {
    std::string dataset_name, in_file, data_root = ".", out;
    int class_id = -1;
    GanConfig config;
    int input_height = 28, output_height = 28;
    bool train_flag = false;
};

int run_gan_train(const GanTrainArgs& a) {
    check_heights(a.input_height, a.output_height);
    std::string in_path = a.in_file;
    if (in_path.empty()) {
        if (a.dataset_name.empty()) throw Error::usage("gan-train: provide --dataset <name> or --in <file.snf>");
        in_path = (fs::path(a.data_root) / (a.dataset_name + ".snf")).string();
    }
    const std::string out = resolve_out_dir(a.out, "gan-train");
    snapshot_config(out, "gan-train",
                    {{"dataset", a.dataset_name.empty() ? in_path : a.dataset_name},
                     {"class_id", a.class_id < 0 ? "all" : std::to_string(a.class_id)},
                     {"latent_dim", std::to_string(a.config.latent_dim)},
                     {"epochs", std::to_string(a.config.epochs)},
                     {"batch_size", std::to_string(a.config.batch_size)},
                     {"learning_rate", format_trimmed(a.config.learning_rate, 6)},
                     {"leaky_alpha", format_trimmed(a.config.leaky_alpha, 4)},
                     {"seed", std::to_string(a.config.seed)},
                     {"input_height", std::to_string(a.input_height)},
                     {"output_height", std::to_string(a.output_height)}});

    const Dataset all = load_snf(in_path);
    const auto histogram = class_histogram(all);

    std::vector<int> classes;
    if (a.class_id >= 0) {
        classes.push_back(a.class_id);
    } else {
        for (int c = 0; c < kNumClasses; ++c)
            if (histogram[static_cast<std::size_t>(c)] > 0) classes.push_back(c);
    }
    if (classes.empty()) throw Error::data("gan-train: dataset has no images");

    for (int c : classes) {
        Dataset slice;
        for (const auto& img : all)
            if (img.class_id == c) slice.push_back(img);
        GanConfig config = a.config;
        config.class_id = c;
        config.seed = Rng::mix(a.config.seed, static_cast<std::uint64_t>(c));
        const std::string cp_path = (fs::path(out) / ("gan_c" + std::to_string(c) + ".ganc")).string();
        std::cout << "gan-train: class " << c << " on " << slice.size() << " images, " << config.epochs
                  << " epochs\n";
        const GanCheckpoint cp = train_gan(slice, config, [&](const GanCheckpoint& snap) {
            save_gan_checkpoint(cp_path, snap);
            const auto& [d_loss, g_loss] = snap.loss_history.back();
            std::cout << "  epoch " << snap.epochs_completed << "/" << config.epochs << "  d_loss "
                      << format_fixed(d_loss, 4) << "  g_loss " << format_fixed(g_loss, 4) << "\n";
        });
        save_gan_checkpoint(cp_path, cp);
        write_text_file((fs::path(out) / ("loss_history_c" + std::to_string(c) + ".csv")).string(),
                        loss_history_csv(cp));
    }
    return 0;
}

struct GanSampleArgs {
    std::string checkpoints_dir, out;
    std::vector<std::string> checkpoint_files;
    int count_per_class = 100;
    std::uint64_t seed = 1;
};

int run_gan_sample(const GanSampleArgs& a) {
    const std::string out = resolve_out_dir(a.out, "gan-sample");
    std::vector<std::string> files = a.checkpoint_files;
    if (!a.checkpoints_dir.empty()) {
        for (const auto& entry : fs::directory_iterator(a.checkpoints_dir))
            if (entry.path().extension() == ".ganc") files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
    }
    if (files.empty()) throw Error::usage("gan-sample: no checkpoints given (--checkpoints <dir> or --checkpoint <file>)");
    snapshot_config(out, "gan-sample",
                    {{"checkpoints", std::to_string(files.size())},
                     {"count_per_class", std::to_string(a.count_per_class)},
                     {"seed", std::to_string(a.seed)}});

    std::vector<GanCheckpoint> loaded;
    loaded.reserve(files.size());
    for (const auto& f : files) loaded.push_back(load_gan_checkpoint(f));
    std::vector<const GanCheckpoint*> ptrs;
    for (const auto& cp : loaded) ptrs.push_back(&cp);

    const Dataset synthetic = synthesize_labeled_set(ptrs, a.count_per_class, a.seed);
    save_snf((fs::path(out) / "synthetic.snf").string(), synthetic);
    std::cout << "gan-sample: " << synthetic.size() << " synthetic images from " << files.size()
              << " checkpoints -> " << out << "/synthetic.snf\n";
    return 0;
}

struct ClfTrainArgs {
    std::string train_file, out, checkpoint;  // checkpoint only for finetune
    TrainConfig config;
    bool finetune = false;
};

int run_clf_train(const ClfTrainArgs& a) {
    const std::string sub = a.finetune ? "clf-finetune" : "clf-train";
    const std::string out = resolve_out_dir(a.out, sub);
    snapshot_config(out, sub,
                    {{"train", a.train_file},
                     {"checkpoint", a.checkpoint.empty() ? "<none>" : a.checkpoint},
                     {"learning_rate", format_trimmed(a.config.learning_rate, 7)},
                     {"epochs", std::to_string(a.config.epochs)},
                     {"batch_size", std::to_string(a.config.batch_size)},
                     {"seed", std::to_string(a.config.seed)},
                     {"lambda1", format_trimmed(a.config.lambda1, 7)},
                     {"lambda2", format_trimmed(a.config.lambda2, 7)}});

    const Dataset train_set = load_snf(a.train_file);
    ClfCheckpoint result;
    if (a.finetune) {
        if (a.checkpoint.empty()) throw Error::usage("clf-finetune: --checkpoint is required");
        const ClfCheckpoint start = load_clf_checkpoint(a.checkpoint);
        result = train_classifier(start, train_set, a.config);
    } else {
        result = train_classifier(build_classifier(a.config.seed), train_set, a.config);
    }
    save_clf_checkpoint((fs::path(out) / "classifier.clfc").string(), result);
    write_text_file((fs::path(out) / "loss_curve.csv").string(), loss_curve_csv(result));
    const double first = result.loss_curve.empty() ? 0.0 : result.loss_curve.front();
    const double last = result.loss_curve.empty() ? 0.0 : result.loss_curve.back();
    std::cout << sub << ": " << train_set.size() << " images, " << result.epochs_completed << " epochs, loss "
              << format_fixed(first, 4) << " -> " << format_fixed(last, 4) << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string checkpoint, test_file, label = "run", out;
};

int run_evaluate(const EvaluateArgs& a) {
    const std::string out = resolve_out_dir(a.out, "evaluate");
    const std::string config_hash = snapshot_config(
        out, "evaluate", {{"checkpoint", a.checkpoint}, {"test", a.test_file}, {"label", a.label}});

    const ClfCheckpoint cp = load_clf_checkpoint(a.checkpoint);
    const Dataset test_set = load_snf(a.test_file);
    const Predictions preds = predict_batch(cp, test_set);
    std::vector<int> labels;
    labels.reserve(test_set.size());
    for (const auto& img : test_set) labels.push_back(img.class_id);

    const PerClassAccuracy acc = per_class_accuracy(preds.class_ids, labels);
    const RunReport report = make_run_report(a.label, acc, cp.config.seed, config_hash, file_hash(a.test_file),
                                             0, test_set.size());
    write_text_file((fs::path(out) / "report.csv").string(), emit_csv(report));
    std::ostringstream meta;
    meta << "label = " << report.label << "\n"
         << "seed = " << report.seed << "\n"
         << "config_hash = " << report.config_hash << "\n"
         << "test_hash = " << report.test_hash << "\n"
         << "test_size = " << report.test_size << "\n"
         << "mean_accuracy = " << format_fixed(report.mean_accuracy, 2) << "\n";
    write_text_file((fs::path(out) / "report.meta").string(), meta.str());
    std::cout << "evaluate: mean accuracy " << format_fixed(report.mean_accuracy, 2) << "% over "
              << test_set.size() << " test images -> " << out << "/report.csv\n";
    return 0;
}

struct ReportArgs {
    std::vector<std::string> run_dirs;
    std::string out;
};

int run_report(const ReportArgs& a) {
    const std::string out = resolve_out_dir(a.out, "report");
    KeyValues cfg;
    for (const auto& d : a.run_dirs) cfg.emplace_back("run", d);
    snapshot_config(out, "report", cfg);

    ComparisonTable table;
    for (const auto& dir : a.run_dirs) {
        RunReport r = parse_report_csv(read_text_file((fs::path(dir) / "report.csv").string()));
        const KeyValues meta = read_meta((fs::path(dir) / "report.meta").string());
        r.label = meta_get(meta, "label");
        r.test_hash = meta_get(meta, "test_hash");
        r.config_hash = meta_get(meta, "config_hash");
        r.mean_accuracy = aggregate_report(r.per_class);
        table.add(std::move(r));
    }

    std::ostringstream csv;
    csv << "label,mean_accuracy";
    for (int c = 0; c < kNumClasses; ++c) csv << ",class_" << c;
    csv << "\n";
    for (const auto& row : table.rows) {
        csv << row.label << "," << format_fixed(row.mean_accuracy, 2);
        for (int c = 0; c < kNumClasses; ++c) csv << "," << format_fixed(row.per_class.accuracy_percent(c), 2);
        csv << "\n";
    }
    write_text_file((fs::path(out) / "comparison.csv").string(), csv.str());
    write_text_file((fs::path(out) / "plot_series.txt").string(), emit_plot_series(table));
    std::cout << "report: " << table.rows.size() << " runs -> " << out << "/comparison.csv\n";
    for (const auto& row : table.rows)
        std::cout << "  " << row.label << ": " << format_fixed(row.mean_accuracy, 2) << "%\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"signet: GAN-extended traffic-sign classification pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI configuration file ([subcommand] sections, key = value)");

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "Decode an image tree into canonical train/test SNF datasets");
    ingest->add_option("--input", ingest_args.input, "Directory laid out as <root>/<class_id>/<images>")->required();
    ingest->add_option("--out", ingest_args.out, "Output directory");
    ingest->add_option("--test-fraction", ingest_args.test_fraction, "Held-out test fraction");
    ingest->add_option("--seed", ingest_args.seed, "Split seed");

    AugmentArgs augment_args;
    auto* augment_cmd = app.add_subcommand("augment", "Expand an SNF dataset with policy-safe classical augmentation");
    augment_cmd->add_option("--in", augment_args.in, "Input SNF dataset")->required();
    augment_cmd->add_option("--out", augment_args.out, "Output directory");
    augment_cmd->add_option("--multiplier", augment_args.multiplier, "Augmented copies per source image");
    augment_cmd->add_option("--seed", augment_args.seed, "Sampling seed");
    augment_cmd->add_option("--policy", augment_args.policy_file, "Class policy override file");

    GanTrainArgs gan_args;
    auto* gan_train = app.add_subcommand("gan-train", "Train one DCGAN per class on an SNF dataset");
    gan_train->add_option("--dataset", gan_args.dataset_name, "Dataset name, resolved as <data-root>/<name>.snf");
    gan_train->add_option("--in", gan_args.in_file, "Explicit SNF path (alternative to --dataset)");
    gan_train->add_option("--data-root", gan_args.data_root, "Directory containing named datasets");
    gan_train->add_option("--class-id", gan_args.class_id, "Train only this class (default: every class present)");
    gan_train->add_option("--epochs", gan_args.config.epochs, "Training epochs");
    gan_train->add_option("--batch-size", gan_args.config.batch_size, "Batch size (last partial batch is dropped)");
    gan_train->add_option("--learning-rate", gan_args.config.learning_rate, "Adam learning rate");
    gan_train->add_option("--latent-dim", gan_args.config.latent_dim, "Latent dimension");
    gan_train->add_option("--leaky-alpha", gan_args.config.leaky_alpha, "Discriminator LeakyReLU slope");
    gan_train->add_option("--seed", gan_args.config.seed, "Training seed");
    gan_train->add_option("--input_height", gan_args.input_height, "Input image height (must be 28)");
    gan_train->add_option("--output_height", gan_args.output_height, "Output image height (must be 28)");
    gan_train->add_flag("--train", gan_args.train_flag, "Run training (accepted for script compatibility)");
    gan_train->add_option("--out", gan_args.out, "Output directory");

    GanSampleArgs sample_args;
    auto* gan_sample = app.add_subcommand("gan-sample", "Synthesize a labeled SNF dataset from GAN checkpoints");
    gan_sample->add_option("--checkpoints", sample_args.checkpoints_dir, "Directory of .ganc checkpoints");
    gan_sample->add_option("--checkpoint", sample_args.checkpoint_files, "Individual checkpoint file (repeatable)");
    gan_sample->add_option("--count-per-class", sample_args.count_per_class, "Samples per class");
    gan_sample->add_option("--seed", sample_args.seed, "Sampling seed");
    gan_sample->add_option("--out", sample_args.out, "Output directory");

    ClfTrainArgs clf_args;
    clf_args.config = TrainConfig::pretrain_defaults();
    auto* clf_train = app.add_subcommand("clf-train", "Pretrain the classifier on an SNF dataset");
    clf_train->add_option("--train", clf_args.train_file, "Training SNF dataset")->required();
    clf_train->add_option("--epochs", clf_args.config.epochs, "Training epochs");
    clf_train->add_option("--batch-size", clf_args.config.batch_size, "Batch size");
    clf_train->add_option("--learning-rate", clf_args.config.learning_rate, "Adam learning rate");
    clf_train->add_option("--seed", clf_args.config.seed, "Training seed");
    clf_train->add_option("--lambda1", clf_args.config.lambda1, "Elastic-net L1 weight");
    clf_train->add_option("--lambda2", clf_args.config.lambda2, "Elastic-net L2 weight");
    clf_train->add_option("--out", clf_args.out, "Output directory");

    ClfTrainArgs ft_args;
    ft_args.config = TrainConfig::finetune_defaults();
    ft_args.finetune = true;
    auto* clf_finetune = app.add_subcommand("clf-finetune", "Fine-tune a classifier checkpoint at a reduced rate");
    clf_finetune->add_option("--checkpoint", ft_args.checkpoint, "Pretrained .clfc checkpoint")->required();
    clf_finetune->add_option("--train", ft_args.train_file, "Training SNF dataset (typically extended)")->required();
    clf_finetune->add_option("--epochs", ft_args.config.epochs, "Training epochs");
    clf_finetune->add_option("--batch-size", ft_args.config.batch_size, "Batch size");
    clf_finetune->add_option("--learning-rate", ft_args.config.learning_rate, "Fine-tune learning rate");
    clf_finetune->add_option("--seed", ft_args.config.seed, "Training seed");
    clf_finetune->add_option("--lambda1", ft_args.config.lambda1, "Elastic-net L1 weight");
    clf_finetune->add_option("--lambda2", ft_args.config.lambda2, "Elastic-net L2 weight");
    clf_finetune->add_option("--out", ft_args.out, "Output directory");

    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "Score a classifier checkpoint on a test SNF dataset");
    evaluate->add_option("--checkpoint", eval_args.checkpoint, "Classifier .clfc checkpoint")->required();
    evaluate->add_option("--test", eval_args.test_file, "Test SNF dataset")->required();
    evaluate->add_option("--label", eval_args.label, "Run label used in comparisons");
    evaluate->add_option("--out", eval_args.out, "Output directory");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Compare evaluation runs sharing one test split");
    report->add_option("--runs", report_args.run_dirs, "Evaluation output directories")->required()->expected(-1);
    report->add_option("--out", report_args.out, "Output directory");

    try {
        app.parse(argc, argv);
        if (ingest->parsed()) return run_ingest(ingest_args);
        if (augment_cmd->parsed()) return run_augment(augment_args);
        if (gan_train->parsed()) return run_gan_train(gan_args);
        if (gan_sample->parsed()) return run_gan_sample(sample_args);
        if (clf_train->parsed()) return run_clf_train(clf_args);
        if (clf_finetune->parsed()) return run_clf_train(ft_args);
        if (evaluate->parsed()) return run_evaluate(eval_args);
        if (report->parsed()) return run_report(report_args);
        throw Error::usage("no subcommand given");
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case Error::Kind::usage: return 1;
            case Error::Kind::data: return 2;
            case Error::Kind::numeric: return 3;
        }
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
