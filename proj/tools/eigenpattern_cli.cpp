// Command-line front end for the pattern-classification pipeline.
//
// Exit codes: 0 success, 2 validation/config error, 3 ingestion error,
// 4 numerical error, 5 I/O error, 6 model file format error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "eigenpattern/classify.hpp"
#include "eigenpattern/errors.hpp"
#include "eigenpattern/image.hpp"
#include "eigenpattern/metrics.hpp"
#include "eigenpattern/pipeline.hpp"
#include "eigenpattern/regime_map.hpp"
#include "eigenpattern/synth.hpp"

namespace ep = eigenpattern;
namespace fs = std::filesystem;

namespace {

struct CliOptions {
    ep::RunConfig config;
    std::string variant = "fft";
    std::string classifier = "knn";
    std::uint64_t per_class = 0;  // 0 = default (minimum class count)
    std::string format = "csv";
};

// Shared pipeline flags; every one of these can also come from a flat
// key=value config file passed with --config (flags win).
void add_config_flags(CLI::App* cmd, CliOptions& opt) {
    cmd->set_config("--config", "", "Flat key=value config file; flags override it");
    cmd->add_option("--variant", opt.variant, "Workflow variant: plain or fft")
        ->check(CLI::IsMember({"plain", "fft"}))
        ->capture_default_str();
    cmd->add_option("--target-rank", opt.config.target_rank, "rSVD target rank k")
        ->capture_default_str();
    cmd->add_option("--rank", opt.config.truncation_rank, "Truncation rank r")
        ->capture_default_str();
    cmd->add_option("--classifier", opt.classifier, "knn, tree, gnb, or lda")
        ->check(CLI::IsMember({"knn", "tree", "gnb", "lda"}))
        ->capture_default_str();
    cmd->add_option("--neighbors", opt.config.neighbors, "kNN neighbor count")
        ->capture_default_str();
    cmd->add_option("--max-depth", opt.config.max_depth, "Tree depth limit")->capture_default_str();
    cmd->add_option("--min-leaf", opt.config.min_leaf, "Tree minimum leaf size")
        ->capture_default_str();
    cmd->add_option("--oversampling", opt.config.oversampling, "rSVD oversampling")
        ->capture_default_str();
    cmd->add_option("--power-iterations", opt.config.power_iterations, "rSVD power iterations")
        ->capture_default_str();
    cmd->add_flag("--balance", opt.config.balance, "Undersample to equal class counts");
    cmd->add_option("--per-class", opt.per_class,
                    "Balanced images per class (default: minimum class count)");
    cmd->add_flag("--normalize", opt.config.normalize,
                  "Normalize reduced coordinates to zero mean, unit std");
    cmd->add_flag("--stratified", opt.config.stratified, "Stratify the train/test split by class");
    cmd->add_option("--train-fraction", opt.config.train_fraction, "Training fraction of the split")
        ->capture_default_str();
    cmd->add_option("--cycles", opt.config.cycles, "Number of training cycles")
        ->capture_default_str();
    cmd->add_option("--seed", opt.config.seed, "RNG seed")->capture_default_str();
}

ep::RunConfig resolve(const CliOptions& opt) {
    ep::RunConfig config = opt.config;
    config.variant = ep::variant_from_string(opt.variant);
    config.classifier = ep::classifier_from_string(opt.classifier);
    if (opt.per_class > 0) config.per_class = opt.per_class;
    config.validate();
    return config;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ep::IoError("cannot write " + path.string());
    out << text;
    if (!out) throw ep::IoError("write failed for " + path.string());
}

std::string aggregate_csv(const std::vector<ep::CycleResult>& cycles,
                          const ep::CycleAggregate& agg) {
    std::ostringstream out;
    out << "cycle,error_pct,accuracy_pct,recall_a_pct,recall_b_pct,recall_c_pct,sample_count\n";
    for (std::size_t i = 0; i < cycles.size(); ++i) {
        const auto& r = cycles[i].report;
        out << i << ',' << r.error << ',' << r.accuracy << ',' << r.recall_a << ',' << r.recall_b
            << ',' << r.recall_c << ',' << r.sample_count << '\n';
    }
    out << "mean," << agg.error.mean << ',' << agg.accuracy.mean << ',' << agg.recall_a.mean << ','
        << agg.recall_b.mean << ',' << agg.recall_c.mean << ",\n";
    out << "std," << agg.error.stddev << ',' << agg.accuracy.stddev << ',' << agg.recall_a.stddev
        << ',' << agg.recall_b.stddev << ',' << agg.recall_c.stddev << ",\n";
    return out.str();
}

int run(int argc, char** argv) {
    CLI::App app{"Reduced-order pattern classification of printed images"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic pattern dataset");
    fs::path gen_dir;
    fs::path gen_manifest;
    std::uint64_t gen_per_class = 100, gen_seed = 0;
    int gen_side = 64;
    std::vector<std::uint64_t> gen_counts;
    std::vector<double> gen_noise;
    gen->add_option("--out-dir", gen_dir, "Directory for generated images")->required();
    gen->add_option("--manifest", gen_manifest, "Manifest file to write")->required();
    gen->add_option("--per-class", gen_per_class, "Images per class")->capture_default_str();
    gen->add_option("--counts", gen_counts, "Explicit per-class counts A B C (overrides --per-class)")
        ->expected(3);
    gen->add_option("--noise", gen_noise, "Per-class noise amplitudes A B C")->expected(3);
    gen->add_option("--side", gen_side, "Image side length in pixels")->capture_default_str();
    gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();

    // fit
    CliOptions fit_opt;
    auto* fit = app.add_subcommand("fit", "Train a classifier and write the model file");
    fs::path fit_dir, fit_manifest, fit_model, fit_report;
    fit->add_option("--data-dir", fit_dir, "Image directory")->required();
    fit->add_option("--manifest", fit_manifest, "Dataset manifest")->required();
    fit->add_option("--out-model", fit_model, "Model file to write")->required();
    fit->add_option("--report", fit_report, "Per-cycle metrics report (CSV)");
    add_config_flags(fit, fit_opt);

    // sweep-r
    CliOptions sweep_opt;
    auto* sweep = app.add_subcommand("sweep-r", "Sweep the truncation rank for all classifiers");
    fs::path sweep_dir, sweep_manifest, sweep_out;
    int rank_min = 1, rank_max = 10;
    sweep->add_option("--data-dir", sweep_dir, "Image directory")->required();
    sweep->add_option("--manifest", sweep_manifest, "Dataset manifest")->required();
    sweep->add_option("--out", sweep_out, "CSV output file")->required();
    sweep->add_option("--rank-min", rank_min, "Lowest truncation rank")->capture_default_str();
    sweep->add_option("--rank-max", rank_max, "Highest truncation rank")->capture_default_str();
    add_config_flags(sweep, sweep_opt);

    // modes
    CliOptions modes_opt;
    auto* modes = app.add_subcommand("modes", "Export leading modes as grayscale images");
    fs::path modes_dir, modes_manifest, modes_out;
    int modes_count = 12;
    modes->add_option("--data-dir", modes_dir, "Image directory")->required();
    modes->add_option("--manifest", modes_manifest, "Dataset manifest")->required();
    modes->add_option("--out-dir", modes_out, "Directory for mode images")->required();
    modes->add_option("--count", modes_count, "Number of modes to export")->capture_default_str();
    add_config_flags(modes, modes_opt);

    // predict
    auto* predict = app.add_subcommand("predict", "Classify images with a trained model");
    fs::path pred_model, pred_dir, pred_manifest, pred_out, pred_metrics;
    predict->add_option("--model", pred_model, "Trained model file")->required();
    predict->add_option("--data-dir", pred_dir, "Image directory")->required();
    predict->add_option("--manifest", pred_manifest,
                        "Dataset manifest (omit to scan --data-dir for images)");
    predict->add_option("--out", pred_out, "CSV of file,predicted_class")->required();
    predict->add_option("--metrics-out", pred_metrics,
                        "Confusion-derived metrics vs manifest labels (CSV or JSON)");
    std::string pred_format = "csv";
    predict->add_option("--format", pred_format, "Metrics format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    // regime-map
    auto* regime = app.add_subcommand("regime-map", "Build a regime map from model predictions");
    fs::path reg_model, reg_dir, reg_manifest, reg_csv, reg_svg;
    std::string reg_experiment;
    regime->add_option("--model", reg_model, "Trained model file")->required();
    regime->add_option("--data-dir", reg_dir, "Image directory")->required();
    regime->add_option("--manifest", reg_manifest, "Dataset manifest")->required();
    regime->add_option("--experiment", reg_experiment, "Only use images of this experiment id");
    regime->add_option("--out-csv", reg_csv, "Regime map CSV output");
    regime->add_option("--out-svg", reg_svg, "Regime map SVG output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (gen->parsed()) {
        ep::DatasetGenOptions options;
        options.side = gen_side;
        options.seed = gen_seed;
        if (!gen_counts.empty()) {
            options.class_counts = {gen_counts[0], gen_counts[1], gen_counts[2]};
        } else {
            options.class_counts = {gen_per_class, gen_per_class, gen_per_class};
        }
        if (!gen_noise.empty()) options.noise_amplitude = {gen_noise[0], gen_noise[1], gen_noise[2]};
        options.phase_jitter = gen_side / 8.0;
        const auto ds = ep::gen_dataset(options);
        ep::save_dataset(ds, gen_dir, gen_manifest);
        const auto counts = ds.label_counts();
        std::cout << "generated " << ds.size() << " images (" << counts[0] << "/" << counts[1]
                  << "/" << counts[2] << ") in " << gen_dir.string() << "\n";
        return 0;
    }

    if (fit->parsed()) {
        const auto config = resolve(fit_opt);
        const auto ds = ep::load_dataset(fit_dir, fit_manifest);
        const auto result = ep::run_fit(config, ds);
        ep::save_model(result.model, fit_model);
        const std::string report = aggregate_csv(result.cycles, result.aggregate);
        if (!fit_report.empty()) write_text(fit_report, report);
        std::cout << report;
        std::cout << "model written to " << fit_model.string() << "\n";
        return 0;
    }

    if (sweep->parsed()) {
        const auto config = resolve(sweep_opt);
        const auto ds = ep::load_dataset(sweep_dir, sweep_manifest);
        const auto rows = ep::run_sweep(config, rank_min, rank_max, ds);
        write_text(sweep_out, ep::sweep_to_csv(rows));
        std::cout << "sweep written to " << sweep_out.string() << " (" << rows.size() << " rows)\n";
        return 0;
    }

    if (modes->parsed()) {
        const auto config = resolve(modes_opt);
        const auto ds = ep::load_dataset(modes_dir, modes_manifest);
        const auto files = ep::export_modes(config, ds, modes_out, modes_count);
        std::cout << "wrote " << files.size() << " mode images to " << modes_out.string() << "\n";
        return 0;
    }

    if (predict->parsed()) {
        const auto model = ep::load_model(pred_model);
        ep::PatternDataset ds;
        std::vector<std::string> names;
        bool labeled = !pred_manifest.empty();
        if (labeled) {
            ds = ep::load_dataset(pred_dir, pred_manifest);
            for (std::size_t i = 0; i < ds.size(); ++i) names.push_back("row_" + std::to_string(i + 2));
            // names come from the manifest order; re-read file column for output
            std::ifstream manifest(pred_manifest);
            std::string line;
            std::getline(manifest, line);
            std::size_t i = 0;
            while (std::getline(manifest, line) && i < names.size()) {
                if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
                names[i++] = line.substr(0, line.find(','));
            }
        } else {
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(pred_dir)) {
                if (entry.is_regular_file()) files.push_back(entry.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& file : files) {
                ep::RawImage raw = ep::read_netpbm(file);
                if (raw.width != raw.height) {
                    throw ep::IngestionError("image " + file.string() + " is not square");
                }
                ep::LabeledImage img;
                img.side = raw.width;
                img.pixels = ep::to_gray01(raw);
                ds.images.push_back(std::move(img));
                names.push_back(file.filename().string());
            }
            if (ds.images.empty()) throw ep::IngestionError("no images found in " + pred_dir.string());
        }

        const auto predictions = ep::predict_batch(model, ds);
        std::ostringstream out;
        out << "file,predicted_class\n";
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            out << names[i] << ',' << ep::class_letter(predictions[i]) << '\n';
        }
        write_text(pred_out, out.str());

        if (labeled && !pred_metrics.empty()) {
            std::vector<ep::PatternClass> truth;
            for (const auto& img : ds.images) truth.push_back(img.label);
            const auto report = ep::compute_metrics(ep::accumulate(truth, predictions));
            write_text(pred_metrics, pred_format == "json" ? ep::report_to_json(report)
                                                           : ep::report_to_csv(report));
        }
        std::cout << "predictions written to " << pred_out.string() << "\n";
        return 0;
    }

    if (regime->parsed()) {
        const auto model = ep::load_model(reg_model);
        const auto ds = ep::load_dataset(reg_dir, reg_manifest);
        std::vector<std::pair<ep::ImageMeta, ep::PatternClass>> predictions;
        ep::PatternDataset filtered;
        for (const auto& img : ds.images) {
            if (reg_experiment.empty() || img.meta.experiment == reg_experiment) {
                filtered.images.push_back(img);
            }
        }
        if (filtered.images.empty()) {
            throw ep::ValidationError("regime-map: no images match experiment '" + reg_experiment +
                                      "'");
        }
        const auto classes = ep::predict_batch(model, filtered);
        for (std::size_t i = 0; i < classes.size(); ++i) {
            predictions.emplace_back(filtered.images[i].meta, classes[i]);
        }
        auto map = ep::build_regime_map(predictions);
        ep::extract_borders(map, [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; });
        if (!reg_csv.empty()) ep::export_regime_map_csv(map, reg_csv);
        if (!reg_svg.empty()) ep::export_regime_map_svg(map, reg_svg);
        std::cout << "regime map: " << map.velocities.size() << " velocities x "
                  << map.tonal_values.size() << " tonal values, " << map.lower_border.size()
                  << " lower / " << map.upper_border.size() << " upper breakpoints\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ep::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ep::DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ep::IngestionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ep::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ep::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const ep::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 6;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
