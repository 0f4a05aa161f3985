#include "eigenpattern/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <map>
#include <sstream>

#include "eigenpattern/errors.hpp"
#include "eigenpattern/fft.hpp"
#include "eigenpattern/image.hpp"

namespace eigenpattern {

std::string to_string(Variant v) { return v == Variant::Fft ? "fft" : "plain"; }

std::string to_string(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::Knn: return "knn";
        case ClassifierKind::Tree: return "tree";
        case ClassifierKind::Gnb: return "gnb";
        default: return "lda";
    }
}

Variant variant_from_string(const std::string& s) {
    if (s == "plain") return Variant::Plain;
    if (s == "fft") return Variant::Fft;
    throw ValidationError("unknown variant '" + s + "' (expected plain or fft)");
}

ClassifierKind classifier_from_string(const std::string& s) {
    if (s == "knn") return ClassifierKind::Knn;
    if (s == "tree") return ClassifierKind::Tree;
    if (s == "gnb") return ClassifierKind::Gnb;
    if (s == "lda") return ClassifierKind::Lda;
    throw ValidationError("unknown classifier '" + s + "' (expected knn, tree, gnb, or lda)");
}

void RunConfig::validate() const {
    if (target_rank < 1) throw ValidationError("config: target rank must be >= 1");
    if (truncation_rank < 1 || truncation_rank > target_rank) {
        throw ValidationError("config: truncation rank " + std::to_string(truncation_rank) +
                              " must be in [1, target rank " + std::to_string(target_rank) + "]");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValidationError("config: train fraction must be in (0,1)");
    }
    if (cycles < 1) throw ValidationError("config: cycles must be >= 1");
    if (neighbors < 1) throw ValidationError("config: neighbor count must be >= 1");
    if (max_depth < 1 || min_leaf < 1) throw ValidationError("config: invalid tree parameters");
    if (oversampling < 0 || power_iterations < 0) {
        throw ValidationError("config: invalid rSVD parameters");
    }
}

std::string dataset_digest(const PatternDataset& ds) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    auto feed = [&hash](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            hash ^= p[i];
            hash *= 0x100000001b3ull;
        }
    };
    for (const auto& img : ds.images) {
        feed(&img.side, sizeof(img.side));
        const int label = static_cast<int>(img.label);
        feed(&label, sizeof(label));
        feed(img.pixels.data(), img.pixels.size() * sizeof(double));
    }
    std::ostringstream out;
    out << std::hex << hash;
    return out.str();
}

namespace {

DenseMatrix variant_matrix(const PatternDataset& ds, Variant variant) {
    return variant == Variant::Fft ? fft_magnitude(ds) : to_data_matrix(ds);
}

std::vector<PatternClass> labels_of(const PatternDataset& ds) {
    std::vector<PatternClass> labels(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) labels[i] = ds.images[i].label;
    return labels;
}

TrainedModel fit_classifier(const RunConfig& config, ClassifierKind kind, const FeatureMatrix& f) {
    switch (kind) {
        case ClassifierKind::Knn: return fit_knn(f, config.neighbors);
        case ClassifierKind::Tree: return fit_tree(f, config.max_depth, config.min_leaf);
        case ClassifierKind::Gnb: return fit_gnb(f);
        default: return fit_lda(f);
    }
}

CycleResult evaluate(const TrainedModel& model, const DenseMatrix& test_coords,
                     const std::vector<PatternClass>& test_labels) {
    std::vector<PatternClass> pred(test_labels.size());
    for (std::size_t i = 0; i < test_labels.size(); ++i) {
        pred[i] = predict_coords(model, test_coords.col(static_cast<Eigen::Index>(i)));
    }
    CycleResult result;
    result.confusion = accumulate(test_labels, pred);
    result.report = compute_metrics(result.confusion);
    return result;
}

}  // namespace

FitResult run_fit(const RunConfig& config, const PatternDataset& ds) {
    config.validate();
    const PatternDataset work =
        config.balance ? balance(ds, config.seed, config.per_class) : ds;
    const std::string digest = dataset_digest(work);

    FitResult result;
    std::vector<MetricsReport> reports;
    for (int cycle = 0; cycle < config.cycles; ++cycle) {
        const std::uint64_t cycle_seed = config.seed + static_cast<std::uint64_t>(cycle);
        auto [train, test] =
            train_test_split(work, config.train_fraction, cycle_seed, config.stratified);

        const DenseMatrix x_train = variant_matrix(train, config.variant);
        const auto fac = randomized_svd(x_train, config.target_rank, config.oversampling,
                                        config.power_iterations, cycle_seed);
        const auto reduced = truncate_and_project(fac, x_train, config.truncation_rank);

        FeatureMatrix features;
        features.labels = labels_of(train);
        std::optional<NormalizationStats> stats;
        if (config.normalize) {
            stats = fit_normalization(reduced.coords);
            features.values = apply_normalization(*stats, reduced.coords);
        } else {
            features.values = reduced.coords;
        }

        TrainedModel model = fit_classifier(config, config.classifier, features);
        model.preprocessing.use_fft = config.variant == Variant::Fft;
        model.preprocessing.normalization = stats;
        model.basis = reduced.basis;
        model.provenance = {config.seed, config.target_rank, config.truncation_rank, digest};

        const DenseMatrix x_test = variant_matrix(test, config.variant);
        const DenseMatrix test_coords = reduced.basis.transpose() * x_test;
        CycleResult cr = evaluate(model, test_coords, labels_of(test));
        reports.push_back(cr.report);
        result.cycles.push_back(std::move(cr));
        if (cycle == 0) result.model = std::move(model);
    }
    result.aggregate = aggregate_cycles(reports);
    return result;
}

std::vector<SweepRow> run_sweep(const RunConfig& config, int rank_min, int rank_max,
                                const PatternDataset& ds) {
    config.validate();
    if (rank_min < 1 || rank_max < rank_min || rank_max > config.target_rank) {
        throw ValidationError("sweep: rank range [" + std::to_string(rank_min) + ", " +
                              std::to_string(rank_max) + "] invalid for target rank " +
                              std::to_string(config.target_rank));
    }
    const PatternDataset work =
        config.balance ? balance(ds, config.seed, config.per_class) : ds;

    static constexpr ClassifierKind kKinds[] = {ClassifierKind::Knn, ClassifierKind::Tree,
                                                ClassifierKind::Gnb, ClassifierKind::Lda};
    // reports[rank][classifier] across cycles
    std::map<std::pair<int, int>, std::vector<MetricsReport>> reports;

    for (int cycle = 0; cycle < config.cycles; ++cycle) {
        const std::uint64_t cycle_seed = config.seed + static_cast<std::uint64_t>(cycle);
        auto [train, test] =
            train_test_split(work, config.train_fraction, cycle_seed, config.stratified);
        const DenseMatrix x_train = variant_matrix(train, config.variant);
        const DenseMatrix x_test = variant_matrix(test, config.variant);
        const auto fac = randomized_svd(x_train, config.target_rank, config.oversampling,
                                        config.power_iterations, cycle_seed);
        const auto train_labels = labels_of(train);
        const auto test_labels = labels_of(test);

        for (int r = rank_min; r <= rank_max; ++r) {
            const auto reduced = truncate_and_project(fac, x_train, r);
            FeatureMatrix features;
            features.labels = train_labels;
            std::optional<NormalizationStats> stats;
            if (config.normalize) {
                stats = fit_normalization(reduced.coords);
                features.values = apply_normalization(*stats, reduced.coords);
            } else {
                features.values = reduced.coords;
            }
            const DenseMatrix test_coords = reduced.basis.transpose() * x_test;
            for (int k = 0; k < 4; ++k) {
                TrainedModel model = fit_classifier(config, kKinds[k], features);
                model.preprocessing.normalization = stats;
                reports[{r, k}].push_back(evaluate(model, test_coords, test_labels).report);
            }
        }
    }

    std::vector<SweepRow> rows;
    for (int r = rank_min; r <= rank_max; ++r) {
        for (int k = 0; k < 4; ++k) {
            SweepRow row;
            row.rank = r;
            row.classifier = kKinds[k];
            row.aggregate = aggregate_cycles(reports.at({r, k}));
            rows.push_back(row);
        }
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "rank,classifier,mean_error_pct,std_error_pct,mean_recall_a_pct,mean_recall_b_pct,"
           "mean_recall_c_pct,cycles\n";
    for (const auto& row : rows) {
        out << row.rank << ',' << to_string(row.classifier) << ',' << row.aggregate.error.mean
            << ',' << row.aggregate.error.stddev << ',' << row.aggregate.recall_a.mean << ','
            << row.aggregate.recall_b.mean << ',' << row.aggregate.recall_c.mean << ','
            << row.aggregate.cycle_count << '\n';
    }
    return out.str();
}

std::vector<double> render_mode(const Vector& mode, int side, Variant variant) {
    if (mode.size() != static_cast<Eigen::Index>(side) * side) {
        throw DimensionError("render_mode: mode length does not match image side");
    }
    if (variant == Variant::Plain) {
        return {mode.data(), mode.data() + mode.size()};
    }
    // FFT-variant mode entries are magnitudes per frequency bin; rebuild a
    // spatial image as the magnitude of the inverse DFT with phase zero.
    std::vector<std::complex<double>> spectrum(mode.size());
    for (Eigen::Index i = 0; i < mode.size(); ++i) spectrum[i] = mode[i];
    Dft2D dft(side);
    auto spatial = dft.inverse(spectrum);
    std::vector<double> out(spatial.size());
    for (std::size_t i = 0; i < spatial.size(); ++i) out[i] = std::abs(spatial[i]);
    return out;
}

std::vector<std::filesystem::path> export_modes(const RunConfig& config, const PatternDataset& ds,
                                                const std::filesystem::path& out_dir, int count) {
    config.validate();
    if (count < 1) throw ValidationError("export_modes: count must be >= 1");
    if (count > config.target_rank) {
        throw ValidationError("export_modes: count exceeds target rank");
    }
    const DenseMatrix x = variant_matrix(ds, config.variant);
    const auto fac = randomized_svd(x, config.target_rank, config.oversampling,
                                    config.power_iterations, config.seed);
    std::filesystem::create_directories(out_dir);

    std::vector<std::filesystem::path> files;
    const int side = ds.side();
    for (int i = 0; i < count; ++i) {
        auto rendered = render_mode(fac.u.col(i), side, config.variant);
        const auto [lo_it, hi_it] = std::minmax_element(rendered.begin(), rendered.end());
        const double lo = *lo_it, hi = *hi_it;
        if (hi > lo) {
            for (auto& v : rendered) v = (v - lo) / (hi - lo);
        } else {
            for (auto& v : rendered) v = 0.5;  // constant mode
        }
        char name[32];
        std::snprintf(name, sizeof(name), "mode_%02d.pgm", i + 1);
        const auto file = out_dir / name;
        write_pgm(file, side, side, rendered);
        files.push_back(file);
    }
    return files;
}

}  // namespace eigenpattern
