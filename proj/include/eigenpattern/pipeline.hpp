#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eigenpattern/classify.hpp"
#include "eigenpattern/dataset.hpp"
#include "eigenpattern/metrics.hpp"

namespace eigenpattern {

enum class Variant { Plain, Fft };
enum class ClassifierKind { Knn, Tree, Gnb, Lda };

std::string to_string(Variant v);
std::string to_string(ClassifierKind k);
Variant variant_from_string(const std::string& s);
ClassifierKind classifier_from_string(const std::string& s);

// One training run: ingest -> (balance) -> split -> (fft) -> rSVD ->
// truncate/project -> (normalize) -> fit, repeated over cycles with
// different splits. Defaults follow the best-performing setting: FFT
// variant, target rank 50, truncation rank 7, 1-NN, unbalanced,
// non-normalized, 80/20 split, five cycles.
struct RunConfig {
    Variant variant = Variant::Fft;
    int target_rank = 50;
    int truncation_rank = 7;
    ClassifierKind classifier = ClassifierKind::Knn;
    int neighbors = 1;
    int max_depth = 32;
    int min_leaf = 1;
    int oversampling = 10;
    int power_iterations = 1;
    bool balance = false;
    std::optional<std::size_t> per_class;
    bool normalize = false;
    bool stratified = false;
    double train_fraction = 0.8;
    int cycles = 5;
    std::uint64_t seed = 0;

    void validate() const;  // throws ValidationError
};

struct CycleResult {
    ConfusionMatrix3 confusion;
    MetricsReport report;
};

struct FitResult {
    TrainedModel model;  // trained in the first cycle
    std::vector<CycleResult> cycles;
    CycleAggregate aggregate;
};

// FNV-1a over the dataset's pixel bytes and labels; recorded in model
// provenance.
std::string dataset_digest(const PatternDataset& ds);

FitResult run_fit(const RunConfig& config, const PatternDataset& ds);

struct SweepRow {
    int rank = 0;
    ClassifierKind classifier = ClassifierKind::Knn;
    CycleAggregate aggregate;
};

// Cycle-aggregated test metrics for every (truncation rank, classifier)
// combination. The rSVD is computed once per cycle at target_rank and
// re-truncated per rank.
std::vector<SweepRow> run_sweep(const RunConfig& config, int rank_min, int rank_max,
                                const PatternDataset& ds);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

// Writes the first `count` modes as PGM images into out_dir. Plain-variant
// modes are min-max scaled reshapes; FFT-variant modes are rendered as the
// magnitude of the inverse DFT of the mode with phase zero.
std::vector<std::filesystem::path> export_modes(const RunConfig& config, const PatternDataset& ds,
                                                const std::filesystem::path& out_dir, int count);

// Spatial rendering of one mode column, as written by export_modes but
// before min-max scaling.
std::vector<double> render_mode(const Vector& mode, int side, Variant variant);

}  // namespace eigenpattern
