#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eigenpattern/linalg.hpp"

namespace eigenpattern {

// A = dot patterns (point splitting), B = mixed (transition regime),
// C = finger patterns (lamella splitting).
enum class PatternClass : int { A = 0, B = 1, C = 2 };

inline char class_letter(PatternClass c) { return "ABC"[static_cast<int>(c)]; }
PatternClass class_from_letter(const std::string& token);

struct ImageMeta {
    std::string experiment;
    double velocity_m_per_min = 0.0;
    double tonal_value_pct = 0.0;
    double raster_lines_per_cm = 0.0;
    bool electrostatic_assist = false;
};

// Square grayscale image, pixels row-major in [0,1].
struct LabeledImage {
    int side = 0;
    std::vector<double> pixels;
    PatternClass label = PatternClass::A;
    ImageMeta meta;

    double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * side + col]; }
};

struct PatternDataset {
    std::vector<LabeledImage> images;

    std::size_t size() const { return images.size(); }
    int side() const { return images.empty() ? 0 : images.front().side; }
    std::array<std::size_t, 3> label_counts() const;
};

// Reads a manifest (UTF-8 CSV with header
// file,label,experiment,velocity_m_per_min,tonal_value_pct,raster_lines_per_cm,esa)
// and decodes every referenced image from image_dir. Errors name the
// offending manifest row.
PatternDataset load_dataset(const std::filesystem::path& image_dir,
                            const std::filesystem::path& manifest);

// Writes a dataset as PGM files plus a manifest in the ingestion format.
void save_dataset(const PatternDataset& ds, const std::filesystem::path& image_dir,
                  const std::filesystem::path& manifest);

// S^2 x m matrix; column k is image k flattened row-major.
DenseMatrix to_data_matrix(const PatternDataset& ds);

// Column k is the elementwise magnitude of the unnormalized 2-D DFT of image
// k, flattened row-major in bin order (no fftshift).
DenseMatrix fft_magnitude(const PatternDataset& ds);

// FFT magnitude of a single pixel grid, as one column would be laid out.
std::vector<double> fft_magnitude_pixels(std::span<const double> pixels, int side);

// Random undersampling without replacement to per_class images per class
// (default: the minimum class count). Deterministic per seed.
PatternDataset balance(const PatternDataset& ds, std::uint64_t seed,
                       std::optional<std::size_t> per_class = std::nullopt);

// Uniform random partition; train size = round(train_fraction * m). With
// stratified=true the split is applied per class instead.
std::pair<PatternDataset, PatternDataset> train_test_split(const PatternDataset& ds,
                                                           double train_fraction,
                                                           std::uint64_t seed,
                                                           bool stratified = false);

struct NormalizationStats {
    Vector mean;
    Vector stddev;  // sample std, (m-1) denominator; strictly positive
};

// Per-feature mean/std over the columns of coords (features are rows).
// Throws NumericalError on a zero-variance feature.
NormalizationStats fit_normalization(const DenseMatrix& coords);

// (x - mean) / std per feature.
DenseMatrix apply_normalization(const NormalizationStats& stats, const DenseMatrix& coords);

}  // namespace eigenpattern
