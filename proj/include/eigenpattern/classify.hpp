#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eigenpattern/dataset.hpp"
#include "eigenpattern/linalg.hpp"

namespace eigenpattern {

// Reduced-order training data: one column per sample, one row per mode.
struct FeatureMatrix {
    DenseMatrix values;  // r x m
    std::vector<PatternClass> labels;

    Eigen::Index feature_count() const { return values.rows(); }
    Eigen::Index sample_count() const { return values.cols(); }
};

// kNN keeps the training data as a lookup table. Distance ties break toward
// the lowest training index, vote ties toward the lowest class index.
struct KnnState {
    DenseMatrix train_coords;
    std::vector<PatternClass> train_labels;
    int neighbor_count = 1;
};

// Flat binary CART tree; leaf nodes have feature == -1.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int label = -1;     // valid for leaves
    int left = -1;      // child indices into TreeState::nodes
    int right = -1;
};

struct TreeState {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    int max_depth = 32;
    int min_leaf = 1;
};

// Gaussian naive Bayes: per-class per-feature mean/variance plus priors.
struct GnbState {
    DenseMatrix means;      // 3 x r
    DenseMatrix variances;  // 3 x r, floored away from zero
    Eigen::Vector3d priors;
};

// Linear discriminant: class means, pooled covariance inverse, priors.
struct LdaState {
    DenseMatrix means;    // 3 x r
    DenseMatrix cov_inv;  // r x r
    Eigen::Vector3d priors;
};

using ClassifierState = std::variant<KnnState, TreeState, GnbState, LdaState>;

struct Preprocessing {
    bool use_fft = false;
    std::optional<NormalizationStats> normalization;
};

struct Provenance {
    std::uint64_t seed = 0;
    int target_rank = 0;
    int truncation_rank = 0;
    std::string dataset_digest;
};

// Everything needed to classify a raw image: preprocessing flags, the
// projection basis U_r, and the fitted classifier.
struct TrainedModel {
    Preprocessing preprocessing;
    DenseMatrix basis;  // n x r; empty for models used on coords directly
    ClassifierState classifier;
    Provenance provenance;

    int truncation_rank() const;
};

TrainedModel fit_knn(const FeatureMatrix& f, int neighbor_count);
TrainedModel fit_tree(const FeatureMatrix& f, int max_depth = 32, int min_leaf = 1);
TrainedModel fit_gnb(const FeatureMatrix& f);
TrainedModel fit_lda(const FeatureMatrix& f);

// Classify an already-reduced coordinate vector.
PatternClass predict_coords(const TrainedModel& model, const Vector& coords);

// Full pipeline on raw pixels: optional FFT magnitude, projection by the
// stored basis, optional normalization, then the classifier.
PatternClass predict(const TrainedModel& model, std::span<const double> pixels, int side);
PatternClass predict(const TrainedModel& model, const LabeledImage& image);

std::vector<PatternClass> predict_batch(const TrainedModel& model, const PatternDataset& ds);

// Single-file binary persistence: magic "EPAT", 32-bit version, JSON metadata
// header, then little-endian float64 arrays. Byte layout documented in
// src/model_io.cpp.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace eigenpattern
