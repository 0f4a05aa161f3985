#include "eigenpattern/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eigenpattern/errors.hpp"
#include "eigenpattern/parallel.hpp"

namespace eigenpattern {
namespace {

constexpr double kGnbVarianceFloorScale = 1e-9;
constexpr double kLdaRidgeScale = 1e-8;

void check_features(const FeatureMatrix& f) {
    if (f.values.cols() == 0) throw DimensionError("fit: empty feature matrix");
    if (static_cast<Eigen::Index>(f.labels.size()) != f.values.cols()) {
        throw DimensionError("fit: label count does not match sample count");
    }
    if (!f.values.allFinite()) throw NumericalError("fit: non-finite feature values");
}

PatternClass majority_class(const std::array<std::size_t, 3>& counts) {
    int best = 0;
    for (int c = 1; c < 3; ++c) {
        if (counts[c] > counts[best]) best = c;
    }
    return static_cast<PatternClass>(best);
}

std::array<std::size_t, 3> count_labels(const std::vector<PatternClass>& labels,
                                        const std::vector<Eigen::Index>& idx) {
    std::array<std::size_t, 3> counts{0, 0, 0};
    for (Eigen::Index i : idx) counts[static_cast<int>(labels[i])]++;
    return counts;
}

double gini(const std::array<std::size_t, 3>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (int c = 0; c < 3; ++c) {
        const double p = static_cast<double>(counts[c]) / static_cast<double>(total);
        g -= p * p;
    }
    return g;
}

struct TreeBuilder {
    const FeatureMatrix& f;
    int max_depth;
    int min_leaf;
    std::vector<TreeNode> nodes;

    int leaf(const std::array<std::size_t, 3>& counts) {
        TreeNode node;
        node.label = static_cast<int>(majority_class(counts));
        nodes.push_back(node);
        return static_cast<int>(nodes.size()) - 1;
    }

    int build(std::vector<Eigen::Index> idx, int depth) {
        auto counts = count_labels(f.labels, idx);
        const std::size_t total = idx.size();
        const double node_gini = gini(counts, total);
        const bool pure = counts[0] == total || counts[1] == total || counts[2] == total;
        if (pure || depth >= max_depth || total < 2 * static_cast<std::size_t>(min_leaf)) {
            return leaf(counts);
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = node_gini;
        for (Eigen::Index feat = 0; feat < f.feature_count(); ++feat) {
            std::vector<Eigen::Index> order = idx;
            std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
                return f.values(feat, a) < f.values(feat, b);
            });
            std::array<std::size_t, 3> left{0, 0, 0};
            std::array<std::size_t, 3> right = counts;
            for (std::size_t pos = 0; pos + 1 < total; ++pos) {
                const int cls = static_cast<int>(f.labels[order[pos]]);
                left[cls]++;
                right[cls]--;
                const double lo = f.values(feat, order[pos]);
                const double hi = f.values(feat, order[pos + 1]);
                if (lo == hi) continue;  // threshold must separate distinct values
                const std::size_t n_left = pos + 1;
                const std::size_t n_right = total - n_left;
                if (n_left < static_cast<std::size_t>(min_leaf) ||
                    n_right < static_cast<std::size_t>(min_leaf)) {
                    continue;
                }
                const double impurity =
                    (static_cast<double>(n_left) * gini(left, n_left) +
                     static_cast<double>(n_right) * gini(right, n_right)) /
                    static_cast<double>(total);
                if (impurity < best_impurity - 1e-12) {
                    best_impurity = impurity;
                    best_feature = static_cast<int>(feat);
                    best_threshold = 0.5 * (lo + hi);
                }
            }
        }
        if (best_feature < 0) return leaf(counts);  // no split improves impurity

        std::vector<Eigen::Index> left_idx, right_idx;
        for (Eigen::Index i : idx) {
            (f.values(best_feature, i) < best_threshold ? left_idx : right_idx).push_back(i);
        }
        const int self = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[self].feature = best_feature;
        nodes[self].threshold = best_threshold;
        const int left_child = build(std::move(left_idx), depth + 1);
        const int right_child = build(std::move(right_idx), depth + 1);
        nodes[self].left = left_child;
        nodes[self].right = right_child;
        return self;
    }
};

PatternClass predict_knn(const KnnState& knn, const Vector& x) {
    const Eigen::Index m = knn.train_coords.cols();
    std::vector<std::pair<double, Eigen::Index>> dist(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        dist[i] = {(knn.train_coords.col(i) - x).squaredNorm(), i};
    }
    const int k = knn.neighbor_count;
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::array<std::size_t, 3> votes{0, 0, 0};
    for (int i = 0; i < k; ++i) votes[static_cast<int>(knn.train_labels[dist[i].second])]++;
    return majority_class(votes);
}

PatternClass predict_tree(const TreeState& tree, const Vector& x) {
    int node = 0;
    while (tree.nodes[node].feature >= 0) {
        const TreeNode& n = tree.nodes[node];
        node = x[n.feature] < n.threshold ? n.left : n.right;
    }
    return static_cast<PatternClass>(tree.nodes[node].label);
}

PatternClass predict_gnb(const GnbState& gnb, const Vector& x) {
    double best_score = -std::numeric_limits<double>::infinity();
    int best = 0;
    for (int c = 0; c < 3; ++c) {
        if (gnb.priors[c] <= 0.0) continue;
        double score = std::log(gnb.priors[c]);
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            const double v = gnb.variances(c, j);
            const double d = x[j] - gnb.means(c, j);
            score += -0.5 * std::log(2.0 * M_PI * v) - d * d / (2.0 * v);
        }
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    return static_cast<PatternClass>(best);
}

PatternClass predict_lda(const LdaState& lda, const Vector& x) {
    double best_score = -std::numeric_limits<double>::infinity();
    int best = 0;
    for (int c = 0; c < 3; ++c) {
        if (lda.priors[c] <= 0.0) continue;
        const Vector mu = lda.means.row(c).transpose();
        const Vector w = lda.cov_inv * mu;
        const double score = x.dot(w) - 0.5 * mu.dot(w) + std::log(lda.priors[c]);
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    return static_cast<PatternClass>(best);
}

}  // namespace

int TrainedModel::truncation_rank() const {
    return std::visit(
        [](const auto& state) -> int {
            using T = std::decay_t<decltype(state)>;
            if constexpr (std::is_same_v<T, KnnState>) {
                return static_cast<int>(state.train_coords.rows());
            } else if constexpr (std::is_same_v<T, GnbState> || std::is_same_v<T, LdaState>) {
                return static_cast<int>(state.means.cols());
            } else {
                return -1;  // tree does not pin the feature count
            }
        },
        classifier);
}

TrainedModel fit_knn(const FeatureMatrix& f, int neighbor_count) {
    check_features(f);
    if (neighbor_count < 1 || neighbor_count > f.sample_count()) {
        throw ValidationError("fit_knn: neighbor count " + std::to_string(neighbor_count) +
                              " out of range [1, " + std::to_string(f.sample_count()) + "]");
    }
    TrainedModel model;
    model.classifier = KnnState{f.values, f.labels, neighbor_count};
    return model;
}

TrainedModel fit_tree(const FeatureMatrix& f, int max_depth, int min_leaf) {
    check_features(f);
    if (max_depth < 1 || min_leaf < 1) throw ValidationError("fit_tree: invalid hyperparameters");
    TreeBuilder builder{f, max_depth, min_leaf, {}};
    std::vector<Eigen::Index> all(f.sample_count());
    std::iota(all.begin(), all.end(), 0);
    builder.build(std::move(all), 0);
    TrainedModel model;
    model.classifier = TreeState{std::move(builder.nodes), max_depth, min_leaf};
    return model;
}

TrainedModel fit_gnb(const FeatureMatrix& f) {
    check_features(f);
    const Eigen::Index r = f.feature_count();
    const Eigen::Index m = f.sample_count();

    Vector global_mean = f.values.rowwise().mean();
    Vector global_var =
        (f.values.colwise() - global_mean).array().square().rowwise().sum() /
        std::max<double>(1.0, static_cast<double>(m - 1));

    GnbState gnb;
    gnb.means = DenseMatrix::Zero(3, r);
    gnb.variances = DenseMatrix::Zero(3, r);
    for (int c = 0; c < 3; ++c) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (static_cast<int>(f.labels[i]) == c) idx.push_back(i);
        }
        gnb.priors[c] = static_cast<double>(idx.size()) / static_cast<double>(m);
        if (idx.empty()) continue;
        Vector mean = Vector::Zero(r);
        for (Eigen::Index i : idx) mean += f.values.col(i);
        mean /= static_cast<double>(idx.size());
        Vector var = Vector::Zero(r);
        if (idx.size() >= 2) {
            for (Eigen::Index i : idx) var += (f.values.col(i) - mean).array().square().matrix();
            var /= static_cast<double>(idx.size() - 1);
        }
        // Floor to survive constant features.
        for (Eigen::Index j = 0; j < r; ++j) {
            const double floor_v = std::max(kGnbVarianceFloorScale * global_var[j], 1e-300);
            var[j] = std::max(var[j], floor_v);
            if (var[j] <= 0.0) var[j] = 1e-12;
        }
        gnb.means.row(c) = mean.transpose();
        gnb.variances.row(c) = var.transpose();
    }
    TrainedModel model;
    model.classifier = std::move(gnb);
    return model;
}

TrainedModel fit_lda(const FeatureMatrix& f) {
    check_features(f);
    const Eigen::Index r = f.feature_count();
    const Eigen::Index m = f.sample_count();

    LdaState lda;
    lda.means = DenseMatrix::Zero(3, r);
    DenseMatrix scatter = DenseMatrix::Zero(r, r);
    int present = 0;
    for (int c = 0; c < 3; ++c) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (static_cast<int>(f.labels[i]) == c) idx.push_back(i);
        }
        lda.priors[c] = static_cast<double>(idx.size()) / static_cast<double>(m);
        if (idx.empty()) continue;
        ++present;
        Vector mean = Vector::Zero(r);
        for (Eigen::Index i : idx) mean += f.values.col(i);
        mean /= static_cast<double>(idx.size());
        lda.means.row(c) = mean.transpose();
        for (Eigen::Index i : idx) {
            Vector d = f.values.col(i) - mean;
            scatter += d * d.transpose();
        }
    }
    const double dof = std::max<double>(1.0, static_cast<double>(m - present));
    DenseMatrix cov = scatter / dof;
    const double ridge = kLdaRidgeScale * cov.trace() / static_cast<double>(r);
    cov.diagonal().array() += ridge;

    Eigen::FullPivLU<DenseMatrix> lu(cov);
    if (!lu.isInvertible()) {
        throw NumericalError("fit_lda: pooled covariance is singular after regularization");
    }
    lda.cov_inv = lu.inverse();
    TrainedModel model;
    model.classifier = std::move(lda);
    return model;
}

PatternClass predict_coords(const TrainedModel& model, const Vector& coords) {
    const int rank = model.truncation_rank();
    if (rank >= 0 && coords.size() != rank) {
        throw DimensionError("predict: coordinate vector has " + std::to_string(coords.size()) +
                             " entries, model expects " + std::to_string(rank));
    }
    Vector x = coords;
    if (model.preprocessing.normalization) {
        const auto& stats = *model.preprocessing.normalization;
        if (x.size() != stats.mean.size()) {
            throw DimensionError("predict: normalization stats do not match coordinates");
        }
        x = ((x - stats.mean).array() / stats.stddev.array()).matrix();
    }
    return std::visit([&](const auto& state) { return [&] {
        using T = std::decay_t<decltype(state)>;
        if constexpr (std::is_same_v<T, KnnState>) return predict_knn(state, x);
        else if constexpr (std::is_same_v<T, TreeState>) return predict_tree(state, x);
        else if constexpr (std::is_same_v<T, GnbState>) return predict_gnb(state, x);
        else return predict_lda(state, x);
    }(); }, model.classifier);
}

PatternClass predict(const TrainedModel& model, std::span<const double> pixels, int side) {
    if (model.basis.size() == 0) {
        throw DimensionError("predict: model carries no projection basis");
    }
    if (static_cast<Eigen::Index>(pixels.size()) != model.basis.rows() ||
        static_cast<Eigen::Index>(side) * side != model.basis.rows()) {
        throw DimensionError("predict: image size " + std::to_string(pixels.size()) +
                             " does not match basis rows " + std::to_string(model.basis.rows()));
    }
    Vector column(model.basis.rows());
    if (model.preprocessing.use_fft) {
        auto mag = fft_magnitude_pixels(pixels, side);
        for (Eigen::Index i = 0; i < column.size(); ++i) column[i] = mag[i];
    } else {
        for (Eigen::Index i = 0; i < column.size(); ++i) column[i] = pixels[i];
    }
    Vector coords = model.basis.transpose() * column;
    // Normalization happens inside predict_coords.
    return predict_coords(model, coords);
}

PatternClass predict(const TrainedModel& model, const LabeledImage& image) {
    return predict(model, image.pixels, image.side);
}

std::vector<PatternClass> predict_batch(const TrainedModel& model, const PatternDataset& ds) {
    std::vector<PatternClass> out(ds.size());
    parallel_for(ds.size(), [&](std::size_t i) { out[i] = predict(model, ds.images[i]); });
    return out;
}

}  // namespace eigenpattern
