#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "eigenpattern/classify.hpp"
#include "eigenpattern/errors.hpp"
#include "eigenpattern/pipeline.hpp"
#include "eigenpattern/synth.hpp"

using namespace eigenpattern;
namespace fs = std::filesystem;

namespace {

FeatureMatrix make_features(const std::vector<std::vector<double>>& points,
                            const std::vector<PatternClass>& labels) {
    FeatureMatrix f;
    f.values.resize(static_cast<Eigen::Index>(points.front().size()),
                    static_cast<Eigen::Index>(points.size()));
    for (std::size_t j = 0; j < points.size(); ++j) {
        for (std::size_t i = 0; i < points[j].size(); ++i) {
            f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = points[j][i];
        }
    }
    f.labels = labels;
    return f;
}

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / (name + "_" + std::to_string(std::random_device{}()));
}

}  // namespace

TEST_CASE("1-NN returns the label of an exact training match") {
    auto f = make_features({{0, 0}, {1, 0}, {10, 0}},
                           {PatternClass::A, PatternClass::A, PatternClass::C});
    auto model = fit_knn(f, 1);
    CHECK(predict_coords(model, vec({10, 0})) == PatternClass::C);
    CHECK(predict_coords(model, vec({0.4, 0})) == PatternClass::A);
}

TEST_CASE("kNN with k equal to m predicts the majority class") {
    auto f = make_features({{0, 0}, {1, 0}, {2, 0}, {100, 0}},
                           {PatternClass::C, PatternClass::C, PatternClass::C, PatternClass::A});
    auto model = fit_knn(f, 4);
    CHECK(predict_coords(model, vec({100, 0})) == PatternClass::C);
    CHECK(predict_coords(model, vec({-50, 0})) == PatternClass::C);
}

TEST_CASE("kNN matches a brute-force distance scan") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss;
    std::vector<std::vector<double>> points;
    std::vector<PatternClass> labels;
    for (int i = 0; i < 60; ++i) {
        points.push_back({gauss(rng), gauss(rng), gauss(rng)});
        labels.push_back(static_cast<PatternClass>(i % 3));
    }
    auto f = make_features(points, labels);
    for (int k : {1, 3, 7}) {
        auto model = fit_knn(f, k);
        for (int q = 0; q < 20; ++q) {
            Vector query = vec({gauss(rng), gauss(rng), gauss(rng)});
            // brute force: sort by (distance, index), majority with lowest-class ties
            std::vector<std::pair<double, int>> d;
            for (int i = 0; i < 60; ++i) {
                d.push_back({(f.values.col(i) - query).squaredNorm(), i});
            }
            std::sort(d.begin(), d.end());
            std::array<int, 3> votes{0, 0, 0};
            for (int i = 0; i < k; ++i) votes[static_cast<int>(labels[d[i].second])]++;
            int best = 0;
            for (int c = 1; c < 3; ++c)
                if (votes[c] > votes[best]) best = c;
            CHECK(predict_coords(model, query) == static_cast<PatternClass>(best));
        }
    }
    CHECK_THROWS_AS(fit_knn(f, 61), ValidationError);
    CHECK_THROWS_AS(fit_knn(f, 0), ValidationError);
}

TEST_CASE("1-NN training error is zero on distinct points") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss;
    std::vector<std::vector<double>> points;
    std::vector<PatternClass> labels;
    for (int i = 0; i < 30; ++i) {
        points.push_back({gauss(rng), gauss(rng)});
        labels.push_back(static_cast<PatternClass>(rng() % 3));
    }
    auto f = make_features(points, labels);
    auto model = fit_knn(f, 1);
    for (int i = 0; i < 30; ++i) {
        CHECK(predict_coords(model, f.values.col(i)) == labels[i]);
    }
}

TEST_CASE("tree on a single-class set is a single leaf") {
    auto f = make_features({{1}, {2}, {3}}, {PatternClass::B, PatternClass::B, PatternClass::B});
    auto model = fit_tree(f);
    const auto& tree = std::get<TreeState>(model.classifier);
    CHECK(tree.nodes.size() == 1);
    CHECK(predict_coords(model, vec({-100})) == PatternClass::B);
}

TEST_CASE("tree separates two 1-D clusters with a threshold between them") {
    auto f = make_features({{0}, {1}, {10}, {11}},
                           {PatternClass::A, PatternClass::A, PatternClass::C, PatternClass::C});
    auto model = fit_tree(f);
    const auto& tree = std::get<TreeState>(model.classifier);
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].threshold > 1.0);
    CHECK(tree.nodes[0].threshold < 10.0);
    for (int i = 0; i < 4; ++i) CHECK(predict_coords(model, f.values.col(i)) == f.labels[i]);

    // exhaustive threshold enumeration agrees that any threshold in (1,10)
    // yields zero Gini; the chosen midpoint is 5.5
    CHECK(tree.nodes[0].threshold == doctest::Approx(5.5));
}

TEST_CASE("tree tolerates contradictory duplicate points") {
    auto f = make_features({{1, 1}, {1, 1}, {1, 1}},
                           {PatternClass::A, PatternClass::C, PatternClass::C});
    auto model = fit_tree(f);
    CHECK(predict_coords(model, vec({1, 1})) == PatternClass::C);

    auto tied = make_features({{1}, {1}}, {PatternClass::A, PatternClass::C});
    auto tied_model = fit_tree(tied);
    CHECK(predict_coords(tied_model, vec({1})) == PatternClass::A);  // tie: lowest class index
}

TEST_CASE("tree predictions are invariant under monotone feature transforms") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> gauss;
    std::vector<std::vector<double>> points;
    std::vector<PatternClass> labels;
    for (int i = 0; i < 40; ++i) {
        points.push_back({gauss(rng), gauss(rng)});
        labels.push_back(static_cast<PatternClass>((points.back()[0] > 0) +
                                                   (points.back()[1] > 0.5)));
    }
    auto f = make_features(points, labels);
    auto transformed = f;
    auto monotone = [](double v) { return std::exp(v) + 3.0 * v; };
    transformed.values = f.values.unaryExpr(monotone);

    auto m1 = fit_tree(f);
    auto m2 = fit_tree(transformed);
    for (int q = 0; q < 40; ++q) {
        CHECK(predict_coords(m1, f.values.col(q)) ==
              predict_coords(m2, transformed.values.col(q)));
    }
}

TEST_CASE("GNB matches the closed-form posterior for two separated clusters") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> left(-2.0, 0.7), right(2.0, 1.1);
    std::vector<std::vector<double>> points;
    std::vector<PatternClass> labels;
    for (int i = 0; i < 50; ++i) {
        points.push_back({left(rng)});
        labels.push_back(PatternClass::A);
        points.push_back({right(rng)});
        labels.push_back(PatternClass::C);
    }
    auto f = make_features(points, labels);
    auto model = fit_gnb(f);
    const auto& gnb = std::get<GnbState>(model.classifier);

    auto density_score = [&](int c, double x) {
        const double v = gnb.variances(c, 0);
        const double d = x - gnb.means(c, 0);
        return std::log(gnb.priors[c]) - 0.5 * std::log(2 * M_PI * v) - d * d / (2 * v);
    };
    for (double q = -4.0; q <= 4.0; q += 0.25) {
        const PatternClass expected =
            density_score(0, q) >= density_score(2, q) ? PatternClass::A : PatternClass::C;
        CHECK(predict_coords(model, vec({q})) == expected);
    }
    // queries at the cluster means
    CHECK(predict_coords(model, vec({gnb.means(0, 0)})) == PatternClass::A);
    CHECK(predict_coords(model, vec({gnb.means(2, 0)})) == PatternClass::C);
}

TEST_CASE("GNB symmetric tie breaks to the lowest class index") {
    auto f = make_features({{-1.1}, {-0.9}, {0.9}, {1.1}},
                           {PatternClass::A, PatternClass::A, PatternClass::C, PatternClass::C});
    auto model = fit_gnb(f);
    CHECK(predict_coords(model, vec({0.0})) == PatternClass::A);
}

TEST_CASE("GNB survives constant features via the variance floor") {
    auto f = make_features({{1, 5}, {1, 6}, {1, -5}, {1, -6}},
                           {PatternClass::A, PatternClass::A, PatternClass::B, PatternClass::B});
    auto model = fit_gnb(f);
    CHECK(predict_coords(model, vec({1, 5.5})) == PatternClass::A);
    CHECK(predict_coords(model, vec({1, -5.5})) == PatternClass::B);
}

TEST_CASE("LDA decision boundary for symmetric 1-D classes is at zero") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::vector<double>> points;
    std::vector<PatternClass> labels;
    for (int i = 0; i < 200; ++i) {
        const double n = noise(rng);
        points.push_back({-1.0 + n});
        labels.push_back(PatternClass::A);
        points.push_back({1.0 + n});
        labels.push_back(PatternClass::C);
    }
    auto f = make_features(points, labels);
    auto model = fit_lda(f);
    const auto& lda = std::get<LdaState>(model.classifier);
    // equal priors, shared noise: boundary at the midpoint of the fitted means
    const double midpoint = 0.5 * (lda.means(0, 0) + lda.means(2, 0));
    CHECK(predict_coords(model, vec({midpoint - 0.1})) == PatternClass::A);
    CHECK(predict_coords(model, vec({midpoint + 0.1})) == PatternClass::C);
    CHECK(predict_coords(model, vec({-50.0})) == PatternClass::A);
    CHECK(predict_coords(model, vec({50.0})) == PatternClass::C);
}

TEST_CASE("LDA matches a brute-force discriminant score on 3 classes") {
    std::mt19937_64 rng(43);
    std::normal_distribution<double> gauss;
    std::vector<std::vector<double>> points;
    std::vector<PatternClass> labels;
    const double centers[3][2] = {{0, 0}, {4, 0}, {0, 4}};
    for (int i = 0; i < 90; ++i) {
        const int c = i % 3;
        points.push_back({centers[c][0] + gauss(rng), centers[c][1] + gauss(rng)});
        labels.push_back(static_cast<PatternClass>(c));
    }
    auto f = make_features(points, labels);
    auto model = fit_lda(f);
    const auto& lda = std::get<LdaState>(model.classifier);

    for (int q = 0; q < 30; ++q) {
        Vector x = vec({gauss(rng) * 3, gauss(rng) * 3});
        double best_score = -1e300;
        int best = 0;
        for (int c = 0; c < 3; ++c) {
            const Vector mu = lda.means.row(c).transpose();
            const double score =
                x.dot(lda.cov_inv * mu) - 0.5 * mu.dot(lda.cov_inv * mu) + std::log(lda.priors[c]);
            if (score > best_score) {
                best_score = score;
                best = c;
            }
        }
        CHECK(predict_coords(model, x) == static_cast<PatternClass>(best));
    }
}

TEST_CASE("predict composes fft, projection, and classification") {
    const auto ds = gen_dataset(12, 32, 6);
    RunConfig config;
    config.target_rank = 10;
    config.truncation_rank = 5;
    config.cycles = 1;
    config.normalize = true;
    const auto result = run_fit(config, ds);
    const auto& model = result.model;

    for (std::size_t i = 0; i < ds.size(); i += 5) {
        const auto& img = ds.images[i];
        // manual pipeline: fft -> project -> normalize -> classify
        auto mag = fft_magnitude_pixels(img.pixels, img.side);
        Vector column = Eigen::Map<const Vector>(mag.data(), static_cast<Eigen::Index>(mag.size()));
        Vector coords = model.basis.transpose() * column;
        CHECK(predict(model, img) == predict_coords(model, coords));
    }

    LabeledImage wrong;
    wrong.side = 16;
    wrong.pixels.assign(256, 0.5);
    CHECK_THROWS_AS(predict(model, wrong), DimensionError);
}

TEST_CASE("training images fed back through a 1-NN model return their labels") {
    const auto ds = gen_dataset(8, 32, 16);
    RunConfig config;
    config.target_rank = 8;
    config.truncation_rank = 6;
    config.cycles = 1;
    config.train_fraction = 0.75;
    config.stratified = true;  // every class must appear in the small test side
    const auto result = run_fit(config, ds);
    int correct = 0, total = 0;
    for (const auto& img : ds.images) {
        correct += predict(result.model, img) == img.label;
        ++total;
    }
    CHECK(correct >= total - 3);  // test-split images may differ; training ones must match
}

TEST_CASE("model persistence round-trips predictions bit-exactly") {
    std::mt19937_64 rng(71);
    std::normal_distribution<double> gauss;
    std::vector<std::vector<double>> points;
    std::vector<PatternClass> labels;
    for (int i = 0; i < 45; ++i) {
        points.push_back({gauss(rng), gauss(rng), gauss(rng), gauss(rng)});
        labels.push_back(static_cast<PatternClass>(i % 3));
    }
    auto f = make_features(points, labels);

    std::vector<TrainedModel> models;
    models.push_back(fit_knn(f, 3));
    models.push_back(fit_tree(f));
    models.push_back(fit_gnb(f));
    models.push_back(fit_lda(f));
    for (auto& model : models) {
        model.basis = DenseMatrix::Random(16, 4);
        model.provenance = {9, 4, 4, "abc123"};
    }
    models[1].preprocessing.use_fft = true;

    for (const auto& model : models) {
        const auto path = temp_file("model");
        save_model(model, path);
        const auto loaded = load_model(path);
        CHECK(loaded.preprocessing.use_fft == model.preprocessing.use_fft);
        CHECK(loaded.basis == model.basis);
        CHECK(loaded.provenance.dataset_digest == "abc123");
        for (int q = 0; q < 100; ++q) {
            Vector x = vec({gauss(rng), gauss(rng), gauss(rng), gauss(rng)});
            CHECK(predict_coords(loaded, x) == predict_coords(model, x));
        }
        fs::remove(path);
    }
}

TEST_CASE("model load failures are distinct errors") {
    auto f = make_features({{0}, {1}, {2}}, {PatternClass::A, PatternClass::B, PatternClass::C});
    auto model = fit_knn(f, 1);
    const auto path = temp_file("model_err");
    save_model(model, path);

    SUBCASE("corrupted magic") {
        std::fstream file(path, std::ios::in | std::ios::out | std::ios::binary);
        file.write("XXXX", 4);
        file.close();
        CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("magic"), FormatError);
    }
    SUBCASE("unsupported version") {
        std::fstream file(path, std::ios::in | std::ios::out | std::ios::binary);
        file.seekp(4);
        const std::uint32_t future = 999;
        file.write(reinterpret_cast<const char*>(&future), 4);
        file.close();
        CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("version"), FormatError);
    }
    SUBCASE("truncated payload") {
        const auto size = fs::file_size(path);
        fs::resize_file(path, size - 16);
        CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("truncated"), FormatError);
    }
    fs::remove(path);
}
