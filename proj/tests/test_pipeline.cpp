#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "eigenpattern/errors.hpp"
#include "eigenpattern/pipeline.hpp"
#include "eigenpattern/synth.hpp"

using namespace eigenpattern;
namespace fs = std::filesystem;

namespace {

PatternDataset jittered_dataset(std::size_t per_class, std::uint64_t seed) {
    DatasetGenOptions options;
    options.class_counts = {per_class, per_class, per_class};
    options.side = 64;
    options.seed = seed;
    options.phase_jitter = 16.0;
    return gen_dataset(options);
}

fs::path temp_dir() {
    auto path = fs::temp_directory_path() /
                ("ep_pipe_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
    return path;
}

}  // namespace

TEST_CASE("config validation fires before any work") {
    RunConfig config;
    config.target_rank = 5;
    config.truncation_rank = 7;  // r > k
    CHECK_THROWS_AS(config.validate(), ValidationError);
    CHECK_THROWS_AS(run_fit(config, PatternDataset{}), ValidationError);

    config = {};
    config.train_fraction = 1.2;
    CHECK_THROWS_AS(config.validate(), ValidationError);
    config = {};
    config.cycles = 0;
    CHECK_THROWS_AS(config.validate(), ValidationError);
}

TEST_CASE("run_fit on separable synthetic data reaches near-zero error") {
    const auto ds = jittered_dataset(30, 12);
    RunConfig config;
    config.target_rank = 20;
    config.truncation_rank = 7;
    config.cycles = 3;
    config.seed = 1;
    const auto result = run_fit(config, ds);
    CHECK(result.cycles.size() == 3);
    CHECK(result.aggregate.error.mean <= 5.0);
    CHECK(result.model.preprocessing.use_fft);
    CHECK(result.model.provenance.target_rank == 20);
    CHECK_FALSE(result.model.provenance.dataset_digest.empty());
}

TEST_CASE("run_fit reports are reproducible for a fixed seed") {
    const auto ds = jittered_dataset(12, 3);
    RunConfig config;
    config.target_rank = 10;
    config.truncation_rank = 5;
    config.cycles = 5;
    config.seed = 9;
    config.stratified = true;
    const auto a = run_fit(config, ds);
    const auto b = run_fit(config, ds);
    CHECK(a.aggregate.error.mean == b.aggregate.error.mean);
    CHECK(a.aggregate.error.stddev == b.aggregate.error.stddev);
    for (int i = 0; i < 5; ++i) {
        CHECK(a.cycles[i].confusion.counts == b.cycles[i].confusion.counts);
    }
    CHECK(a.model.basis == b.model.basis);
}

TEST_CASE("sweep emits one aggregate row per rank and classifier") {
    const auto ds = jittered_dataset(10, 21);
    RunConfig config;
    config.target_rank = 10;
    config.cycles = 2;
    const auto rows = run_sweep(config, 1, 10, ds);
    CHECK(rows.size() == 40);
    for (const auto& row : rows) CHECK(row.aggregate.cycle_count == 2);

    const auto csv = sweep_to_csv(rows);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);  // header + 40 rows
    CHECK(csv.find("rank,classifier,mean_error_pct") == 0);

    CHECK_THROWS_AS(run_sweep(config, 0, 5, ds), ValidationError);
    CHECK_THROWS_AS(run_sweep(config, 1, 11, ds), ValidationError);
}

TEST_CASE("plain-variant mode #01 tracks the dataset mean image") {
    const auto ds = gen_dataset(15, 32, 30);
    RunConfig config;
    config.variant = Variant::Plain;
    config.target_rank = 8;
    config.truncation_rank = 4;
    const auto dir = temp_dir();
    const auto files = export_modes(config, ds, dir, 4);
    REQUIRE(files.size() == 4);
    for (const auto& file : files) CHECK(fs::exists(file));

    // without mean subtraction the leading mode is essentially the mean image
    const DenseMatrix x = to_data_matrix(ds);
    const Vector mean_image = x.rowwise().mean();
    const auto fac = randomized_svd(x, config.target_rank, config.oversampling,
                                    config.power_iterations, config.seed);
    const Vector mode0 = fac.u.col(0);
    const double cosine = std::abs(mode0.dot(mean_image)) / (mode0.norm() * mean_image.norm());
    CHECK(cosine >= 0.99);
    fs::remove_all(dir);
}

TEST_CASE("FFT-variant rendering of a DC-only mode is constant") {
    Vector mode = Vector::Zero(16 * 16);
    mode[0] = 3.0;  // all energy in the DC bin
    const auto rendered = render_mode(mode, 16, Variant::Fft);
    for (double v : rendered) CHECK(v == doctest::Approx(rendered[0]).epsilon(1e-12));
}

TEST_CASE("mode export count is validated") {
    const auto ds = gen_dataset(4, 32, 2);
    RunConfig config;
    config.target_rank = 6;
    config.truncation_rank = 3;
    const auto dir = temp_dir();
    CHECK_THROWS_AS(export_modes(config, ds, dir, 0), ValidationError);
    CHECK_THROWS_AS(export_modes(config, ds, dir, 7), ValidationError);
    const auto files = export_modes(config, ds, dir, 6);
    CHECK(files.size() == 6);
    fs::remove_all(dir);
}

TEST_CASE("balanced runs equalize the training class counts") {
    DatasetGenOptions options;
    options.class_counts = {20, 8, 25};
    options.side = 32;
    options.seed = 44;
    const auto ds = gen_dataset(options);

    RunConfig config;
    config.target_rank = 8;
    config.truncation_rank = 4;
    config.cycles = 1;
    config.balance = true;
    config.stratified = true;
    const auto result = run_fit(config, ds);
    // balanced pool: 8 per class, stratified 80/20 split -> 2 test per class
    CHECK(result.cycles[0].report.sample_count == 6);

    config.per_class = 6;
    const auto smaller = run_fit(config, ds);
    CHECK(smaller.cycles[0].report.sample_count == 3);  // 1 test image per class
}

TEST_CASE("dataset digest distinguishes datasets and is stable") {
    const auto a = gen_dataset(5, 32, 1);
    const auto b = gen_dataset(5, 32, 2);
    CHECK(dataset_digest(a) == dataset_digest(a));
    CHECK(dataset_digest(a) != dataset_digest(b));
}

TEST_CASE("string round trips for config enums") {
    CHECK(variant_from_string("fft") == Variant::Fft);
    CHECK(variant_from_string("plain") == Variant::Plain);
    CHECK_THROWS_AS(variant_from_string("weird"), ValidationError);
    for (auto kind : {ClassifierKind::Knn, ClassifierKind::Tree, ClassifierKind::Gnb,
                      ClassifierKind::Lda}) {
        CHECK(classifier_from_string(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(classifier_from_string("svm"), ValidationError);
}
