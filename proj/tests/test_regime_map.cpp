#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "eigenpattern/errors.hpp"
#include "eigenpattern/regime_map.hpp"

using namespace eigenpattern;
namespace fs = std::filesystem;

namespace {

ImageMeta meta_at(double velocity, double tonal) {
    ImageMeta m;
    m.experiment = "B3-01";
    m.velocity_m_per_min = velocity;
    m.tonal_value_pct = tonal;
    m.raster_lines_per_cm = 60.0;
    return m;
}

// One velocity column with the given per-tonal majorities, n predictions per
// cell.
std::vector<std::pair<ImageMeta, PatternClass>> column(
    double velocity, const std::vector<double>& tonals, const std::vector<PatternClass>& classes,
    int per_cell = 3) {
    std::vector<std::pair<ImageMeta, PatternClass>> predictions;
    for (std::size_t i = 0; i < tonals.size(); ++i) {
        for (int k = 0; k < per_cell; ++k) {
            predictions.emplace_back(meta_at(velocity, tonals[i]), classes[i]);
        }
    }
    return predictions;
}

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / (name + "_" + std::to_string(std::random_device{}()));
}

}  // namespace

TEST_CASE("cell majorities and the tie rule") {
    std::vector<std::pair<ImageMeta, PatternClass>> predictions;
    for (int i = 0; i < 5; ++i) predictions.emplace_back(meta_at(15, 5), PatternClass::A);
    predictions.emplace_back(meta_at(15, 5), PatternClass::B);
    const auto map = build_regime_map(predictions);
    CHECK(map.cells.size() == 1);
    CHECK(map.cell(0, 0).majority == PatternClass::A);
    CHECK(map.cell(0, 0).counts == std::array<std::size_t, 3>{5, 1, 0});

    // A/C tie resolves to the transition class B
    std::vector<std::pair<ImageMeta, PatternClass>> tied;
    for (int i = 0; i < 3; ++i) {
        tied.emplace_back(meta_at(15, 5), PatternClass::A);
        tied.emplace_back(meta_at(15, 5), PatternClass::C);
    }
    CHECK(build_regime_map(tied).cell(0, 0).majority == PatternClass::B);
}

TEST_CASE("empty grid cells are reported with coordinates") {
    std::vector<std::pair<ImageMeta, PatternClass>> predictions;
    predictions.emplace_back(meta_at(15, 5), PatternClass::A);
    predictions.emplace_back(meta_at(15, 10), PatternClass::A);
    predictions.emplace_back(meta_at(30, 5), PatternClass::B);
    // (30, 10) missing
    CHECK_THROWS_WITH_AS(build_regime_map(predictions), doctest::Contains("(30, 10)"),
                         ValidationError);
}

TEST_CASE("mixed experiments are rejected") {
    std::vector<std::pair<ImageMeta, PatternClass>> predictions;
    predictions.emplace_back(meta_at(15, 5), PatternClass::A);
    auto other = meta_at(15, 10);
    other.experiment = "B3-05";
    predictions.emplace_back(other, PatternClass::A);
    CHECK_THROWS_AS(build_regime_map(predictions), ValidationError);
}

TEST_CASE("midpoint borders for the A,A,B,C column") {
    auto map = build_regime_map(
        column(15, {10, 20, 30, 40}, {PatternClass::A, PatternClass::A, PatternClass::B,
                                      PatternClass::C}));
    extract_borders(map);
    REQUIRE(map.lower_border.size() == 1);
    REQUIRE(map.upper_border.size() == 1);
    CHECK(map.lower_border[0].tonal_value == doctest::Approx(25.0));
    CHECK(map.upper_border[0].tonal_value == doctest::Approx(35.0));
    CHECK(map.lower_border[0].velocity == 15.0);
}

TEST_CASE("columns without transitions have no breakpoints") {
    auto map = build_regime_map(
        column(15, {10, 20, 30}, {PatternClass::A, PatternClass::A, PatternClass::A}));
    extract_borders(map);
    CHECK(map.lower_border.empty());
    CHECK(map.upper_border.empty());
}

TEST_CASE("A to C jump places both borders at the same midpoint with a warning") {
    auto map = build_regime_map(
        column(15, {10, 20}, {PatternClass::A, PatternClass::C}));
    int warnings = 0;
    extract_borders(map, [&](const std::string&) { ++warnings; });
    REQUIRE(map.lower_border.size() == 1);
    REQUIRE(map.upper_border.size() == 1);
    CHECK(map.lower_border[0].tonal_value == doctest::Approx(15.0));
    CHECK(map.upper_border[0].tonal_value == doctest::Approx(15.0));
    CHECK(warnings >= 1);  // lower == upper is flagged
}

TEST_CASE("swapping A and C labels swaps the border roles") {
    const std::vector<double> tonals{10, 20, 30, 40, 50};
    const std::vector<PatternClass> classes{PatternClass::A, PatternClass::A, PatternClass::B,
                                            PatternClass::C, PatternClass::C};
    std::vector<PatternClass> swapped;
    for (auto c : classes) {
        swapped.push_back(c == PatternClass::A   ? PatternClass::C
                          : c == PatternClass::C ? PatternClass::A
                                                 : PatternClass::B);
    }
    auto map = build_regime_map(column(15, tonals, classes));
    auto map_swapped = build_regime_map(column(15, tonals, swapped));
    int warnings = 0;
    extract_borders(map);
    extract_borders(map_swapped, [&](const std::string&) { ++warnings; });
    REQUIRE(map.lower_border.size() == 1);
    REQUIRE(map_swapped.lower_border.size() == 1);
    CHECK(map_swapped.lower_border[0].tonal_value ==
          doctest::Approx(map.upper_border[0].tonal_value));
    CHECK(map_swapped.upper_border[0].tonal_value ==
          doctest::Approx(map.lower_border[0].tonal_value));
}

TEST_CASE("majorities are invariant under duplicating every prediction") {
    auto predictions = column(15, {10, 20, 30}, {PatternClass::A, PatternClass::B, PatternClass::C});
    auto doubled = predictions;
    doubled.insert(doubled.end(), predictions.begin(), predictions.end());
    const auto m1 = build_regime_map(predictions);
    const auto m2 = build_regime_map(doubled);
    for (std::size_t i = 0; i < m1.cells.size(); ++i) {
        CHECK(m1.cells[i].majority == m2.cells[i].majority);
        CHECK(m2.cells[i].counts[0] == 2 * m1.cells[i].counts[0]);
    }
}

TEST_CASE("borders never cross on ordered multi-velocity maps") {
    std::vector<std::pair<ImageMeta, PatternClass>> predictions;
    const std::vector<double> tonals{5, 10, 15, 20, 25, 30};
    const double velocities[4] = {15, 30, 60, 90};
    for (int vi = 0; vi < 4; ++vi) {
        std::vector<PatternClass> classes;
        for (std::size_t ti = 0; ti < tonals.size(); ++ti) {
            // boundary drifts upward with velocity
            const int cut_a = 1 + vi / 2, cut_c = 3 + vi / 2;
            classes.push_back(ti < static_cast<std::size_t>(cut_a)   ? PatternClass::A
                              : ti < static_cast<std::size_t>(cut_c) ? PatternClass::B
                                                                     : PatternClass::C);
        }
        auto col = column(velocities[vi], tonals, classes);
        predictions.insert(predictions.end(), col.begin(), col.end());
    }
    auto map = build_regime_map(predictions);
    extract_borders(map);
    REQUIRE(map.lower_border.size() == 4);
    REQUIRE(map.upper_border.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(map.lower_border[i].tonal_value < map.upper_border[i].tonal_value);
    }
}

TEST_CASE("CSV export counts rows and re-parses exactly") {
    std::vector<std::pair<ImageMeta, PatternClass>> predictions;
    std::mt19937_64 rng(2);
    const double velocities[7] = {15, 30, 60, 90, 120, 180, 240};
    for (int vi = 0; vi < 7; ++vi) {
        for (int ti = 1; ti <= 20; ++ti) {
            for (int k = 0; k < 3; ++k) {
                const int cls = ti <= 7 ? 0 : ti <= 12 ? 1 : 2;
                predictions.emplace_back(meta_at(velocities[vi], 5.0 * ti),
                                         static_cast<PatternClass>(cls));
            }
        }
    }
    auto map = build_regime_map(predictions);
    extract_borders(map);
    CHECK(map.cells.size() == 140);
    CHECK(map.lower_border.size() + map.upper_border.size() <= 14);

    const auto path = temp_file("regime.csv");
    export_regime_map_csv(map, path);

    std::ifstream in(path);
    std::string line;
    int cell_rows = 0, border_rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("velocity,", 0) == 0) continue;
        const auto commas = std::count(line.begin(), line.end(), ',');
        (commas == 5 ? cell_rows : border_rows)++;
    }
    CHECK(cell_rows == 140);
    CHECK(border_rows <= 14);

    const auto parsed = parse_regime_map_csv(path);
    CHECK(parsed.experiment == map.experiment);
    CHECK(parsed.raster_frequency == map.raster_frequency);
    CHECK(parsed.velocities == map.velocities);
    CHECK(parsed.tonal_values == map.tonal_values);
    REQUIRE(parsed.cells.size() == map.cells.size());
    for (std::size_t i = 0; i < map.cells.size(); ++i) {
        CHECK(parsed.cells[i].counts == map.cells[i].counts);
        CHECK(parsed.cells[i].majority == map.cells[i].majority);
        CHECK(parsed.cells[i].velocity == map.cells[i].velocity);
        CHECK(parsed.cells[i].tonal_value == map.cells[i].tonal_value);
    }
    REQUIRE(parsed.lower_border.size() == map.lower_border.size());
    for (std::size_t i = 0; i < map.lower_border.size(); ++i) {
        CHECK(parsed.lower_border[i].tonal_value == map.lower_border[i].tonal_value);
    }
    fs::remove(path);
}

TEST_CASE("SVG export draws cells, and omits polylines when borders are absent") {
    auto with_borders = build_regime_map(
        column(15, {10, 20, 30}, {PatternClass::A, PatternClass::B, PatternClass::C}));
    // a single velocity gives single-point borders, which are not drawable lines
    auto no_borders = build_regime_map(
        column(15, {10, 20, 30}, {PatternClass::B, PatternClass::B, PatternClass::B}));
    extract_borders(with_borders);
    extract_borders(no_borders);

    const auto path = temp_file("regime.svg");
    export_regime_map_svg(no_borders, path);
    std::ifstream in(path);
    std::string svg((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<rect") != std::string::npos);
    CHECK(svg.find("<polyline") == std::string::npos);
    CHECK(svg.find("tonal value") != std::string::npos);
    fs::remove(path);
}
