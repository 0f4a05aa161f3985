#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eigenpattern/dataset.hpp"

namespace eigenpattern {

struct RegimeCell {
    double velocity = 0.0;
    double tonal_value = 0.0;
    std::array<std::size_t, 3> counts{0, 0, 0};
    PatternClass majority = PatternClass::B;
};

// Per-velocity tonal-value breakpoint of a regime border.
struct BorderPoint {
    double velocity = 0.0;
    double tonal_value = 0.0;
};

// Grid over (printing velocity x tonal value) with per-cell majority class
// and the two regime borders: lower separates A from B, upper separates B
// (or A) from C.
struct RegimeMap {
    std::string experiment;
    double raster_frequency = 0.0;
    std::vector<double> velocities;    // ascending
    std::vector<double> tonal_values;  // ascending
    std::vector<RegimeCell> cells;     // velocity-major: cell(v, t)
    std::vector<BorderPoint> lower_border;
    std::vector<BorderPoint> upper_border;

    RegimeCell& cell(std::size_t vi, std::size_t ti) { return cells[vi * tonal_values.size() + ti]; }
    const RegimeCell& cell(std::size_t vi, std::size_t ti) const {
        return cells[vi * tonal_values.size() + ti];
    }
};

// Majority class per (velocity, tonal value) cell; a tie between regimes
// resolves to B. Throws ValidationError when the inputs span multiple
// experiments or an expected grid cell is empty, listing its coordinates.
RegimeMap build_regime_map(const std::vector<std::pair<ImageMeta, PatternClass>>& predictions);

// Fills lower_border / upper_border by scanning each velocity column in
// ascending tonal order: the lower breakpoint is the midpoint of the first
// adjacent A / non-A pair, the upper the midpoint of the first non-C / C
// pair. Columns whose classes are not ordered A..B..C trigger the warning
// callback.
void extract_borders(RegimeMap& map,
                     const std::function<void(const std::string&)>& warn = nullptr);

// CSV schema: cell rows "velocity,tonal_value,count_A,count_B,count_C,majority"
// followed by border rows "velocity,border{lower|upper},tonal_value".
void export_regime_map_csv(const RegimeMap& map, const std::filesystem::path& path);
RegimeMap parse_regime_map_csv(const std::filesystem::path& path);

// Static SVG with class-colored cells, border polylines, and axis labels.
void export_regime_map_svg(const RegimeMap& map, const std::filesystem::path& path);

}  // namespace eigenpattern
