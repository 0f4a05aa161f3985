#include "eigenpattern/regime_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "eigenpattern/errors.hpp"

namespace eigenpattern {
namespace {

PatternClass cell_majority(const std::array<std::size_t, 3>& counts) {
    const std::size_t best = *std::max_element(counts.begin(), counts.end());
    int winner = -1;
    for (int c = 0; c < 3; ++c) {
        if (counts[c] == best) {
            if (winner >= 0) return PatternClass::B;  // tie: transitional
            winner = c;
        }
    }
    return static_cast<PatternClass>(winner);
}

std::string format_double(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

}  // namespace

RegimeMap build_regime_map(const std::vector<std::pair<ImageMeta, PatternClass>>& predictions) {
    if (predictions.empty()) throw ValidationError("build_regime_map: no predictions");

    RegimeMap map;
    map.experiment = predictions.front().first.experiment;
    map.raster_frequency = predictions.front().first.raster_lines_per_cm;

    std::set<double> velocities, tonals;
    for (const auto& [meta, cls] : predictions) {
        if (meta.experiment != map.experiment || meta.raster_lines_per_cm != map.raster_frequency) {
            throw ValidationError("build_regime_map: predictions span multiple experiments (" +
                                  map.experiment + " vs " + meta.experiment + ")");
        }
        velocities.insert(meta.velocity_m_per_min);
        tonals.insert(meta.tonal_value_pct);
    }
    map.velocities.assign(velocities.begin(), velocities.end());
    map.tonal_values.assign(tonals.begin(), tonals.end());
    map.cells.resize(map.velocities.size() * map.tonal_values.size());
    for (std::size_t vi = 0; vi < map.velocities.size(); ++vi) {
        for (std::size_t ti = 0; ti < map.tonal_values.size(); ++ti) {
            map.cell(vi, ti).velocity = map.velocities[vi];
            map.cell(vi, ti).tonal_value = map.tonal_values[ti];
        }
    }

    auto index_of = [](const std::vector<double>& axis, double v) {
        return static_cast<std::size_t>(
            std::lower_bound(axis.begin(), axis.end(), v) - axis.begin());
    };
    for (const auto& [meta, cls] : predictions) {
        auto& cell = map.cell(index_of(map.velocities, meta.velocity_m_per_min),
                              index_of(map.tonal_values, meta.tonal_value_pct));
        cell.counts[static_cast<int>(cls)]++;
    }

    std::string missing;
    for (const auto& cell : map.cells) {
        if (cell.counts[0] + cell.counts[1] + cell.counts[2] == 0) {
            missing += " (" + format_double(cell.velocity) + ", " +
                       format_double(cell.tonal_value) + ")";
        }
    }
    if (!missing.empty()) {
        throw ValidationError("build_regime_map: empty cells at (velocity, tonal value):" + missing);
    }
    for (auto& cell : map.cells) cell.majority = cell_majority(cell.counts);
    return map;
}

void extract_borders(RegimeMap& map, const std::function<void(const std::string&)>& warn) {
    map.lower_border.clear();
    map.upper_border.clear();
    auto emit = [&](const std::string& msg) {
        if (warn) warn(msg);
    };

    for (std::size_t vi = 0; vi < map.velocities.size(); ++vi) {
        const std::size_t nt = map.tonal_values.size();
        std::vector<int> maj(nt);
        for (std::size_t ti = 0; ti < nt; ++ti) maj[ti] = static_cast<int>(map.cell(vi, ti).majority);

        if (!std::is_sorted(maj.begin(), maj.end())) {
            emit("regime map: non-monotone class column at velocity " +
                 format_double(map.velocities[vi]) + "; using first transition scanning upward");
        }

        std::optional<double> lower, upper;
        for (std::size_t ti = 0; ti + 1 < nt; ++ti) {
            const bool a0 = maj[ti] == 0, a1 = maj[ti + 1] == 0;
            const bool c0 = maj[ti] == 2, c1 = maj[ti + 1] == 2;
            const double mid = 0.5 * (map.tonal_values[ti] + map.tonal_values[ti + 1]);
            if (!lower && a0 != a1) lower = mid;
            if (!upper && c0 != c1) upper = mid;
        }
        if (lower) map.lower_border.push_back({map.velocities[vi], *lower});
        if (upper) map.upper_border.push_back({map.velocities[vi], *upper});
        if (lower && upper && !(*lower < *upper)) {
            emit("regime map: borders cross at velocity " + format_double(map.velocities[vi]));
        }
    }
}

void export_regime_map_csv(const RegimeMap& map, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write regime map CSV " + path.string());
    out << "# experiment," << map.experiment << '\n';
    out << "# raster_lines_per_cm," << format_double(map.raster_frequency) << '\n';
    out << "velocity,tonal_value,count_A,count_B,count_C,majority\n";
    for (const auto& cell : map.cells) {
        out << format_double(cell.velocity) << ',' << format_double(cell.tonal_value) << ','
            << cell.counts[0] << ',' << cell.counts[1] << ',' << cell.counts[2] << ','
            << class_letter(cell.majority) << '\n';
    }
    for (const auto& bp : map.lower_border) {
        out << format_double(bp.velocity) << ",lower," << format_double(bp.tonal_value) << '\n';
    }
    for (const auto& bp : map.upper_border) {
        out << format_double(bp.velocity) << ",upper," << format_double(bp.tonal_value) << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

RegimeMap parse_regime_map_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open regime map CSV " + path.string());

    RegimeMap map;
    std::map<std::pair<double, double>, RegimeCell> cells;
    std::set<double> velocities, tonals;

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# experiment,", 0) == 0) {
            map.experiment = line.substr(std::string("# experiment,").size());
            continue;
        }
        if (line.rfind("# raster_lines_per_cm,", 0) == 0) {
            map.raster_frequency = std::stod(line.substr(std::string("# raster_lines_per_cm,").size()));
            continue;
        }
        if (line.rfind("velocity,", 0) == 0) continue;  // header

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);

        if (fields.size() == 3) {
            BorderPoint bp{std::stod(fields[0]), std::stod(fields[2])};
            (fields[1] == "lower" ? map.lower_border : map.upper_border).push_back(bp);
        } else if (fields.size() == 6) {
            RegimeCell cell;
            cell.velocity = std::stod(fields[0]);
            cell.tonal_value = std::stod(fields[1]);
            cell.counts = {static_cast<std::size_t>(std::stoull(fields[2])),
                           static_cast<std::size_t>(std::stoull(fields[3])),
                           static_cast<std::size_t>(std::stoull(fields[4]))};
            cell.majority = class_from_letter(fields[5]);
            velocities.insert(cell.velocity);
            tonals.insert(cell.tonal_value);
            cells[{cell.velocity, cell.tonal_value}] = cell;
        } else {
            throw FormatError("regime map CSV " + path.string() + ": unrecognized row '" + line + "'");
        }
    }
    map.velocities.assign(velocities.begin(), velocities.end());
    map.tonal_values.assign(tonals.begin(), tonals.end());
    map.cells.reserve(cells.size());
    for (std::size_t vi = 0; vi < map.velocities.size(); ++vi) {
        for (std::size_t ti = 0; ti < map.tonal_values.size(); ++ti) {
            auto it = cells.find({map.velocities[vi], map.tonal_values[ti]});
            if (it == cells.end()) {
                throw FormatError("regime map CSV " + path.string() + ": incomplete cell grid");
            }
            map.cells.push_back(it->second);
        }
    }
    return map;
}

void export_regime_map_svg(const RegimeMap& map, const std::filesystem::path& path) {
    const double cell_w = 40.0, cell_h = 20.0;
    const double margin_left = 70.0, margin_bottom = 50.0, margin_top = 20.0, margin_right = 20.0;
    const std::size_t nv = map.velocities.size();
    const std::size_t nt = map.tonal_values.size();
    const double plot_w = cell_w * static_cast<double>(nv);
    const double plot_h = cell_h * static_cast<double>(nt);
    const double width = margin_left + plot_w + margin_right;
    const double height = margin_top + plot_h + margin_bottom;

    // Velocity axis by grid index; tonal axis linear in value, low values at
    // the bottom.
    const double t_min = map.tonal_values.front();
    const double t_max = map.tonal_values.back();
    auto y_of_tonal = [&](double t) {
        if (t_max == t_min) return margin_top + plot_h / 2.0;
        return margin_top + plot_h * (1.0 - (t - t_min) / (t_max - t_min));
    };
    auto x_of_vindex = [&](std::size_t vi) {
        return margin_left + cell_w * (static_cast<double>(vi) + 0.5);
    };

    static const char* kClassColor[3] = {"#4e79a7", "#f1ce63", "#59a14f"};

    std::ofstream out(path);
    if (!out) throw IoError("cannot write regime map SVG " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

    for (std::size_t vi = 0; vi < nv; ++vi) {
        for (std::size_t ti = 0; ti < nt; ++ti) {
            const auto& cell = map.cell(vi, ti);
            const double x = margin_left + cell_w * static_cast<double>(vi);
            const double y = y_of_tonal(cell.tonal_value) - cell_h / 2.0;
            out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w << "\" height=\""
                << cell_h << "\" fill=\"" << kClassColor[static_cast<int>(cell.majority)]
                << "\" stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n";
        }
    }

    auto polyline = [&](const std::vector<BorderPoint>& border) {
        if (border.size() < 2) return;
        out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"";
        for (const auto& bp : border) {
            const auto vi = static_cast<std::size_t>(
                std::lower_bound(map.velocities.begin(), map.velocities.end(), bp.velocity) -
                map.velocities.begin());
            out << x_of_vindex(vi) << ',' << y_of_tonal(bp.tonal_value) << ' ';
        }
        out << "\"/>\n";
    };
    polyline(map.lower_border);
    polyline(map.upper_border);

    for (std::size_t vi = 0; vi < nv; ++vi) {
        out << "<text x=\"" << x_of_vindex(vi) << "\" y=\"" << margin_top + plot_h + 18
            << "\" font-size=\"10\" text-anchor=\"middle\">" << map.velocities[vi] << "</text>\n";
    }
    for (std::size_t ti = 0; ti < nt; ++ti) {
        out << "<text x=\"" << margin_left - 6 << "\" y=\"" << y_of_tonal(map.tonal_values[ti]) + 3
            << "\" font-size=\"9\" text-anchor=\"end\">" << map.tonal_values[ti] << "</text>\n";
    }
    out << "<text x=\"" << margin_left + plot_w / 2 << "\" y=\"" << height - 10
        << "\" font-size=\"12\" text-anchor=\"middle\">printing velocity (m/min)</text>\n";
    out << "<text x=\"14\" y=\"" << margin_top + plot_h / 2
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << margin_top + plot_h / 2 << ")\">tonal value (%)</text>\n";
    out << "</svg>\n";
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace eigenpattern
