#include "eigenpattern/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "eigenpattern/errors.hpp"
#include "eigenpattern/fft.hpp"
#include "eigenpattern/image.hpp"
#include "eigenpattern/parallel.hpp"

namespace eigenpattern {
namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

bool parse_flag(const std::string& token) {
    std::string t = trim(token);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "1" || t == "true" || t == "on" || t == "yes") return true;
    if (t == "0" || t == "false" || t == "off" || t == "no" || t.empty()) return false;
    throw IngestionError("unrecognized esa flag '" + token + "'");
}

PatternDataset select_images(const PatternDataset& ds, std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    PatternDataset out;
    out.images.reserve(indices.size());
    for (std::size_t i : indices) out.images.push_back(ds.images[i]);
    return out;
}

}  // namespace

PatternClass class_from_letter(const std::string& token) {
    std::string t = trim(token);
    if (t == "A") return PatternClass::A;
    if (t == "B") return PatternClass::B;
    if (t == "C") return PatternClass::C;
    throw IngestionError("unknown label '" + token + "' (expected A, B, or C)");
}

std::array<std::size_t, 3> PatternDataset::label_counts() const {
    std::array<std::size_t, 3> counts{0, 0, 0};
    for (const auto& img : images) counts[static_cast<int>(img.label)]++;
    return counts;
}

PatternDataset load_dataset(const std::filesystem::path& image_dir,
                            const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw IngestionError("cannot open manifest " + manifest.string());

    std::string line;
    if (!std::getline(in, line)) throw IngestionError("empty manifest " + manifest.string());

    PatternDataset ds;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto fields = split_csv_row(line);
        if (fields.size() != 7) {
            throw IngestionError("manifest row " + std::to_string(row) + ": expected 7 fields, got " +
                                 std::to_string(fields.size()));
        }
        LabeledImage img;
        const std::filesystem::path file = image_dir / trim(fields[0]);
        try {
            img.label = class_from_letter(fields[1]);
            img.meta.experiment = trim(fields[2]);
            img.meta.velocity_m_per_min = std::stod(fields[3]);
            img.meta.tonal_value_pct = std::stod(fields[4]);
            img.meta.raster_lines_per_cm = std::stod(fields[5]);
            img.meta.electrostatic_assist = parse_flag(fields[6]);

            RawImage raw = read_netpbm(file);
            if (raw.width != raw.height) {
                throw IngestionError("image is not square (" + std::to_string(raw.width) + "x" +
                                     std::to_string(raw.height) + ")");
            }
            img.side = raw.width;
            img.pixels = to_gray01(raw);
        } catch (const Error& e) {
            throw IngestionError("manifest row " + std::to_string(row) + " (" + trim(fields[0]) +
                                 "): " + e.what());
        } catch (const std::exception& e) {
            throw IngestionError("manifest row " + std::to_string(row) + " (" + trim(fields[0]) +
                                 "): invalid numeric field: " + e.what());
        }
        if (!ds.images.empty() && img.side != ds.side()) {
            throw IngestionError("manifest row " + std::to_string(row) + " (" + trim(fields[0]) +
                                 "): image side " + std::to_string(img.side) +
                                 " differs from dataset side " + std::to_string(ds.side()));
        }
        ds.images.push_back(std::move(img));
    }
    if (ds.images.empty()) throw IngestionError("manifest " + manifest.string() + " lists no images");
    return ds;
}

void save_dataset(const PatternDataset& ds, const std::filesystem::path& image_dir,
                  const std::filesystem::path& manifest) {
    std::filesystem::create_directories(image_dir);
    std::ofstream out(manifest);
    if (!out) throw IoError("cannot write manifest " + manifest.string());
    out << "file,label,experiment,velocity_m_per_min,tonal_value_pct,raster_lines_per_cm,esa\n";
    for (std::size_t i = 0; i < ds.images.size(); ++i) {
        const auto& img = ds.images[i];
        char name[32];
        std::snprintf(name, sizeof(name), "img_%05zu.pgm", i);
        write_pgm(image_dir / name, img.side, img.side, img.pixels);
        out << name << ',' << class_letter(img.label) << ',' << img.meta.experiment << ','
            << img.meta.velocity_m_per_min << ',' << img.meta.tonal_value_pct << ','
            << img.meta.raster_lines_per_cm << ',' << (img.meta.electrostatic_assist ? 1 : 0)
            << '\n';
    }
    if (!out) throw IoError("write failed for " + manifest.string());
}

DenseMatrix to_data_matrix(const PatternDataset& ds) {
    if (ds.images.empty()) throw DimensionError("to_data_matrix: empty dataset");
    const int side = ds.side();
    const Eigen::Index n = static_cast<Eigen::Index>(side) * side;
    DenseMatrix x(n, static_cast<Eigen::Index>(ds.size()));
    for (std::size_t k = 0; k < ds.size(); ++k) {
        const auto& px = ds.images[k].pixels;
        for (Eigen::Index i = 0; i < n; ++i) x(i, static_cast<Eigen::Index>(k)) = px[i];
    }
    return x;
}

std::vector<double> fft_magnitude_pixels(std::span<const double> pixels, int side) {
    Dft2D dft(side);
    return dft.magnitude(pixels);
}

DenseMatrix fft_magnitude(const PatternDataset& ds) {
    if (ds.images.empty()) throw DimensionError("fft_magnitude: empty dataset");
    const int side = ds.side();
    const Eigen::Index n = static_cast<Eigen::Index>(side) * side;
    DenseMatrix x(n, static_cast<Eigen::Index>(ds.size()));
    Dft2D dft(side);
    parallel_for(ds.size(), [&](std::size_t k) {
        auto mag = dft.magnitude(ds.images[k].pixels);
        for (Eigen::Index i = 0; i < n; ++i) x(i, static_cast<Eigen::Index>(k)) = mag[i];
    });
    return x;
}

PatternDataset balance(const PatternDataset& ds, std::uint64_t seed,
                       std::optional<std::size_t> per_class) {
    auto counts = ds.label_counts();
    const std::size_t min_count = *std::min_element(counts.begin(), counts.end());
    if (min_count == 0) throw ValidationError("balance: a class is absent from the dataset");
    const std::size_t target = per_class.value_or(min_count);
    for (int c = 0; c < 3; ++c) {
        if (target > counts[c]) {
            throw ValidationError(std::string("balance: requested ") + std::to_string(target) +
                                  " per class but class " + class_letter(static_cast<PatternClass>(c)) +
                                  " has only " + std::to_string(counts[c]));
        }
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> selected;
    for (int c = 0; c < 3; ++c) {
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (static_cast<int>(ds.images[i].label) == c) pool.push_back(i);
        }
        std::shuffle(pool.begin(), pool.end(), rng);
        selected.insert(selected.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(target));
    }
    return select_images(ds, std::move(selected));
}

std::pair<PatternDataset, PatternDataset> train_test_split(const PatternDataset& ds,
                                                           double train_fraction,
                                                           std::uint64_t seed, bool stratified) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValidationError("train_test_split: train fraction must be in (0,1)");
    }
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> train_idx, test_idx;

    auto split_indices = [&](std::vector<std::size_t> pool) {
        std::shuffle(pool.begin(), pool.end(), rng);
        const auto n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(pool.size())));
        train_idx.insert(train_idx.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
        test_idx.insert(test_idx.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_train), pool.end());
    };

    if (stratified) {
        for (int c = 0; c < 3; ++c) {
            std::vector<std::size_t> pool;
            for (std::size_t i = 0; i < ds.size(); ++i) {
                if (static_cast<int>(ds.images[i].label) == c) pool.push_back(i);
            }
            if (!pool.empty()) split_indices(std::move(pool));
        }
    } else {
        std::vector<std::size_t> pool(ds.size());
        std::iota(pool.begin(), pool.end(), 0);
        split_indices(std::move(pool));
    }
    if (train_idx.empty() || test_idx.empty()) {
        throw ValidationError("train_test_split: split leaves an empty side (m=" +
                              std::to_string(ds.size()) + ", fraction=" +
                              std::to_string(train_fraction) + ")");
    }
    return {select_images(ds, std::move(train_idx)), select_images(ds, std::move(test_idx))};
}

NormalizationStats fit_normalization(const DenseMatrix& coords) {
    if (coords.cols() < 2) throw ValidationError("fit_normalization: need at least 2 samples");
    NormalizationStats stats;
    stats.mean = coords.rowwise().mean();
    const Eigen::Index m = coords.cols();
    DenseMatrix centered = coords.colwise() - stats.mean;
    stats.stddev = (centered.array().square().rowwise().sum() / static_cast<double>(m - 1))
                       .sqrt()
                       .matrix();
    for (Eigen::Index i = 0; i < stats.stddev.size(); ++i) {
        if (stats.stddev[i] <= 0.0) {
            throw NumericalError("fit_normalization: feature " + std::to_string(i) +
                                 " has zero variance");
        }
    }
    return stats;
}

DenseMatrix apply_normalization(const NormalizationStats& stats, const DenseMatrix& coords) {
    if (coords.rows() != stats.mean.size()) {
        throw DimensionError("apply_normalization: feature count mismatch");
    }
    return (coords.colwise() - stats.mean).array().colwise() / stats.stddev.array();
}

}  // namespace eigenpattern
