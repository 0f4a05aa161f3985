#include "eigenpattern/synth.hpp"

#include <cmath>
#include <random>

#include "eigenpattern/errors.hpp"
#include "eigenpattern/parallel.hpp"

namespace eigenpattern {
namespace {

constexpr double kVelocityGrid[7] = {15, 30, 60, 90, 120, 180, 240};
constexpr int kTonalCount = 20;  // 5% .. 100% in steps of 5

// Distance from x to the nearest multiple of period, after subtracting offset.
double wrapped_distance(double x, double period, double offset) {
    double u = std::fmod(x - offset, period);
    if (u < 0) u += period;
    return std::min(u, period - u);
}

void validate(const SynthSpec& spec) {
    if (spec.raster_period < 2.0 || spec.finger_wavelength < 2.0) {
        throw ValidationError("gen_image: raster period and finger wavelength must be >= 2 px");
    }
    if (spec.side < 4.0 * std::max(spec.raster_period, spec.finger_wavelength)) {
        throw ValidationError("gen_image: side must be >= 4x the largest pattern scale");
    }
    if (spec.noise_amplitude < 0.0 || spec.noise_amplitude > 1.0 || spec.blend_fraction < 0.0 ||
        spec.blend_fraction > 1.0 || spec.phase_jitter < 0.0) {
        throw ValidationError("gen_image: noise, blend fraction, or jitter out of range");
    }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

LabeledImage gen_image(const SynthSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double ox = spec.phase_jitter * unit(rng);
    const double oy = spec.phase_jitter * unit(rng);
    const double meander_phase = 2.0 * M_PI * unit(rng);
    const int meander_waves = 1 + static_cast<int>(unit(rng) * 2.0);

    const double sigma_blob = spec.raster_period / 5.0;
    const double sigma_ridge = spec.finger_wavelength / 5.0;
    const int side = spec.side;

    auto blob_value = [&](int x, int y) {
        const double dx = wrapped_distance(x, spec.raster_period, ox);
        const double dy = wrapped_distance(y, spec.raster_period, oy);
        return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_blob * sigma_blob));
    };
    auto ridge_value = [&](int x, int y) {
        const double meander =
            spec.phase_jitter * 0.5 *
            std::sin(2.0 * M_PI * meander_waves * y / static_cast<double>(side) + meander_phase);
        const double d = wrapped_distance(x, spec.finger_wavelength, ox + meander);
        return std::exp(-d * d / (2.0 * sigma_ridge * sigma_ridge));
    };

    // Class B: block-wise assignment of blob vs ridge regions.
    const int block = std::max(side / 4, 1);
    const int blocks_per_row = (side + block - 1) / block;
    std::vector<bool> block_is_blob;
    if (spec.pattern_class == PatternClass::B) {
        block_is_blob.resize(static_cast<std::size_t>(blocks_per_row) * blocks_per_row);
        for (auto&& flag : block_is_blob) flag = unit(rng) < spec.blend_fraction;
    }

    LabeledImage img;
    img.side = side;
    img.label = spec.pattern_class;
    img.pixels.resize(static_cast<std::size_t>(side) * side);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            double v;
            switch (spec.pattern_class) {
                case PatternClass::A:
                    v = blob_value(x, y);
                    break;
                case PatternClass::C:
                    v = ridge_value(x, y);
                    break;
                case PatternClass::B:
                default: {
                    const std::size_t bi =
                        static_cast<std::size_t>(y / block) * blocks_per_row + x / block;
                    v = block_is_blob[bi] ? blob_value(x, y) : ridge_value(x, y);
                    break;
                }
            }
            img.pixels[static_cast<std::size_t>(y) * side + x] = v;
        }
    }
    if (spec.noise_amplitude > 0.0) {
        std::uniform_real_distribution<double> noise(-spec.noise_amplitude, spec.noise_amplitude);
        for (auto& p : img.pixels) p = std::clamp(p + noise(rng), 0.0, 1.0);
    }
    return img;
}

PatternDataset gen_dataset(std::size_t per_class, int side, std::uint64_t seed) {
    DatasetGenOptions options;
    options.class_counts = {per_class, per_class, per_class};
    options.side = side;
    options.seed = seed;
    return gen_dataset(options);
}

PatternDataset gen_dataset(const DatasetGenOptions& options) {
    const std::size_t total =
        options.class_counts[0] + options.class_counts[1] + options.class_counts[2];
    if (total == 0) throw ValidationError("gen_dataset: no images requested");

    // Interleave classes so metadata cells receive a mixture.
    std::vector<PatternClass> order;
    order.reserve(total);
    std::array<std::size_t, 3> remaining = options.class_counts;
    while (order.size() < total) {
        for (int c = 0; c < 3; ++c) {
            if (remaining[c] > 0) {
                order.push_back(static_cast<PatternClass>(c));
                remaining[c]--;
            }
        }
    }

    PatternDataset ds;
    ds.images.resize(total);
    parallel_for(total, [&](std::size_t i) {
        const int c = static_cast<int>(order[i]);
        SynthSpec spec;
        spec.side = options.side;
        spec.pattern_class = order[i];
        spec.raster_period = options.side / 8.0;
        spec.finger_wavelength = options.side / 4.0;
        spec.noise_amplitude = options.noise_amplitude[c];
        spec.phase_jitter = options.phase_jitter;
        spec.seed = mix_seed(options.seed, i);
        LabeledImage img = gen_image(spec);

        const std::size_t cell = i % (7 * kTonalCount);
        img.meta.experiment = "SYN-01";
        img.meta.velocity_m_per_min = kVelocityGrid[cell / kTonalCount];
        img.meta.tonal_value_pct = 5.0 * static_cast<double>(cell % kTonalCount + 1);
        img.meta.raster_lines_per_cm = 60.0;
        img.meta.electrostatic_assist = false;
        ds.images[i] = std::move(img);
    });
    return ds;
}

}  // namespace eigenpattern
