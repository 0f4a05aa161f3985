#pragma once

#include <array>
#include <cstdint>

#include "eigenpattern/dataset.hpp"

namespace eigenpattern {

// Parameters for one synthetic pattern image. Class A is a lattice of
// Gaussian blobs, class C quasi-1-D Gaussian ridges, class B a per-region
// blend of the two.
struct SynthSpec {
    int side = 64;
    PatternClass pattern_class = PatternClass::A;
    double raster_period = 8.0;      // blob lattice spacing, pixels
    double finger_wavelength = 16.0; // ridge spacing, pixels
    double noise_amplitude = 0.0;    // additive uniform noise, [0,1]
    double phase_jitter = 0.0;       // max global translation, pixels
    double blend_fraction = 0.5;     // fraction of blob regions in class B
    std::uint64_t seed = 0;
};

// Deterministic per seed; pixels clamped to [0,1].
LabeledImage gen_image(const SynthSpec& spec);

// Per-class counts and per-class noise amplitudes for skewed datasets.
struct DatasetGenOptions {
    std::array<std::size_t, 3> class_counts{0, 0, 0};
    int side = 64;
    std::uint64_t seed = 0;
    std::array<double, 3> noise_amplitude{0.05, 0.05, 0.05};
    double phase_jitter = 8.0;
};

// 3 * per_class images with randomized per-image jitter and noise. Metadata
// cycles through a fixed 7 x 20 grid of printing velocities
// {15,30,60,90,120,180,240} m/min and tonal values {5,10,...,100} %, so
// regime maps can be built from any generated dataset of >= 140 images.
PatternDataset gen_dataset(std::size_t per_class, int side, std::uint64_t seed);
PatternDataset gen_dataset(const DatasetGenOptions& options);

}  // namespace eigenpattern
