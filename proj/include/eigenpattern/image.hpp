#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace eigenpattern {

// Decoded 8-bit raster, row-major, channels interleaved (1 = gray, 3 = RGB).
struct RawImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> bytes;
};

// Netpbm reader: P2/P5 grayscale and P3/P6 RGB, maxval <= 255. This is the
// project's documented raster format.
RawImage read_netpbm(const std::filesystem::path& file);

// Grayscale in [0,1]; RGB is converted with luma weights 0.299/0.587/0.114.
std::vector<double> to_gray01(const RawImage& img);

// Binary PGM (P5) writer; values are clamped to [0,1] and scaled to 0..255.
void write_pgm(const std::filesystem::path& file, int width, int height,
               std::span<const double> pixels01);

}  // namespace eigenpattern
