#pragma once

#include <complex>
#include <span>
#include <vector>

namespace eigenpattern {

// 2-D discrete Fourier transform of square row-major grids, unnormalized
// forward convention (no 1/N factor; the inverse applies 1/N).
//
// A Dft2D owns FFTW plans for one side length. Plan creation is serialized
// internally; execution uses per-call buffers, so one instance may be shared
// by concurrent callers.
class Dft2D {
public:
    explicit Dft2D(int side);
    ~Dft2D();
    Dft2D(const Dft2D&) = delete;
    Dft2D& operator=(const Dft2D&) = delete;

    int side() const { return side_; }

    std::vector<std::complex<double>> forward(std::span<const double> pixels) const;

    // |forward(pixels)| elementwise, row-major, no fftshift.
    std::vector<double> magnitude(std::span<const double> pixels) const;

    // Inverse transform including the 1/N normalization, so
    // inverse(forward(x)) == x.
    std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> spectrum) const;

private:
    int side_;
    void* forward_plan_;
    void* backward_plan_;
};

}  // namespace eigenpattern
