#include "eigenpattern/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "eigenpattern/errors.hpp"

namespace eigenpattern {
namespace {

// FFTW's planner is not thread-safe; execution with per-call arrays is.
std::mutex planner_mutex;

struct FftwBuffer {
    fftw_complex* data;
    explicit FftwBuffer(std::size_t count)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * count))) {
        if (!data) throw NumericalError("fftw_malloc failed");
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

}  // namespace

Dft2D::Dft2D(int side) : side_(side) {
    if (side < 1) throw DimensionError("Dft2D: side must be positive");
    std::lock_guard<std::mutex> lock(planner_mutex);
    FftwBuffer in(static_cast<std::size_t>(side) * side);
    FftwBuffer out(static_cast<std::size_t>(side) * side);
    forward_plan_ = fftw_plan_dft_2d(side, side, in.data, out.data, FFTW_FORWARD,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward_plan_ = fftw_plan_dft_2d(side, side, in.data, out.data, FFTW_BACKWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
}

Dft2D::~Dft2D() {
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

std::vector<std::complex<double>> Dft2D::forward(std::span<const double> pixels) const {
    const std::size_t count = static_cast<std::size_t>(side_) * side_;
    if (pixels.size() != count) {
        throw DimensionError("Dft2D::forward: expected " + std::to_string(count) +
                             " pixels, got " + std::to_string(pixels.size()));
    }
    std::vector<std::complex<double>> in(count), out(count);
    for (std::size_t i = 0; i < count; ++i) in[i] = pixels[i];
    fftw_execute_dft(static_cast<fftw_plan>(forward_plan_),
                     reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

std::vector<double> Dft2D::magnitude(std::span<const double> pixels) const {
    auto spectrum = forward(pixels);
    std::vector<double> mag(spectrum.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i) mag[i] = std::abs(spectrum[i]);
    return mag;
}

std::vector<std::complex<double>> Dft2D::inverse(
    std::span<const std::complex<double>> spectrum) const {
    const std::size_t count = static_cast<std::size_t>(side_) * side_;
    if (spectrum.size() != count) {
        throw DimensionError("Dft2D::inverse: expected " + std::to_string(count) +
                             " bins, got " + std::to_string(spectrum.size()));
    }
    std::vector<std::complex<double>> in(spectrum.begin(), spectrum.end()), out(count);
    fftw_execute_dft(static_cast<fftw_plan>(backward_plan_),
                     reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double scale = 1.0 / static_cast<double>(count);
    for (auto& v : out) v *= scale;
    return out;
}

}  // namespace eigenpattern
