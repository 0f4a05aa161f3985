#include "eigenpattern/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "eigenpattern/errors.hpp"

namespace eigenpattern {
namespace {

// Next whitespace-separated token, skipping '#' comments.
int next_int(std::istream& in, const std::filesystem::path& file) {
    while (in) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) {
        throw IngestionError("malformed netpbm header in " + file.string());
    }
    return value;
}

}  // namespace

RawImage read_netpbm(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IngestionError("cannot open image file " + file.string());

    char p = 0, digit = 0;
    in.get(p);
    in.get(digit);
    if (p != 'P' || (digit != '2' && digit != '3' && digit != '5' && digit != '6')) {
        throw IngestionError("unsupported image format in " + file.string() +
                             " (expected netpbm P2/P3/P5/P6)");
    }
    const bool binary = digit == '5' || digit == '6';
    const int channels = (digit == '3' || digit == '6') ? 3 : 1;

    RawImage img;
    img.channels = channels;
    img.width = next_int(in, file);
    img.height = next_int(in, file);
    const int maxval = next_int(in, file);
    if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 255) {
        throw IngestionError("unsupported netpbm dimensions/maxval in " + file.string());
    }

    const std::size_t count =
        static_cast<std::size_t>(img.width) * img.height * channels;
    img.bytes.resize(count);
    if (binary) {
        in.get();  // single whitespace after maxval
        in.read(reinterpret_cast<char*>(img.bytes.data()), static_cast<std::streamsize>(count));
        if (static_cast<std::size_t>(in.gcount()) != count) {
            throw IngestionError("truncated image data in " + file.string());
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            img.bytes[i] = static_cast<std::uint8_t>(next_int(in, file));
        }
    }
    if (maxval != 255) {
        for (auto& b : img.bytes) {
            b = static_cast<std::uint8_t>(std::lround(255.0 * b / maxval));
        }
    }
    return img;
}

std::vector<double> to_gray01(const RawImage& img) {
    const std::size_t pixels = static_cast<std::size_t>(img.width) * img.height;
    std::vector<double> gray(pixels);
    if (img.channels == 1) {
        for (std::size_t i = 0; i < pixels; ++i) gray[i] = img.bytes[i] / 255.0;
    } else {
        for (std::size_t i = 0; i < pixels; ++i) {
            const double r = img.bytes[3 * i + 0];
            const double g = img.bytes[3 * i + 1];
            const double b = img.bytes[3 * i + 2];
            gray[i] = (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
        }
    }
    return gray;
}

void write_pgm(const std::filesystem::path& file, int width, int height,
               std::span<const double> pixels01) {
    if (pixels01.size() != static_cast<std::size_t>(width) * height) {
        throw DimensionError("write_pgm: pixel count does not match dimensions");
    }
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write image file " + file.string());
    out << "P5\n" << width << " " << height << "\n255\n";
    for (double v : pixels01) {
        const double clamped = std::clamp(v, 0.0, 1.0);
        out.put(static_cast<char>(std::lround(clamped * 255.0)));
    }
    if (!out) throw IoError("write failed for " + file.string());
}

}  // namespace eigenpattern
