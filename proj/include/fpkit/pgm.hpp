#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fpkit/problems/rof.hpp"

namespace fpkit {

/// Reads P2 (ASCII) or P5 (binary) grayscale images, maxval 255 or 65535,
/// mapping pixel values linearly onto [0,1].
inline rof::Image read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pgm: cannot open " + path);

    auto next_token = [&in]() {
        std::string tok;
        for (;;) {
            int c = in.get();
            if (c == EOF) throw std::runtime_error("read_pgm: truncated header");
            if (c == '#') {
                std::string line;
                std::getline(in, line);
                continue;
            }
            if (std::isspace(c)) {
                if (!tok.empty()) return tok;
                continue;
            }
            tok.push_back(static_cast<char>(c));
        }
    };

    std::string magic = next_token();
    if (magic != "P2" && magic != "P5") throw std::runtime_error("read_pgm: not a PGM file");
    long cols = std::stol(next_token());
    long rows = std::stol(next_token());
    long maxval = std::stol(next_token());
    if (rows <= 0 || cols <= 0 || (maxval != 255 && maxval != 65535))
        throw std::runtime_error("read_pgm: unsupported geometry or maxval");

    rof::Image img(rows, cols);
    const double scale = 1.0 / static_cast<double>(maxval);
    if (magic == "P2") {
        for (long k = 0; k < rows * cols; ++k) img.pix[k] = std::stol(next_token()) * scale;
    } else {
        for (long k = 0; k < rows * cols; ++k) {
            if (maxval == 255) {
                int c = in.get();
                if (c == EOF) throw std::runtime_error("read_pgm: truncated data");
                img.pix[k] = c * scale;
            } else {
                int hi = in.get(), lo = in.get();
                if (hi == EOF || lo == EOF) throw std::runtime_error("read_pgm: truncated data");
                img.pix[k] = (hi * 256 + lo) * scale;
            }
        }
    }
    return img;
}

inline void write_pgm(const std::string& path, const rof::Image& img, int maxval = 255,
                      bool binary = true) {
    if (maxval != 255 && maxval != 65535) throw std::invalid_argument("write_pgm: bad maxval");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
    out << (binary ? "P5" : "P2") << "\n" << img.cols << " " << img.rows << "\n" << maxval << "\n";
    for (long k = 0; k < img.rows * img.cols; ++k) {
        double v = img.pix[k];
        v = std::min(1.0, std::max(0.0, v));
        long q = std::lround(v * maxval);
        if (binary) {
            if (maxval == 255) {
                out.put(static_cast<char>(q));
            } else {
                out.put(static_cast<char>(q / 256));
                out.put(static_cast<char>(q % 256));
            }
        } else {
            out << q << (k % img.cols == img.cols - 1 ? '\n' : ' ');
        }
    }
}

}  // namespace fpkit
