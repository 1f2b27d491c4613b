#pragma once

#include "drtz/core.hpp"

#include <filesystem>
#include <string>

namespace drtz::io {

/// Write via a sibling temporary file and rename into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

/// Binary 16-bit graymap (P5, maxval 65535, big-endian samples), row 0 first.
/// Values are mapped linearly so that `full_scale` becomes 65535; a zero
/// full scale yields an all-zero image.
std::string encode_pgm16(const MatrixXd& values, double full_scale);

struct Graymap {
    int maxval = 0;
    MatrixXd values; // raw sample values
};

Graymap decode_pgm(const std::string& bytes);

/// Shortest decimal that round-trips the double.
std::string format_double(double v);

} // namespace drtz::io
