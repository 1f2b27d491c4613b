#include "drtz/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace drtz::io {

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open " + tmp.string() + " for writing");
        os.write(bytes.data(), std::streamsize(bytes.size()));
        if (!os) throw Error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string encode_pgm16(const MatrixXd& values, double full_scale) {
    require(values.allFinite(), "pgm: non-finite pixel values");
    require(full_scale >= 0.0, "pgm: negative full scale");
    std::string out = "P5\n" + std::to_string(values.cols()) + " " + std::to_string(values.rows()) + "\n65535\n";
    out.reserve(out.size() + std::size_t(values.size()) * 2);
    for (Eigen::Index r = 0; r < values.rows(); ++r)
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            double v = full_scale > 0.0 ? values(r, c) / full_scale * 65535.0 : 0.0;
            v = std::clamp(std::round(v), 0.0, 65535.0);
            const auto s = static_cast<unsigned>(v);
            out.push_back(static_cast<char>((s >> 8) & 0xff));
            out.push_back(static_cast<char>(s & 0xff));
        }
    return out;
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(const std::string& bytes, std::size_t& pos) {
    for (;;) {
        while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (pos < bytes.size() && bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            continue;
        }
        break;
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
}

int header_int(const std::string& bytes, std::size_t& pos) {
    const std::string tok = header_token(bytes, pos);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || v <= 0) throw InvalidArgument("pgm: bad header field '" + tok + "'");
    return v;
}

} // namespace

Graymap decode_pgm(const std::string& bytes) {
    std::size_t pos = 0;
    if (header_token(bytes, pos) != "P5") throw InvalidArgument("pgm: expected binary graymap (P5)");
    const int width = header_int(bytes, pos);
    const int height = header_int(bytes, pos);
    const int maxval = header_int(bytes, pos);
    if (maxval > 65535) throw InvalidArgument("pgm: maxval out of range");
    ++pos; // single whitespace before the raster

    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (bytes.size() < pos + std::size_t(width) * std::size_t(height) * bpp) throw InvalidArgument("pgm: truncated raster");

    Graymap g{maxval, MatrixXd(height, width)};
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
            unsigned v = static_cast<unsigned char>(bytes[pos++]);
            if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(bytes[pos++]);
            g.values(r, c) = double(v);
        }
    return g;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw Error("format_double: conversion failed");
    return std::string(buf.data(), ptr);
}

} // namespace drtz::io
