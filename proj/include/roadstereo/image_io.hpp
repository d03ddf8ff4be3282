#pragma once

#include <filesystem>
#include <iosfwd>

#include "roadstereo/image.hpp"

namespace roadstereo {

// Binary PGM ("P5", maxval 255). Header comments are accepted on read; the
// writer always emits the canonical "P5\n<w> <h>\n255\n" header.
GrayImage read_pgm(std::istream& in);
void write_pgm(std::ostream& out, const GrayImage& image);

// Grayscale PFM ("Pf"). Both byte orders are accepted on read; rows are
// stored bottom-to-top and written little-endian with scale -1. Invalid
// disparities are stored as the float quiet NaN 0x7fc00000.
DisparityMap read_pfm(std::istream& in);
void write_pfm(std::ostream& out, const DisparityMap& map);

GrayImage load_pgm(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const GrayImage& image);
DisparityMap load_pfm(const std::filesystem::path& path);
void save_pfm(const std::filesystem::path& path, const DisparityMap& map);

}  // namespace roadstereo
