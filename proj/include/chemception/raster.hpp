#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "chemception/layout.hpp"

namespace chemception {

inline constexpr int kGridSize = 80;
inline constexpr double kPixelSize = 0.5;  // Angstrom per pixel
inline constexpr int kGridCenter = 40;
inline constexpr int kBondCode = 2;

// 80x80 grid of integer codes: 0 vacuum, 2 bond, element nominal mass for
// atoms. Row-major, origin top-left; pixel (row, col) = pixels[row*80+col].
struct MolImage {
  std::array<std::uint8_t, kGridSize * kGridSize> pixels{};
  std::string source;

  std::uint8_t at(int row, int col) const { return pixels[row * kGridSize + col]; }
  int pixel_sum() const;
};

// Snap coordinates to the grid (centroid at pixel (40,40), round half away
// from zero), stamp atom pixels with nominal masses, trace bond interiors
// with the midpoint line algorithm. Atom pixels are never overwritten by
// bond pixels. Throws PixelCollision when two atoms share a pixel.
MolImage rasterize(const DepictedMol& m, const std::string& source = "");

// Rotation augmentation: theta ~ Uniform[0, 180) degrees from the seeded
// generator, coordinates rotated then re-rasterized so the integer codes
// stay exact. On a rotation-induced atom collision the angle is resampled
// up to 8 times before PixelCollision propagates.
MolImage augment(const DepictedMol& m, std::uint64_t rng_seed,
                 const std::string& source = "");

// Binary PGM (P5), 80x80, maxval 255.
void export_pgm(const MolImage& img, const std::string& path);
MolImage load_pgm(const std::string& path);

}  // namespace chemception
