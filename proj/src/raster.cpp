#include "chemception/raster.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "chemception/errors.hpp"
#include "chemception/rng.hpp"

namespace chemception {

namespace {

int snap(double coord) {
  // round half away from zero, stated so tests can be bit-exact
  double px = coord / kPixelSize;
  return static_cast<int>(px >= 0.0 ? std::floor(px + 0.5) : std::ceil(px - 0.5));
}

struct Pixel {
  int row;
  int col;
  bool operator<(const Pixel& o) const {
    return row != o.row ? row < o.row : col < o.col;
  }
  bool operator==(const Pixel& o) const { return row == o.row && col == o.col; }
};

Pixel atom_pixel(Vec2 coord) {
  return {kGridCenter + snap(coord.y), kGridCenter + snap(coord.x)};
}

// Midpoint (Bresenham) line from a to b, endpoints included.
std::vector<Pixel> trace_line(Pixel a, Pixel b) {
  std::vector<Pixel> out;
  int dx = std::abs(b.col - a.col), sx = a.col < b.col ? 1 : -1;
  int dy = -std::abs(b.row - a.row), sy = a.row < b.row ? 1 : -1;
  int err = dx + dy;
  int x = a.col, y = a.row;
  while (true) {
    out.push_back({y, x});
    if (x == b.col && y == b.row) break;
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
  return out;
}

}  // namespace

int MolImage::pixel_sum() const {
  int s = 0;
  for (std::uint8_t p : pixels) s += p;
  return s;
}

MolImage rasterize(const DepictedMol& m, const std::string& source) {
  MolImage img;
  img.source = source;

  std::set<Pixel> atom_pixels;
  std::vector<Pixel> where(m.graph.atoms.size());
  for (const Atom& a : m.graph.atoms) {
    Pixel p = atom_pixel(m.coords[a.index]);
    if (p.row < 0 || p.row >= kGridSize || p.col < 0 || p.col >= kGridSize)
      throw LayoutTooLarge("atom outside the 80x80 grid" +
                           (source.empty() ? "" : " (" + source + ")"));
    if (!atom_pixels.insert(p).second)
      throw PixelCollision("two atoms map to pixel (" + std::to_string(p.row) +
                           "," + std::to_string(p.col) + ")" +
                           (source.empty() ? "" : " in " + source));
    where[a.index] = p;
  }

  // bonds first, atoms win every tie
  for (const Bond& b : m.graph.bonds) {
    for (const Pixel& p : trace_line(where[b.a], where[b.b])) {
      if (atom_pixels.count(p)) continue;
      img.pixels[p.row * kGridSize + p.col] = kBondCode;
    }
  }
  for (const Atom& a : m.graph.atoms) {
    const Pixel& p = where[a.index];
    img.pixels[p.row * kGridSize + p.col] =
        static_cast<std::uint8_t>(a.nominal_mass());
  }
  return img;
}

MolImage augment(const DepictedMol& m, std::uint64_t rng_seed,
                 const std::string& source) {
  Rng rng(rng_seed);
  for (int attempt = 0; attempt < 8; ++attempt) {
    double theta = rng.uniform(0.0, 180.0);
    try {
      return rasterize(rotate(m, theta), source);
    } catch (const PixelCollision&) {
      if (attempt == 7) throw;
    }
  }
  throw PixelCollision("rotation augmentation failed" +
                       (source.empty() ? "" : " for " + source));
}

void export_pgm(const MolImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "P5\n" << kGridSize << " " << kGridSize << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

MolImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w != kGridSize || h != kGridSize || maxval != 255)
    throw IoError("'" + path + "' is not an 80x80 P5 greymap");
  in.get();  // single whitespace after the header
  MolImage img;
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw IoError("truncated greymap '" + path + "'");
  return img;
}

}  // namespace chemception
