#pragma once

#include <vector>

#include "chemception/molgraph.hpp"

namespace chemception {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double norm() const;
};

double distance(Vec2 a, Vec2 b);

// A molecular graph with 2D coordinates in Angstrom, centroid at the origin.
struct DepictedMol {
  MolGraph graph;
  std::vector<Vec2> coords;
};

inline constexpr double kBondLength = 1.5;   // Angstrom (3 pixels at 0.5 A/px)
inline constexpr double kMinAtomDist = 1.0;  // below this the layout is degenerate
inline constexpr double kMaxExtent = 39.0;   // must fit the 80x80 x 0.5 A field

// Deterministic 2D depiction: rings as regular polygons with 1.5 A sides,
// fused rings reflected across the shared edge, chains as 120-degree
// zig-zags, substituents on least-crowded directions. Throws
// LayoutDegenerate when atoms cannot be pushed at least kMinAtomDist apart
// and LayoutTooLarge when the bounding box exceeds kMaxExtent.
DepictedMol layout(const MolGraph& g);

// Rigid rotation about the centroid, theta in degrees. Graph unchanged.
DepictedMol rotate(const DepictedMol& m, double theta_deg);

}  // namespace chemception
