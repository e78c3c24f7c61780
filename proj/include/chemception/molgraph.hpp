#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace chemception {

// Supported element table. The raster encoding writes each atom's nominal
// mass into its pixel, and the value 2 is reserved for bonds, so every mass
// here must differ from 2 (helium is deliberately absent).
struct Element {
  const char* symbol;
  int nominal_mass;
};

inline constexpr Element kElements[] = {
    {"H", 1},  {"B", 11},  {"C", 12},  {"N", 14}, {"O", 16}, {"F", 19},
    {"P", 31}, {"S", 32},  {"Cl", 35}, {"Br", 80}, {"I", 127},
};

// Index into kElements, or -1 if the symbol is not supported.
int element_index(const std::string& symbol);

enum class BondOrder : std::uint8_t { Single, Double, Triple, Aromatic };

struct Atom {
  int element;        // index into kElements
  bool aromatic = false;
  int charge = 0;     // parsed, ignored downstream
  int h_count = 0;    // implicit hydrogens (counted, never materialized)
  int index = 0;      // ordinal within the molecule

  int nominal_mass() const { return kElements[element].nominal_mass; }
  const char* symbol() const { return kElements[element].symbol; }
};

struct Bond {
  int a;
  int b;
  BondOrder order;
};

struct MolGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  // Minimal cycle basis, each cycle a closed atom-index walk
  // (first atom not repeated at the end). Filled by perceive_rings.
  std::vector<std::vector<int>> rings;

  std::size_t atom_count() const { return atoms.size(); }
  std::size_t bond_count() const { return bonds.size(); }

  std::vector<std::vector<int>> adjacency() const;
  int heavy_mass_sum() const;
};

// Minimal cycle basis via Horton's algorithm: candidate cycles from
// shortest paths, greedily kept if independent over GF(2). Deterministic:
// candidates ordered by (length, lexicographic edge set) and each cycle is
// rotated to start at its lowest atom index, walking towards its smaller
// neighbor.
std::vector<std::vector<int>> ring_perception(const MolGraph& g);

// Convenience: run ring_perception and store the result on the graph.
void perceive_rings(MolGraph& g);

}  // namespace chemception
