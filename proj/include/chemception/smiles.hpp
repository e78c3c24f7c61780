#pragma once

#include <string>

#include "chemception/molgraph.hpp"

namespace chemception {

// Parse a practical SMILES subset into a molecular graph.
//
// Supported: organic-subset atoms (B C N O P S F Cl Br I plus H in
// brackets), aromatic lowercase forms, bracket atoms with H-count and
// charge, bond symbols - = # :, ring closures 1-9 and %nn, branches,
// stereo markers (@, /, \) which are accepted and discarded.
//
// Rejected: multi-fragment input ('.') with MultiFragment, elements outside
// the supported set and wildcards with UnsupportedElement, everything else
// malformed (isotopes, atom classes, unbalanced parentheses, unmatched ring
// closures) with SyntaxError.
//
// Implicit hydrogens are counted onto Atom::h_count, never materialized.
// Ring perception runs before returning, so MolGraph::rings is populated.
MolGraph parse_smiles(const std::string& s);

}  // namespace chemception
