#include "chemception/molgraph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "chemception/errors.hpp"

namespace chemception {

int element_index(const std::string& symbol) {
  for (int i = 0; i < static_cast<int>(std::size(kElements)); ++i) {
    if (symbol == kElements[i].symbol) return i;
  }
  return -1;
}

std::vector<std::vector<int>> MolGraph::adjacency() const {
  std::vector<std::vector<int>> adj(atoms.size());
  for (const Bond& b : bonds) {
    adj[b.a].push_back(b.b);
    adj[b.b].push_back(b.a);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

int MolGraph::heavy_mass_sum() const {
  int sum = 0;
  for (const Atom& a : atoms) sum += a.nominal_mass();
  return sum;
}

namespace {

// BFS shortest path from src, parent pointers favoring lower indices.
std::vector<int> bfs_parents(const std::vector<std::vector<int>>& adj, int src) {
  std::vector<int> parent(adj.size(), -1);
  std::vector<int> dist(adj.size(), -1);
  std::deque<int> q{src};
  dist[src] = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int n : adj[v]) {
      if (dist[n] < 0) {
        dist[n] = dist[v] + 1;
        parent[n] = v;
        q.push_back(n);
      }
    }
  }
  return parent;
}

std::vector<int> path_to_root(const std::vector<int>& parent, int v) {
  std::vector<int> path;
  for (int x = v; x != -1; x = parent[x]) path.push_back(x);
  return path;  // v ... root
}

using EdgeSet = std::set<std::pair<int, int>>;

EdgeSet cycle_edges(const std::vector<int>& cycle) {
  EdgeSet es;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    int a = cycle[i], b = cycle[(i + 1) % cycle.size()];
    es.insert({std::min(a, b), std::max(a, b)});
  }
  return es;
}

// Canonical rotation: start at the lowest index, then walk towards the
// smaller of its two ring neighbors.
std::vector<int> canonical_cycle(std::vector<int> c) {
  auto it = std::min_element(c.begin(), c.end());
  std::rotate(c.begin(), it, c.end());
  if (c.size() > 2 && c.back() < c[1]) {
    std::reverse(c.begin() + 1, c.end());
  }
  return c;
}

}  // namespace

std::vector<std::vector<int>> ring_perception(const MolGraph& g) {
  const auto adj = g.adjacency();
  const int n = static_cast<int>(g.atoms.size());
  const int cycle_rank =
      static_cast<int>(g.bonds.size()) - n + 1;  // graph is connected
  if (cycle_rank <= 0) return {};

  // Horton candidates: for every vertex v and edge (x,y), the cycle
  // sp(v,x) + (x,y) + sp(y,v) when the two paths only share v.
  struct Candidate {
    std::vector<int> cycle;
    EdgeSet edges;
  };
  std::vector<Candidate> candidates;
  for (int v = 0; v < n; ++v) {
    auto parent = bfs_parents(adj, v);
    for (const Bond& b : g.bonds) {
      int x = b.a, y = b.b;
      auto px = path_to_root(parent, x);  // x .. v
      auto py = path_to_root(parent, y);  // y .. v
      std::set<int> sx(px.begin(), px.end());
      int shared = 0;
      for (int node : py)
        if (sx.count(node)) ++shared;
      if (shared != 1) continue;  // paths must meet only at v
      // cycle: v .. x, then y .. v (drop duplicate v at the end)
      std::vector<int> cyc(px.rbegin(), px.rend());  // v .. x
      cyc.insert(cyc.end(), py.begin(), py.end() - 1);
      if (cyc.size() < 3) continue;
      candidates.push_back({canonical_cycle(std::move(cyc)), {}});
      candidates.back().edges = cycle_edges(candidates.back().cycle);
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.cycle.size() != b.cycle.size())
                return a.cycle.size() < b.cycle.size();
              return a.edges < b.edges;
            });
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [](const Candidate& a, const Candidate& b) {
                                 return a.edges == b.edges;
                               }),
                   candidates.end());

  // Greedy independence over GF(2), edge sets as sorted vectors.
  std::map<std::pair<int, int>, int> edge_id;
  for (const Bond& b : g.bonds) {
    auto key = std::make_pair(std::min(b.a, b.b), std::max(b.a, b.b));
    edge_id.emplace(key, static_cast<int>(edge_id.size()));
  }
  const std::size_t words = (edge_id.size() + 63) / 64;
  std::map<int, std::vector<std::uint64_t>> basis;  // lead bit -> row
  std::vector<std::vector<int>> rings;

  auto lead_bit = [&](const std::vector<std::uint64_t>& row) {
    for (std::size_t w = 0; w < words; ++w)
      if (row[w]) return static_cast<int>(w * 64) + std::countr_zero(row[w]);
    return -1;
  };

  for (const Candidate& cand : candidates) {
    if (static_cast<int>(rings.size()) == cycle_rank) break;
    std::vector<std::uint64_t> row(words, 0);
    for (const auto& e : cand.edges) {
      int id = edge_id.at(e);
      row[id / 64] |= 1ULL << (id % 64);
    }
    int lead = lead_bit(row);
    while (lead >= 0 && basis.count(lead)) {
      const auto& b = basis.at(lead);
      for (std::size_t w = 0; w < words; ++w) row[w] ^= b[w];
      lead = lead_bit(row);
    }
    if (lead >= 0) {
      basis.emplace(lead, std::move(row));
      rings.push_back(cand.cycle);
    }
  }
  std::sort(rings.begin(), rings.end());
  return rings;
}

void perceive_rings(MolGraph& g) { g.rings = ring_perception(g); }

}  // namespace chemception
