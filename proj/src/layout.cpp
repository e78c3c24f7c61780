#include "chemception/layout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>

#include "chemception/errors.hpp"

namespace chemception {

double Vec2::norm() const { return std::hypot(x, y); }

double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec2 from_angle(double rad) { return {std::cos(rad), std::sin(rad)}; }

double angle_of(Vec2 v) { return std::atan2(v.y, v.x); }

Vec2 rotated(Vec2 v, double rad) {
  double c = std::cos(rad), s = std::sin(rad);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

double ang_dist(double a, double b) {
  double d = std::fmod(std::fabs(a - b), 2 * kPi);
  return std::min(d, 2 * kPi - d);
}

double polygon_radius(std::size_t k) {
  return kBondLength / (2.0 * std::sin(kPi / static_cast<double>(k)));
}

// ---------- ring systems ----------

struct RingSystems {
  std::vector<int> atom_system;            // atom -> system id or -1
  std::vector<std::vector<int>> rings_of;  // system id -> ring indices
  int count = 0;
};

RingSystems find_ring_systems(const MolGraph& g) {
  RingSystems rs;
  rs.atom_system.assign(g.atoms.size(), -1);
  std::vector<int> ring_sys(g.rings.size(), -1);
  for (std::size_t r = 0; r < g.rings.size(); ++r) {
    int sys = -1;
    for (int a : g.rings[r])
      if (rs.atom_system[a] >= 0) sys = rs.atom_system[a];
    if (sys < 0) sys = rs.count++;
    // merging: a ring may touch two previously separate systems
    std::set<int> touched;
    for (int a : g.rings[r])
      if (rs.atom_system[a] >= 0) touched.insert(rs.atom_system[a]);
    for (int a : g.rings[r]) rs.atom_system[a] = sys;
    ring_sys[r] = sys;
    if (touched.size() > 1) {
      for (auto& s : rs.atom_system)
        if (s >= 0 && touched.count(s)) s = sys;
      for (auto& s : ring_sys)
        if (s >= 0 && touched.count(s)) s = sys;
    }
  }
  rs.rings_of.assign(rs.count, {});
  for (std::size_t r = 0; r < g.rings.size(); ++r)
    rs.rings_of[ring_sys[r]].push_back(static_cast<int>(r));
  return rs;
}

// Local coordinates for one ring system: first ring as a regular polygon,
// fused rings reflected across the shared edge, spiro rings extended
// outward, bridged leftovers interpolated on the circumcircle.
std::map<int, Vec2> layout_ring_system(const MolGraph& g,
                                       const std::vector<int>& ring_ids) {
  std::map<int, Vec2> local;
  std::vector<bool> done(ring_ids.size(), false);

  auto placed_count = [&](const std::vector<int>& cycle) {
    int n = 0;
    for (int a : cycle)
      if (local.count(a)) ++n;
    return n;
  };

  for (std::size_t placed_rings = 0; placed_rings < ring_ids.size();
       ++placed_rings) {
    // next ring: most placed atoms, then listing order
    int pick = -1, best = -1;
    for (std::size_t i = 0; i < ring_ids.size(); ++i) {
      if (done[i]) continue;
      int c = placed_count(g.rings[ring_ids[i]]);
      if (placed_rings == 0) c = 0;
      if (c > best) {
        best = c;
        pick = static_cast<int>(i);
      }
    }
    done[pick] = true;
    const std::vector<int>& cycle = g.rings[ring_ids[pick]];
    const std::size_t k = cycle.size();
    const double radius = polygon_radius(k);

    std::vector<int> anchors;
    for (std::size_t i = 0; i < k; ++i)
      if (local.count(cycle[i])) anchors.push_back(static_cast<int>(i));

    if (anchors.empty()) {
      // regular polygon, first atom on top, clockwise
      for (std::size_t t = 0; t < k; ++t) {
        double a = kPi / 2 - 2 * kPi * static_cast<double>(t) / k;
        local[cycle[t]] = from_angle(a) * radius;
      }
      continue;
    }

    // centroid of everything placed so far, used to pick the outward side
    Vec2 placed_centroid{0, 0};
    for (const auto& [_, p] : local) placed_centroid = placed_centroid + p;
    placed_centroid = placed_centroid * (1.0 / static_cast<double>(local.size()));

    bool shared_edge =
        anchors.size() == 2 &&
        ((anchors[1] - anchors[0]) == 1 ||
         (anchors[0] == 0 && anchors[1] == static_cast<int>(k) - 1));
    if (shared_edge) {
      // fused: new polygon center mirrored across the shared edge
      int iu = anchors[0], iv = anchors[1];
      if (anchors[0] == 0 && anchors[1] == static_cast<int>(k) - 1)
        std::swap(iu, iv);  // make iv -> iu a single cycle step
      Vec2 u = local[cycle[iu]], v = local[cycle[iv]];
      Vec2 mid = (u + v) * 0.5;
      Vec2 edge = v - u;
      Vec2 perp{-edge.y, edge.x};
      double pn = perp.norm();
      if (pn < 1e-12) throw LayoutDegenerate("zero-length ring edge");
      perp = perp * (1.0 / pn);
      double apothem = std::sqrt(std::max(
          radius * radius - 0.25 * (edge.norm() * edge.norm()), 0.0));
      Vec2 away = mid - placed_centroid;
      if (away.x * perp.x + away.y * perp.y < 0) perp = perp * -1.0;
      Vec2 center = mid + perp * apothem;

      double av = angle_of(v - center);
      double au = angle_of(u - center);
      // walk the cycle from iv the long way round to iu
      double step = 2 * kPi / static_cast<double>(k);
      double diff = std::remainder(au - av, 2 * kPi);
      double delta = diff > 0 ? step : -step;
      // after k-1 steps of delta we must land on au; flip if not
      double land = std::remainder(av + delta * (double)(k - 1) - au, 2 * kPi);
      if (std::fabs(land) > 1e-6) delta = -delta;
      for (std::size_t t = 1; t < k - 1; ++t) {
        int idx = (iv + static_cast<int>(t)) % static_cast<int>(k);
        if (local.count(cycle[idx])) continue;
        local[cycle[idx]] =
            center + from_angle(av + delta * static_cast<double>(t)) * radius;
      }
      continue;
    }

    if (anchors.size() == 1) {
      // spiro: extend outward from the shared atom
      Vec2 u = local[cycle[anchors[0]]];
      Vec2 dir = u - placed_centroid;
      if (dir.norm() < 1e-9) dir = {1.0, 0.0};
      dir = dir * (1.0 / dir.norm());
      Vec2 center = u + dir * radius;
      double a0 = angle_of(u - center);
      for (std::size_t t = 1; t < k; ++t) {
        int idx = (anchors[0] + static_cast<int>(t)) % static_cast<int>(k);
        if (!local.count(cycle[idx]))
          local[cycle[idx]] =
              center +
              from_angle(a0 + 2 * kPi * static_cast<double>(t) / k) * radius;
      }
      continue;
    }

    // bridged / multi-anchored: interpolate unplaced runs on the circle
    // around the anchor centroid. Imperfect by design; the overlap check
    // decides whether the result survives.
    Vec2 center{0, 0};
    for (int ai : anchors) center = center + local[cycle[ai]];
    center = center * (1.0 / static_cast<double>(anchors.size()));
    for (std::size_t s = 0; s < anchors.size(); ++s) {
      int ia = anchors[s];
      int ib = anchors[(s + 1) % anchors.size()];
      int gap = (ib - ia + static_cast<int>(k)) % static_cast<int>(k);
      if (gap <= 1) continue;
      double aa = angle_of(local[cycle[ia]] - center);
      double ab = angle_of(local[cycle[ib]] - center);
      double span = std::remainder(ab - aa, 2 * kPi);
      if (std::fabs(span) < 1e-9) span = 2 * kPi / static_cast<double>(k);
      for (int t = 1; t < gap; ++t) {
        int idx = (ia + t) % static_cast<int>(k);
        if (local.count(cycle[idx])) continue;
        double a = aa + span * static_cast<double>(t) / static_cast<double>(gap);
        local[cycle[idx]] = center + from_angle(a) * radius;
      }
    }
  }
  return local;
}

// ---------- global assembly ----------

struct Placement {
  std::vector<Vec2> pos;
  std::vector<bool> placed;
  // unit = ring system (id >= 0) or single acyclic atom; used for the
  // rigid-branch overlap resolution
  std::vector<int> atom_unit;
  std::vector<std::vector<int>> unit_atoms;
  std::vector<int> unit_parent;       // parent unit id or -1
  std::vector<int> unit_attach_atom;  // atom in parent unit we hang from
  std::vector<int> turn;              // zig-zag parity per atom
};

class Assembler {
 public:
  Assembler(const MolGraph& g) : g_(g), adj_(g.adjacency()), rs_(find_ring_systems(g)) {
    p_.pos.assign(g.atoms.size(), {0, 0});
    p_.placed.assign(g.atoms.size(), false);
    p_.turn.assign(g.atoms.size(), 1);
    p_.atom_unit.assign(g.atoms.size(), -1);
    // units: ring systems first, then one per acyclic atom
    p_.unit_atoms.assign(rs_.count, {});
    for (std::size_t a = 0; a < g.atoms.size(); ++a) {
      int sys = rs_.atom_system[a];
      if (sys >= 0) {
        p_.atom_unit[a] = sys;
        p_.unit_atoms[sys].push_back(static_cast<int>(a));
      } else {
        p_.atom_unit[a] = static_cast<int>(p_.unit_atoms.size());
        p_.unit_atoms.push_back({static_cast<int>(a)});
      }
    }
    p_.unit_parent.assign(p_.unit_atoms.size(), -1);
    p_.unit_attach_atom.assign(p_.unit_atoms.size(), -1);
    locals_.resize(rs_.count);
    for (int s = 0; s < rs_.count; ++s)
      locals_[s] = layout_ring_system(g_, rs_.rings_of[s]);
  }

  Placement run() {
    place_root(0);
    // deterministic DFS; a ring system enters the stack as a whole
    std::vector<int> stack;
    std::vector<bool> visited(g_.atoms.size(), false);
    auto push_unit = [&](int unit) {
      for (auto it = p_.unit_atoms[unit].rbegin();
           it != p_.unit_atoms[unit].rend(); ++it)
        stack.push_back(*it);
    };
    push_unit(p_.atom_unit[0]);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      if (visited[u]) continue;
      visited[u] = true;
      for (int v : adj_[u]) {
        if (p_.placed[v]) continue;
        place_neighbor(u, v);
        push_unit(p_.atom_unit[v]);
      }
    }
    return std::move(p_);
  }

 private:
  void place_root(int a) {
    int unit = p_.atom_unit[a];
    if (unit < rs_.count) {
      Vec2 origin = locals_[unit].at(a);
      for (int w : p_.unit_atoms[unit]) {
        p_.pos[w] = locals_[unit].at(w) - origin;
        p_.placed[w] = true;
      }
    } else {
      p_.pos[a] = {0, 0};
      p_.placed[a] = true;
    }
  }

  std::vector<double> placed_directions(int u) const {
    std::vector<double> dirs;
    for (int v : adj_[u])
      if (p_.placed[v]) dirs.push_back(angle_of(p_.pos[v] - p_.pos[u]));
    return dirs;
  }

  // direction for the next substituent leaving atom u
  double choose_direction(int u) {
    auto dirs = placed_directions(u);
    if (dirs.empty()) return 0.0;
    bool chain = dirs.size() == 1 && p_.atom_unit[u] >= rs_.count;
    if (chain) {
      // 120-degree zig-zag: turn +-60 degrees off the incoming direction
      double incoming = dirs[0] + kPi;  // direction parent -> u
      return incoming + p_.turn[u] * kPi / 3.0;
    }
    // least crowded of 12 directions on a 30-degree grid
    double best_score = -1.0, best_angle = 0.0;
    for (int k = 0; k < 12; ++k) {
      double cand = k * kPi / 6.0;
      double score = std::numeric_limits<double>::max();
      for (double d : dirs) score = std::min(score, ang_dist(cand, d));
      if (score > best_score + 1e-12) {
        best_score = score;
        best_angle = cand;
      }
    }
    return best_angle;
  }

  void place_neighbor(int u, int v) {
    double dir = choose_direction(u);
    Vec2 target = p_.pos[u] + from_angle(dir) * kBondLength;
    int unit = p_.atom_unit[v];
    if (unit < rs_.count) {
      // rigid ring system: anchor v at target, centroid pointing away from u
      const auto& local = locals_[unit];
      Vec2 lv = local.at(v);
      Vec2 lcent{0, 0};
      for (const auto& [_, pnt] : local) lcent = lcent + pnt;
      lcent = lcent * (1.0 / static_cast<double>(local.size()));
      Vec2 axis = lcent - lv;
      double rot = axis.norm() < 1e-9 ? 0.0 : dir - angle_of(axis);
      for (int w : p_.unit_atoms[unit]) {
        p_.pos[w] = target + rotated(local.at(w) - lv, rot);
        p_.placed[w] = true;
      }
    } else {
      p_.pos[v] = target;
      p_.placed[v] = true;
      p_.turn[v] = -p_.turn[u];
    }
    p_.unit_parent[unit] = p_.atom_unit[u];
    p_.unit_attach_atom[unit] = u;
  }

  const MolGraph& g_;
  std::vector<std::vector<int>> adj_;
  RingSystems rs_;
  std::vector<std::map<int, Vec2>> locals_;
  Placement p_;
};

// ---------- overlap resolution ----------

std::optional<std::pair<int, int>> closest_clash(const std::vector<Vec2>& pos) {
  double worst = kMinAtomDist;
  std::optional<std::pair<int, int>> pair;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) {
      double d = distance(pos[i], pos[j]);
      if (d < worst - 1e-12) {
        worst = d;
        pair = {static_cast<int>(i), static_cast<int>(j)};
      }
    }
  }
  return pair;
}

class OverlapResolver {
 public:
  OverlapResolver(Placement& p) : p_(p) {
    depth_.assign(p_.unit_atoms.size(), 0);
    for (std::size_t u = 0; u < p_.unit_atoms.size(); ++u) {
      int d = 0;
      for (int x = static_cast<int>(u); p_.unit_parent[x] >= 0;
           x = p_.unit_parent[x])
        ++d;
      depth_[u] = d;
    }
  }

  // true if resolved, false if still clashing after the iteration budget
  bool run() {
    for (int iter = 0; iter < 50; ++iter) {
      auto clash = closest_clash(p_.pos);
      if (!clash) return true;
      auto [i, j] = *clash;
      int ui = p_.atom_unit[i], uj = p_.atom_unit[j];
      if (ui == uj) return false;  // rigid system clashing with itself
      auto [bi, bj] = branch_pair(ui, uj);
      if (bi < 0 && bj < 0) return false;
      if (!separate(i, j, bi, bj)) return false;
    }
    return closest_clash(p_.pos) == std::nullopt;
  }

 private:
  // children of the LCA on the paths to each unit (-1 when the unit IS the LCA)
  std::pair<int, int> branch_pair(int ui, int uj) const {
    int a = ui, b = uj;
    int pa = -1, pb = -1;
    while (a != b) {
      if (depth_[a] >= depth_[b]) {
        pa = a;
        a = p_.unit_parent[a];
      } else {
        pb = b;
        b = p_.unit_parent[b];
      }
      if (a < 0 || b < 0) return {-1, -1};
    }
    return {pa, pb};
  }

  std::vector<int> subtree_atoms(int unit) const {
    std::vector<int> atoms;
    std::vector<int> stack{unit};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      atoms.insert(atoms.end(), p_.unit_atoms[u].begin(), p_.unit_atoms[u].end());
      for (std::size_t c = 0; c < p_.unit_atoms.size(); ++c)
        if (p_.unit_parent[c] == u) stack.push_back(static_cast<int>(c));
    }
    return atoms;
  }

  void rotate_subtree(const std::vector<int>& atoms, Vec2 pivot, double rad) {
    for (int a : atoms) p_.pos[a] = pivot + rotated(p_.pos[a] - pivot, rad);
  }

  bool separate(int i, int j, int bi, int bj) {
    const double step = kPi / 30.0;  // 6 degrees
    double before = distance(p_.pos[i], p_.pos[j]);
    double best = before;
    int best_sign = 0;
    for (int sign : {+1, -1}) {
      auto trial = p_.pos;
      if (bi >= 0)
        for (int a : subtree_atoms(bi))
          trial[a] = p_.pos[p_.unit_attach_atom[bi]] +
                     rotated(p_.pos[a] - p_.pos[p_.unit_attach_atom[bi]],
                             sign * step);
      if (bj >= 0)
        for (int a : subtree_atoms(bj))
          trial[a] = p_.pos[p_.unit_attach_atom[bj]] +
                     rotated(p_.pos[a] - p_.pos[p_.unit_attach_atom[bj]],
                             -sign * step);
      double d = distance(trial[i], trial[j]);
      if (d > best + 1e-12) {
        best = d;
        best_sign = sign;
      }
    }
    if (best_sign == 0) return false;
    if (bi >= 0)
      rotate_subtree(subtree_atoms(bi), p_.pos[p_.unit_attach_atom[bi]],
                     best_sign * step);
    if (bj >= 0)
      rotate_subtree(subtree_atoms(bj), p_.pos[p_.unit_attach_atom[bj]],
                     -best_sign * step);
    return true;
  }

  Placement& p_;
  std::vector<int> depth_;
};

void recenter(std::vector<Vec2>& pos) {
  Vec2 c{0, 0};
  for (const Vec2& p : pos) c = c + p;
  c = c * (1.0 / static_cast<double>(pos.size()));
  for (Vec2& p : pos) p = p - c;
}

}  // namespace

DepictedMol layout(const MolGraph& g) {
  if (g.atoms.empty()) throw LayoutDegenerate("empty molecule");
  Placement p = Assembler(g).run();

  if (g.atoms.size() > 1) {
    OverlapResolver resolver(p);
    if (!resolver.run()) {
      auto clash = closest_clash(p.pos);
      throw LayoutDegenerate(
          "unresolvable atom overlap (atoms " +
          std::to_string(clash->first) + "," + std::to_string(clash->second) + ")");
    }
  }

  for (const Vec2& v : p.pos) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y))
      throw LayoutDegenerate("non-finite coordinate");
  }

  recenter(p.pos);

  double minx = 0, maxx = 0, miny = 0, maxy = 0;
  for (const Vec2& v : p.pos) {
    minx = std::min(minx, v.x);
    maxx = std::max(maxx, v.x);
    miny = std::min(miny, v.y);
    maxy = std::max(maxy, v.y);
  }
  if (maxx - minx > kMaxExtent || maxy - miny > kMaxExtent)
    throw LayoutTooLarge("molecule exceeds the 39 A depiction field");

  DepictedMol m;
  m.graph = g;
  m.coords = std::move(p.pos);
  return m;
}

DepictedMol rotate(const DepictedMol& m, double theta_deg) {
  if (!std::isfinite(theta_deg)) throw LayoutDegenerate("non-finite angle");
  double rad = theta_deg * kPi / 180.0;
  Vec2 c{0, 0};
  for (const Vec2& p : m.coords) c = c + p;
  c = c * (1.0 / static_cast<double>(m.coords.size()));
  DepictedMol out;
  out.graph = m.graph;
  out.coords.reserve(m.coords.size());
  for (const Vec2& p : m.coords) out.coords.push_back(c + rotated(p - c, rad));
  return out;
}

}  // namespace chemception
