#include "conservolast/tile.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "conservolast/errors.hpp"

namespace conservolast {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

void orient_positive(Mesh& mesh) {
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    if (mesh.signed_area(e) < 0.0) std::swap(mesh.triangles[e][1], mesh.triangles[e][2]);
  }
}

// Pairs vertices on x = 0 with x = px and y = 0 with y = py.
std::vector<PeriodicPair> find_periodic_pairs(const Mesh& mesh, const Vec2& period) {
  const double tol = 1e-9 * period.maxCoeff();
  std::vector<PeriodicPair> pairs;
  for (int axis = 0; axis < 2; ++axis) {
    std::vector<int> lo, hi;
    for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v) {
      const double c = mesh.vertices[v][axis];
      if (std::abs(c) <= tol) lo.push_back(v);
      if (std::abs(c - period[axis]) <= tol) hi.push_back(v);
    }
    const int other = 1 - axis;
    auto by_other = [&](int a, int b) { return mesh.vertices[a][other] < mesh.vertices[b][other]; };
    std::sort(lo.begin(), lo.end(), by_other);
    std::sort(hi.begin(), hi.end(), by_other);
    if (lo.size() != hi.size()) throw MeshingFailed("boundary vertices on opposite sides do not match");
    Vec2 offset = Vec2::Zero();
    offset[axis] = period[axis];
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (std::abs(mesh.vertices[lo[i]][other] - mesh.vertices[hi[i]][other]) > tol) {
        throw MeshingFailed("boundary vertices on opposite sides do not match");
      }
      pairs.push_back({lo[i], hi[i], offset});
    }
  }
  return pairs;
}

// Drops vertices no triangle references and renumbers.
void compact(Mesh& mesh) {
  std::vector<int> remap(mesh.vertices.size(), -1);
  for (const auto& t : mesh.triangles)
    for (int v : t) remap[v] = 0;
  std::vector<Vec2> kept;
  for (std::size_t v = 0; v < remap.size(); ++v) {
    if (remap[v] == 0) {
      remap[v] = static_cast<int>(kept.size());
      kept.push_back(mesh.vertices[v]);
    }
  }
  for (auto& t : mesh.triangles)
    for (int& v : t) v = remap[v];
  mesh.vertices = std::move(kept);
}

Mesh grid_mesh(double w, double h, int nx, int ny) {
  Mesh mesh;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) mesh.vertices.emplace_back(w * i / nx, h * j / ny);
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        mesh.triangles.push_back({a, b, c});
        mesh.triangles.push_back({a, c, d});
      } else {
        mesh.triangles.push_back({a, b, d});
        mesh.triangles.push_back({b, c, d});
      }
    }
  return mesh;
}

void assign_material(Mesh& mesh, const TileSpec& spec) {
  mesh.materials = {NeoHookean::from_young_poisson(spec.young, spec.poisson)};
  mesh.element_material.assign(mesh.triangles.size(), 0);
}

Mesh solid_mesh(const TileSpec& spec) {
  // Two triangles per cell; pick the cell count closest to the target.
  const int n = std::max(1, static_cast<int>(std::lround(std::sqrt(spec.target_elements / 2.0))));
  return grid_mesh(spec.period.x(), spec.period.y(), n, n);
}

// Mapped mesh between the hole and the square boundary: every boundary
// point is joined radially to the point of the circle at the same angle.
Mesh hole_mesh(const TileSpec& spec) {
  const double p = spec.period.x();
  if (std::abs(spec.period.y() - p) > 1e-12 * p) throw MeshingFailed("circular-hole tiles must be square");
  const double radius = spec.hole_radius * p;
  if (!(spec.hole_radius > 0.0) || !(spec.hole_radius < 0.5)) {
    throw MeshingFailed("hole radius fraction must lie in (0, 0.5)");
  }
  // 8 nt nr triangles; radial divisions in proportion to the mean ring width.
  const double aspect = (0.604 * p - radius) / p;
  const double nt_real = std::sqrt(std::max(8, spec.target_elements) / (8.0 * aspect));
  const int nt = std::max(2, static_cast<int>(std::lround(nt_real)));
  const int nr = std::max(1, static_cast<int>(std::lround(aspect * nt_real)));

  const Vec2 center(0.5 * p, 0.5 * p);
  std::vector<Vec2> ring;  // counter-clockwise around the square boundary
  const Vec2 corners[4] = {{0.0, 0.0}, {p, 0.0}, {p, p}, {0.0, p}};
  for (int side = 0; side < 4; ++side) {
    const Vec2 a = corners[side], b = corners[(side + 1) % 4];
    for (int j = 0; j < nt; ++j) ring.push_back(a + (b - a) * (static_cast<double>(j) / nt));
  }
  const int m = static_cast<int>(ring.size());

  Mesh mesh;
  for (int l = 0; l <= nr; ++l) {
    for (int k = 0; k < m; ++k) {
      const Vec2 outer = ring[k];
      const Vec2 inner = center + radius * (outer - center).normalized();
      mesh.vertices.push_back(l == nr ? outer : inner + (outer - inner) * (static_cast<double>(l) / nr));
    }
  }
  auto id = [&](int l, int k) { return l * m + ((k % m) + m) % m; };
  for (int l = 0; l < nr; ++l) {
    for (int k = 0; k < m; ++k) {
      const int a = id(l, k), b = id(l, k + 1), c = id(l + 1, k + 1), d = id(l + 1, k);
      // Mirror the diagonal about each side's midpoint.
      const bool first_half = (k % nt) < nt / 2 || (nt % 2 == 1 && (k % nt) == nt / 2 && l % 2 == 0);
      if (first_half) {
        mesh.triangles.push_back({a, b, c});
        mesh.triangles.push_back({a, c, d});
      } else {
        mesh.triangles.push_back({a, b, d});
        mesh.triangles.push_back({b, c, d});
      }
    }
  }
  return mesh;
}

// Structured grid with the triangles whose centroid falls in the void removed.
Mesh carved_mesh(const TileSpec& spec, double solid_fraction, const std::function<bool(const Vec2&)>& in_void) {
  const int n =
      std::max(4, static_cast<int>(std::lround(std::sqrt(spec.target_elements / (2.0 * solid_fraction)))));
  Mesh grid = grid_mesh(spec.period.x(), spec.period.y(), n, n);
  Mesh mesh;
  mesh.vertices = grid.vertices;
  for (const auto& t : grid.triangles) {
    const Vec2 c = (grid.vertices[t[0]] + grid.vertices[t[1]] + grid.vertices[t[2]]) / 3.0;
    if (!in_void(c)) mesh.triangles.push_back(t);
  }
  compact(mesh);
  return mesh;
}

double segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (x - (a + t * ab)).norm();
}

Mesh slit_mesh(const TileSpec& spec) {
  const Vec2 p = spec.period;
  const double margin = 0.1;
  if (!(spec.slit_length > 0.0) || spec.slit_length > 1.0 - 2.0 * margin || !(spec.slit_gap > 0.0) ||
      spec.slit_gap > 0.5) {
    throw MeshingFailed("slit length must lie in (0, 0.8] and gap in (0, 0.5]");
  }
  // A horizontal slit at a quarter height and a shorter vertical one in the
  // upper half, offset by a quarter period so the two never touch.
  const double half_len = 0.5 * spec.slit_length;
  const double half_gap = 0.5 * spec.slit_gap;
  auto in_void = [&](const Vec2& x) {
    const double u = x.x() / p.x(), v = x.y() / p.y();
    const bool horizontal = std::abs(u - 0.5) <= half_len && std::abs(v - 0.25) <= half_gap;
    const bool vertical = std::abs(u - 0.25) <= half_gap && std::abs(v - 0.75) <= std::min(half_len, 0.2);
    return horizontal || vertical;
  };
  const double void_fraction = spec.slit_length * spec.slit_gap + spec.slit_gap * std::min(spec.slit_length, 0.4);
  return carved_mesh(spec, std::max(0.2, 1.0 - void_fraction), in_void);
}

Mesh chevron_mesh(const TileSpec& spec) {
  const Vec2 p = spec.period;
  const double arm = 0.35;
  const double t = spec.chevron_thickness;
  if (!(t > 0.0) || t > 0.2 || !(spec.chevron_angle > 0.0) || spec.chevron_angle > 1.2) {
    throw MeshingFailed("chevron thickness must lie in (0, 0.2] and angle in (0, 1.2]");
  }
  const Vec2 apex(0.5, 0.3);
  const Vec2 left = apex + arm * Vec2(-std::sin(spec.chevron_angle), std::cos(spec.chevron_angle));
  const Vec2 right = apex + arm * Vec2(std::sin(spec.chevron_angle), std::cos(spec.chevron_angle));
  for (const Vec2& q : {left, right}) {
    if (q.minCoeff() - t < 0.05 || q.maxCoeff() + t > 0.95) throw MeshingFailed("chevron arms reach the tile boundary");
  }
  auto in_void = [&](const Vec2& x) {
    const Vec2 u(x.x() / p.x(), x.y() / p.y());
    return segment_distance(u, apex, left) <= 0.5 * t || segment_distance(u, apex, right) <= 0.5 * t;
  };
  return carved_mesh(spec, std::max(0.3, 1.0 - 2.0 * arm * t), in_void);
}

}  // namespace

double Mesh::signed_area(std::size_t element) const {
  const auto& t = triangles[element];
  const Vec2 a = vertices[t[1]] - vertices[t[0]];
  const Vec2 b = vertices[t[2]] - vertices[t[0]];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

double Mesh::stiffness_scale() const {
  double s = 0.0;
  for (const NeoHookean& m : materials) s = std::max(s, m.mu);
  return s > 0.0 ? s : 1.0;
}

void Mesh::check() const {
  if (element_material.size() != triangles.size()) throw InputError("element_material size mismatch");
  for (int idx : element_material) {
    if (idx < 0 || idx >= static_cast<int>(materials.size())) throw InputError("material index out of range");
  }
  for (std::size_t e = 0; e < triangles.size(); ++e) {
    for (int v : triangles[e]) {
      if (v < 0 || v >= static_cast<int>(vertices.size())) throw InputError("triangle vertex out of range");
    }
    if (!(signed_area(e) > 0.0)) throw InputError("triangle " + std::to_string(e) + " is not positively oriented");
  }
}

std::string to_string(TileFamily family) {
  switch (family) {
    case TileFamily::Solid: return "solid";
    case TileFamily::CircularHole: return "circular_hole";
    case TileFamily::SlitLattice: return "slit_lattice";
    case TileFamily::Chevron: return "chevron";
  }
  return "unknown";
}

TileFamily tile_family_from_string(const std::string& name) {
  if (name == "solid") return TileFamily::Solid;
  if (name == "circular_hole" || name == "hole") return TileFamily::CircularHole;
  if (name == "slit_lattice" || name == "slit") return TileFamily::SlitLattice;
  if (name == "chevron") return TileFamily::Chevron;
  throw InputError("unknown tile family '" + name + "'");
}

std::vector<int> Tile::master_of() const {
  UnionFind uf(static_cast<int>(mesh.vertices.size()));
  for (const PeriodicPair& pp : periodic_pairs) uf.unite(pp.source, pp.image);
  std::vector<int> out(mesh.vertices.size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = uf.find(static_cast<int>(v));
  return out;
}

int Tile::independent_vertex_count() const {
  const auto m = master_of();
  return static_cast<int>(std::set<int>(m.begin(), m.end()).size());
}

void Tile::check() const {
  mesh.check();
  const double tol = 1e-9 * period.maxCoeff();
  for (const PeriodicPair& pp : periodic_pairs) {
    const Vec2 d = mesh.vertices[pp.image] - mesh.vertices[pp.source] - pp.offset;
    if (d.norm() > tol) throw InputError("periodic pair is inconsistent with its lattice offset");
  }
  if (!is_connected(mesh)) throw InputError("tile mesh is not connected");
}

Tile make_tile(const TileSpec& spec) {
  if (spec.target_elements < 2) throw MeshingFailed("target element count must be at least 2");
  if (!(spec.period.minCoeff() > 0.0)) throw MeshingFailed("tile period must be positive");
  Tile tile;
  tile.spec = spec;
  tile.period = spec.period;
  switch (spec.family) {
    case TileFamily::Solid: tile.mesh = solid_mesh(spec); break;
    case TileFamily::CircularHole: tile.mesh = hole_mesh(spec); break;
    case TileFamily::SlitLattice: tile.mesh = slit_mesh(spec); break;
    case TileFamily::Chevron: tile.mesh = chevron_mesh(spec); break;
  }
  orient_positive(tile.mesh);
  assign_material(tile.mesh, spec);
  tile.periodic_pairs = find_periodic_pairs(tile.mesh, tile.period);
  try {
    tile.check();
  } catch (const InputError& e) {
    throw MeshingFailed(e.what());
  }
  return tile;
}

int edge_count(const Mesh& mesh) {
  std::set<std::pair<int, int>> edges;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      edges.emplace(std::min(a, b), std::max(a, b));
    }
  return static_cast<int>(edges.size());
}

int euler_characteristic(const Mesh& mesh) {
  return static_cast<int>(mesh.vertices.size()) - edge_count(mesh) + static_cast<int>(mesh.triangles.size());
}

bool is_connected(const Mesh& mesh) {
  if (mesh.vertices.empty()) return false;
  UnionFind uf(static_cast<int>(mesh.vertices.size()));
  for (const auto& t : mesh.triangles) {
    uf.unite(t[0], t[1]);
    uf.unite(t[1], t[2]);
  }
  const int root = uf.find(0);
  for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v) {
    if (uf.find(v) != root) return false;
  }
  return true;
}

Mesh tile_patch(const Tile& tile, int nx, int ny) {
  if (nx < 1 || ny < 1) throw InputError("patch dimensions must be positive");
  Mesh out;
  out.materials = tile.mesh.materials;
  const double tol = 1e-9 * tile.period.maxCoeff();
  std::map<std::pair<long long, long long>, int> welded;
  auto key = [&](const Vec2& x) {
    return std::make_pair(std::llround(x.x() / tol * 1e-3), std::llround(x.y() / tol * 1e-3));
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vec2 shift(i * tile.period.x(), j * tile.period.y());
      std::vector<int> local(tile.mesh.vertices.size());
      for (std::size_t v = 0; v < local.size(); ++v) {
        const Vec2 x = tile.mesh.vertices[v] + shift;
        auto [it, inserted] = welded.try_emplace(key(x), static_cast<int>(out.vertices.size()));
        if (inserted) out.vertices.push_back(x);
        local[v] = it->second;
      }
      for (std::size_t e = 0; e < tile.mesh.triangles.size(); ++e) {
        const auto& t = tile.mesh.triangles[e];
        out.triangles.push_back({local[t[0]], local[t[1]], local[t[2]]});
        out.element_material.push_back(tile.mesh.element_material[e]);
      }
    }
  }
  return out;
}

Mesh rectangle_mesh(double width, double height, int nx, int ny, const NeoHookean& material) {
  if (nx < 1 || ny < 1 || !(width > 0.0) || !(height > 0.0)) throw InputError("invalid rectangle mesh size");
  Mesh mesh = grid_mesh(width, height, nx, ny);
  mesh.materials = {material};
  mesh.element_material.assign(mesh.triangles.size(), 0);
  return mesh;
}

}  // namespace conservolast
