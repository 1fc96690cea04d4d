#pragma once

#include <array>
#include <string>
#include <vector>

#include "conservolast/hyperelastic.hpp"
#include "conservolast/types.hpp"

namespace conservolast {

/// Linear-triangle mesh with one neo-Hookean material per element.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<NeoHookean> materials;
  std::vector<int> element_material;  // one index into materials per triangle

  const NeoHookean& material_of(std::size_t element) const { return materials[element_material[element]]; }
  double signed_area(std::size_t element) const;
  /// Largest shear modulus among the materials.
  double stiffness_scale() const;
  /// Throws InputError on bad indices or non-positive triangles.
  void check() const;
};

/// image = source + offset, up to floating-point tolerance.
struct PeriodicPair {
  int source = 0;
  int image = 0;
  Vec2 offset = Vec2::Zero();
};

enum class TileFamily { Solid, CircularHole, SlitLattice, Chevron };

std::string to_string(TileFamily family);
TileFamily tile_family_from_string(const std::string& name);

struct TileSpec {
  TileFamily family = TileFamily::Solid;
  int target_elements = 800;
  Vec2 period = Vec2(1.0, 1.0);
  double young = 1.0;
  double poisson = 0.3;
  // CircularHole: hole radius as a fraction of the shorter period.
  double hole_radius = 0.3;
  // SlitLattice: slit length and opening as fractions of the period.
  double slit_length = 0.6;
  double slit_gap = 0.06;
  // Chevron: arm angle from the vertical (radians) and arm thickness fraction.
  double chevron_angle = 0.5;
  double chevron_thickness = 0.08;
};

/// Periodic microstructure tile spanning [0, period.x] x [0, period.y].
struct Tile {
  Mesh mesh;
  Vec2 period = Vec2(1.0, 1.0);
  std::vector<PeriodicPair> periodic_pairs;
  TileSpec spec;

  double area() const { return period.x() * period.y(); }
  /// For each vertex, the representative vertex of its periodic class.
  std::vector<int> master_of() const;
  /// Number of independent vertices once periodic images are identified.
  int independent_vertex_count() const;
  /// Throws InputError if the tile violates orientation, pairing or
  /// connectivity invariants.
  void check() const;
};

/// Builds a periodic tile. Throws MeshingFailed for degenerate parameters.
Tile make_tile(const TileSpec& spec);

/// Edges and Euler characteristic V - E + F of a mesh.
int edge_count(const Mesh& mesh);
int euler_characteristic(const Mesh& mesh);
bool is_connected(const Mesh& mesh);

/// Repeats a tile nx by ny times and welds coincident vertices.
Mesh tile_patch(const Tile& tile, int nx, int ny);

/// Structured rectangle [0, w] x [0, h] split into nx * ny quads, two
/// triangles each.
Mesh rectangle_mesh(double width, double height, int nx, int ny, const NeoHookean& material);

}  // namespace conservolast
