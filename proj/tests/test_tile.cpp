#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "conservolast/errors.hpp"
#include "conservolast/tile.hpp"

using namespace conservolast;

namespace {

double mesh_area(const Mesh& m) {
  double a = 0.0;
  for (std::size_t e = 0; e < m.triangles.size(); ++e) a += m.signed_area(e);
  return a;
}

TileSpec spec_of(TileFamily f, int elements = 400) {
  TileSpec s;
  s.family = f;
  s.target_elements = elements;
  return s;
}

}  // namespace

TEST(Tile, SolidTileCoversThePeriod) {
  const Tile t = make_tile(spec_of(TileFamily::Solid));
  EXPECT_NO_THROW(t.check());
  EXPECT_NEAR(mesh_area(t.mesh), 1.0, 1e-12);
  EXPECT_EQ(euler_characteristic(t.mesh), 1);
  EXPECT_TRUE(is_connected(t.mesh));
  EXPECT_NEAR(static_cast<double>(t.mesh.triangles.size()), 400.0, 40.0);
}

TEST(Tile, SmallestSolidTileHasFourPeriodicClasses) {
  // Two by two cells: nine vertices, corners and edge midpoints identified.
  const Tile t = make_tile(spec_of(TileFamily::Solid, 8));
  EXPECT_EQ(t.mesh.vertices.size(), 9u);
  EXPECT_EQ(t.independent_vertex_count(), 4);
}

TEST(Tile, PeriodicPairsMatchCoordinates) {
  for (TileFamily f : {TileFamily::Solid, TileFamily::CircularHole, TileFamily::SlitLattice, TileFamily::Chevron}) {
    const Tile t = make_tile(spec_of(f));
    ASSERT_FALSE(t.periodic_pairs.empty()) << to_string(f);
    for (const PeriodicPair& p : t.periodic_pairs) {
      EXPECT_LT((t.mesh.vertices[p.image] - t.mesh.vertices[p.source] - p.offset).norm(), 1e-9);
      EXPECT_TRUE(std::abs(p.offset.x()) == 0.0 || std::abs(std::abs(p.offset.x()) - t.period.x()) < 1e-12);
      EXPECT_TRUE(std::abs(p.offset.y()) == 0.0 || std::abs(std::abs(p.offset.y()) - t.period.y()) < 1e-12);
    }
    const auto master = t.master_of();
    for (std::size_t v = 0; v < master.size(); ++v) EXPECT_LE(master[v], static_cast<int>(v));
  }
}

TEST(Tile, AllElementsPositivelyOriented) {
  for (TileFamily f : {TileFamily::Solid, TileFamily::CircularHole, TileFamily::SlitLattice, TileFamily::Chevron}) {
    const Tile t = make_tile(spec_of(f, 800));
    for (std::size_t e = 0; e < t.mesh.triangles.size(); ++e) EXPECT_GT(t.mesh.signed_area(e), 0.0);
    EXPECT_TRUE(is_connected(t.mesh)) << to_string(f);
  }
}

TEST(Tile, HoleTileAreaAndTopology) {
  TileSpec s = spec_of(TileFamily::CircularHole, 1200);
  s.hole_radius = 0.3;
  const Tile t = make_tile(s);
  const double exact = 1.0 - std::numbers::pi * 0.09;
  // The hole boundary is a polygon inscribed in the circle.
  EXPECT_GT(mesh_area(t.mesh), exact);
  EXPECT_NEAR(mesh_area(t.mesh), exact, 0.01);
  EXPECT_EQ(euler_characteristic(t.mesh), 0);
  EXPECT_NEAR(static_cast<double>(t.mesh.triangles.size()), 1200.0, 200.0);
}

TEST(Tile, VoidTilesRemoveMaterial) {
  for (TileFamily f : {TileFamily::SlitLattice, TileFamily::Chevron}) {
    const Tile t = make_tile(spec_of(f, 1600));
    const double a = mesh_area(t.mesh);
    EXPECT_LT(a, 0.99) << to_string(f);
    EXPECT_GT(a, 0.5) << to_string(f);
  }
}

TEST(Tile, DegenerateParametersFail) {
  TileSpec s = spec_of(TileFamily::CircularHole);
  s.hole_radius = 0.6;
  EXPECT_THROW(make_tile(s), MeshingFailed);
  s.hole_radius = 0.0;
  EXPECT_THROW(make_tile(s), MeshingFailed);
  s.hole_radius = 0.3;
  s.period = Vec2(1.0, 2.0);
  EXPECT_THROW(make_tile(s), MeshingFailed);
}

TEST(Tile, FamilyNames) {
  EXPECT_EQ(tile_family_from_string("hole"), TileFamily::CircularHole);
  EXPECT_EQ(tile_family_from_string(to_string(TileFamily::Chevron)), TileFamily::Chevron);
  EXPECT_THROW(tile_family_from_string("honeycomb"), InputError);
}

TEST(Tile, PatchWeldsSharedEdges) {
  const Tile t = make_tile(spec_of(TileFamily::CircularHole, 300));
  const Mesh patch = tile_patch(t, 2, 3);
  EXPECT_EQ(patch.triangles.size(), 6 * t.mesh.triangles.size());
  EXPECT_NEAR(mesh_area(patch), 6 * mesh_area(t.mesh), 1e-10);
  EXPECT_TRUE(is_connected(patch));
  // Six holes in a simply connected outline.
  EXPECT_EQ(euler_characteristic(patch), 1 - 6);
}

TEST(Mesh, RectangleMesh) {
  const Mesh m = rectangle_mesh(2.0, 1.0, 4, 3, NeoHookean{1.0, 1.0});
  EXPECT_EQ(m.triangles.size(), 24u);
  EXPECT_EQ(m.vertices.size(), 20u);
  EXPECT_NEAR(mesh_area(m), 2.0, 1e-14);
  EXPECT_EQ(edge_count(m), 4 * 4 + 5 * 3 + 12);
  EXPECT_THROW(rectangle_mesh(1.0, 1.0, 0, 1, NeoHookean{}), InputError);
}

TEST(Mesh, CheckRejectsInvertedTriangles) {
  Mesh m = rectangle_mesh(1.0, 1.0, 1, 1, NeoHookean{});
  std::swap(m.triangles[0][1], m.triangles[0][2]);
  EXPECT_THROW(m.check(), InputError);
}
