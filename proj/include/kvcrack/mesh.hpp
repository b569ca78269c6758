#pragma once

#include <Eigen/Core>
#include <array>
#include <stdexcept>
#include <vector>

#include "kvcrack/sym_tensor.hpp"

namespace kvcrack {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

enum class BoundaryTag { Dirichlet, Neumann };

/// Sides of the rectangular reference domain.
enum class RectSide { Left, Right, Bottom, Top };

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::Neumann;
};

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Conforming P1 triangulation with counter-clockwise triangles.
///
/// Nodal fields over a mesh are stored interleaved, [u0x, u0y, u1x, u1y, ...].
struct Mesh {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  std::size_t num_dofs() const { return 2 * vertices.size(); }
};

/// Structured triangulation of [0,width]x[0,height] with nx by ny cells,
/// each split into two triangles along alternating (union-jack) diagonals.
/// Boundary edges on `dirichlet_sides` are tagged Dirichlet, the rest Neumann.
Mesh build_rect_mesh(double width, double height, int nx, int ny,
                     const std::vector<RectSide>& dirichlet_sides = {RectSide::Left});

double signed_area(const Mesh& mesh, std::size_t triangle);
double total_area(const Mesh& mesh);
double boundary_length(const Mesh& mesh);

/// Checks positive orientation, conformity, and that the boundary edge list is
/// exactly the set of edges with one adjacent triangle. Throws MeshError.
void validate_mesh(const Mesh& mesh);

/// Vertices lying on a Dirichlet-tagged boundary edge.
std::vector<bool> dirichlet_vertices(const Mesh& mesh);

/// Constant shape-function gradients of one triangle.
struct ElementGeometry {
  double area = 0.0;
  std::array<double, 3> dndx{};
  std::array<double, 3> dndy{};
};

/// Throws MeshError for a degenerate or inverted triangle.
ElementGeometry element_geometry(const Mesh& mesh, std::size_t triangle);

/// Symmetric gradient of a P1 field on one element.
SymTensor2 element_strain(const Mesh& mesh, const ElementGeometry& geo, std::size_t triangle,
                          const Eigen::VectorXd& u);

/// Piecewise-constant symmetric gradient e(u) on every triangle.
std::vector<SymTensor2> element_strain(const Mesh& mesh, const Eigen::VectorXd& u);

}  // namespace kvcrack
