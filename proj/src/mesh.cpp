#include "kvcrack/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace kvcrack {

namespace {

std::pair<int, int> edge_key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

bool contains(const std::vector<RectSide>& sides, RectSide s) {
  return std::find(sides.begin(), sides.end(), s) != sides.end();
}

}  // namespace

Mesh build_rect_mesh(double width, double height, int nx, int ny,
                     const std::vector<RectSide>& dirichlet_sides) {
  if (!(width > 0.0) || !(height > 0.0)) throw MeshError("rectangle dimensions must be positive");
  if (nx < 2 || ny < 2) throw MeshError("need at least 2 cells in each direction");

  Mesh mesh;
  const auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  mesh.vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh.vertices.push_back({width * i / nx, height * j / ny});
    }
  }

  mesh.triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        mesh.triangles.push_back({v00, v10, v11});
        mesh.triangles.push_back({v00, v11, v01});
      } else {
        mesh.triangles.push_back({v00, v10, v01});
        mesh.triangles.push_back({v10, v11, v01});
      }
    }
  }

  const auto tag = [&](RectSide s) {
    return contains(dirichlet_sides, s) ? BoundaryTag::Dirichlet : BoundaryTag::Neumann;
  };
  for (int i = 0; i < nx; ++i) {
    mesh.boundary_edges.push_back({id(i, 0), id(i + 1, 0), tag(RectSide::Bottom)});
    mesh.boundary_edges.push_back({id(i + 1, ny), id(i, ny), tag(RectSide::Top)});
  }
  for (int j = 0; j < ny; ++j) {
    mesh.boundary_edges.push_back({id(nx, j), id(nx, j + 1), tag(RectSide::Right)});
    mesh.boundary_edges.push_back({id(0, j + 1), id(0, j), tag(RectSide::Left)});
  }
  return mesh;
}

double signed_area(const Mesh& mesh, std::size_t triangle) {
  const auto& t = mesh.triangles[triangle];
  const Point2& a = mesh.vertices[t[0]];
  const Point2& b = mesh.vertices[t[1]];
  const Point2& c = mesh.vertices[t[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double total_area(const Mesh& mesh) {
  double area = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) area += signed_area(mesh, t);
  return area;
}

double boundary_length(const Mesh& mesh) {
  double len = 0.0;
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    const Point2& a = mesh.vertices[e.a];
    const Point2& b = mesh.vertices[e.b];
    len += std::hypot(b.x - a.x, b.y - a.y);
  }
  return len;
}

void validate_mesh(const Mesh& mesh) {
  const int nv = static_cast<int>(mesh.num_vertices());
  std::map<std::pair<int, int>, int> edge_count;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) throw MeshError("triangle " + std::to_string(t) + " has a bad vertex");
    }
    if (!(signed_area(mesh, t) > 0.0)) {
      throw MeshError("triangle " + std::to_string(t) + " has non-positive area");
    }
    for (int i = 0; i < 3; ++i) ++edge_count[edge_key(tri[i], tri[(i + 1) % 3])];
  }

  std::map<std::pair<int, int>, int> boundary;
  for (const BoundaryEdge& e : mesh.boundary_edges) ++boundary[edge_key(e.a, e.b)];

  for (const auto& [edge, count] : edge_count) {
    if (count > 2) throw MeshError("edge shared by more than two triangles");
    const bool tagged = boundary.count(edge) > 0;
    if (count == 1 && !tagged) throw MeshError("boundary edge without a tag");
    if (count == 2 && tagged) throw MeshError("interior edge tagged as boundary");
  }
  for (const auto& [edge, count] : boundary) {
    if (count != 1) throw MeshError("boundary edge tagged more than once");
    if (edge_count.count(edge) == 0) throw MeshError("tagged boundary edge is not a mesh edge");
  }
}

std::vector<bool> dirichlet_vertices(const Mesh& mesh) {
  std::vector<bool> mask(mesh.num_vertices(), false);
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    if (e.tag == BoundaryTag::Dirichlet) {
      mask[e.a] = true;
      mask[e.b] = true;
    }
  }
  return mask;
}

ElementGeometry element_geometry(const Mesh& mesh, std::size_t triangle) {
  const auto& t = mesh.triangles[triangle];
  const Point2& a = mesh.vertices[t[0]];
  const Point2& b = mesh.vertices[t[1]];
  const Point2& c = mesh.vertices[t[2]];
  const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  if (!(det > 0.0)) throw MeshError("degenerate triangle " + std::to_string(triangle));

  ElementGeometry g;
  g.area = 0.5 * det;
  g.dndx = {(b.y - c.y) / det, (c.y - a.y) / det, (a.y - b.y) / det};
  g.dndy = {(c.x - b.x) / det, (a.x - c.x) / det, (b.x - a.x) / det};
  return g;
}

SymTensor2 element_strain(const Mesh& mesh, const ElementGeometry& geo, std::size_t triangle,
                          const Eigen::VectorXd& u) {
  const auto& t = mesh.triangles[triangle];
  double dux_dx = 0.0, dux_dy = 0.0, duy_dx = 0.0, duy_dy = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double ux = u[2 * t[i]];
    const double uy = u[2 * t[i] + 1];
    dux_dx += geo.dndx[i] * ux;
    dux_dy += geo.dndy[i] * ux;
    duy_dx += geo.dndx[i] * uy;
    duy_dy += geo.dndy[i] * uy;
  }
  return {dux_dx, duy_dy, 0.5 * (dux_dy + duy_dx)};
}

std::vector<SymTensor2> element_strain(const Mesh& mesh, const Eigen::VectorXd& u) {
  if (static_cast<std::size_t>(u.size()) != mesh.num_dofs()) {
    throw std::invalid_argument("element_strain: field size does not match the mesh");
  }
  std::vector<SymTensor2> strain(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    strain[t] = element_strain(mesh, element_geometry(mesh, t), t, u);
  }
  return strain;
}

}  // namespace kvcrack
