#include "kvcrack/cracked_space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <string>

namespace kvcrack {

namespace {

std::pair<int, int> edge_key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

// Counter-clockwise angle from direction a to direction b, in [0, 2pi).
double ccw_angle(double ax, double ay, double bx, double by) {
  double ang = std::atan2(ax * by - ay * bx, ax * bx + ay * by);
  if (ang < 0.0) ang += 2.0 * std::numbers::pi;
  return ang;
}

}  // namespace

std::size_t ConstraintSet::count() const {
  return static_cast<std::size_t>(std::count(tied.begin(), tied.end(), true));
}

bool ConstraintSet::subset_of(const ConstraintSet& other) const {
  if (tied.size() != other.tied.size()) return false;
  for (std::size_t s = 0; s < tied.size(); ++s) {
    if (tied[s] && !other.tied[s]) return false;
  }
  return true;
}

Eigen::VectorXd DofMap::prolong(const Eigen::VectorXd& x) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(reduced.size()));
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    if (reduced[i] >= 0) full[static_cast<Eigen::Index>(i)] = x[reduced[i]];
  }
  return full;
}

Eigen::VectorXd DofMap::restrict_values(const Eigen::VectorXd& full) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(num_reduced);
  std::vector<bool> seen(static_cast<std::size_t>(num_reduced), false);
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    const int r = reduced[i];
    if (r >= 0 && !seen[r]) {
      x[r] = full[static_cast<Eigen::Index>(i)];
      seen[r] = true;
    }
  }
  return x;
}

Eigen::VectorXd DofMap::restrict_dual(const Eigen::VectorXd& full) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(num_reduced);
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    if (reduced[i] >= 0) x[reduced[i]] += full[static_cast<Eigen::Index>(i)];
  }
  return x;
}

double release_slack(double t) { return 1e-12 * std::max(1.0, std::abs(t)); }

double CrackedSpace::path_length() const {
  double len = 0.0;
  for (double l : segment_length_) len += l;
  return len;
}

int CrackedSpace::original_vertex(int v) const {
  if (static_cast<std::size_t>(v) < base_vertex_count_) return v;
  for (std::size_t i = 0; i < duplicate_.size(); ++i) {
    if (duplicate_[i] == v) return path_.vertices[i];
  }
  throw std::out_of_range("original_vertex: unknown vertex");
}

ConstraintSet CrackedSpace::active_constraints(double t) const {
  ConstraintSet c;
  c.tied.resize(num_segments());
  for (std::size_t s = 0; s < num_segments(); ++s) {
    c.tied[s] = path_.release_times[s] > t + release_slack(t);
  }
  return c;
}

std::vector<bool> CrackedSpace::open_vertices(const ConstraintSet& c) const {
  std::vector<bool> open(path_.vertices.size(), false);
  for (std::size_t i = 1; i + 1 < path_.vertices.size(); ++i) {
    open[i] = !c.tied[i - 1] && !c.tied[i];
  }
  return open;
}

DofMap CrackedSpace::dof_map(const ConstraintSet& c) const {
  DofMap map;
  map.reduced.assign(mesh_.num_dofs(), -1);
  int next = 0;
  for (std::size_t v = 0; v < base_vertex_count_; ++v) {
    if (dirichlet_[v]) continue;
    map.reduced[2 * v] = next++;
    map.reduced[2 * v + 1] = next++;
  }
  const std::vector<bool> open = open_vertices(c);
  for (std::size_t i = 0; i < duplicate_.size(); ++i) {
    const int dup = duplicate_[i];
    if (dup < 0) continue;
    const int orig = path_.vertices[i];
    for (int comp = 0; comp < 2; ++comp) {
      map.reduced[2 * dup + comp] = open[i] ? next++ : map.reduced[2 * orig + comp];
    }
  }
  map.num_reduced = next;
  return map;
}

int CrackedSpace::uncracked_free_dofs() const {
  int n = 0;
  for (std::size_t v = 0; v < base_vertex_count_; ++v) n += dirichlet_[v] ? 0 : 2;
  return n;
}

CrackedSpace insert_crack(const Mesh& mesh, const CrackPath& path) {
  validate_mesh(mesh);
  CrackedSpace space;
  space.mesh_ = mesh;
  space.base_vertex_count_ = mesh.num_vertices();
  space.path_ = path;
  space.dirichlet_ = dirichlet_vertices(mesh);

  const std::size_t nseg = path.num_segments();
  if (nseg == 0) {
    if (!path.vertices.empty() && path.vertices.size() != 1) {
      throw CrackError("crack path has vertices but no release times");
    }
    space.path_.vertices.clear();
    return space;
  }
  if (path.vertices.size() != nseg + 1) {
    throw CrackError("crack path needs one release time per segment");
  }
  for (std::size_t s = 0; s < nseg; ++s) {
    const double r = path.release_times[s];
    if (std::isnan(r) || r < 0.0) throw CrackError("release times must be >= 0");
    if (s > 0 && r < path.release_times[s - 1]) {
      throw CrackError("(E4) release times must be non-decreasing along the crack path");
    }
  }

  std::set<int> seen;
  std::set<int> on_boundary;
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    on_boundary.insert(e.a);
    on_boundary.insert(e.b);
  }
  for (int v : path.vertices) {
    if (v < 0 || static_cast<std::size_t>(v) >= mesh.num_vertices()) {
      throw CrackError("crack path references an unknown vertex");
    }
    if (!seen.insert(v).second) throw CrackError("crack path revisits a vertex");
    if (on_boundary.count(v)) {
      throw CrackError("(E1) crack path touches the boundary at vertex " + std::to_string(v));
    }
  }

  std::map<std::pair<int, int>, std::vector<std::size_t>> edge_triangles;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) edge_triangles[edge_key(tri[i], tri[(i + 1) % 3])].push_back(t);
  }
  for (std::size_t s = 0; s < nseg; ++s) {
    const auto it = edge_triangles.find(edge_key(path.vertices[s], path.vertices[s + 1]));
    if (it == edge_triangles.end() || it->second.size() != 2) {
      throw CrackError("crack segment " + std::to_string(s) + " is not an interior mesh edge");
    }
    const Point2& a = mesh.vertices[path.vertices[s]];
    const Point2& b = mesh.vertices[path.vertices[s + 1]];
    space.segment_length_.push_back(std::hypot(b.x - a.x, b.y - a.y));
  }

  // side[t] at path vertex i: true when triangle t lies counter-clockwise
  // between the outgoing and the incoming segment directions.
  const std::size_t npv = path.vertices.size();
  space.duplicate_.assign(npv, -1);
  std::vector<std::map<std::size_t, bool>> side(npv);
  for (std::size_t i = 1; i + 1 < npv; ++i) {
    const int w = path.vertices[i];
    const Point2& pw = mesh.vertices[w];
    const Point2& pnext = mesh.vertices[path.vertices[i + 1]];
    const Point2& pprev = mesh.vertices[path.vertices[i - 1]];
    const double ax = pnext.x - pw.x, ay = pnext.y - pw.y;
    const double span = ccw_angle(ax, ay, pprev.x - pw.x, pprev.y - pw.y);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const auto& tri = mesh.triangles[t];
      if (std::find(tri.begin(), tri.end(), w) == tri.end()) continue;
      const double cx = (mesh.vertices[tri[0]].x + mesh.vertices[tri[1]].x +
                         mesh.vertices[tri[2]].x) / 3.0;
      const double cy = (mesh.vertices[tri[0]].y + mesh.vertices[tri[1]].y +
                         mesh.vertices[tri[2]].y) / 3.0;
      const double ang = ccw_angle(ax, ay, cx - pw.x, cy - pw.y);
      constexpr double kEps = 1e-9;
      if (ang < kEps || std::abs(ang - span) < kEps) {
        throw CrackError("inconsistent side assignment at path vertex " + std::to_string(i));
      }
      side[i][t] = ang < span;
    }
  }

  // The two triangles along each segment must fall on opposite sides, and
  // agree at both ends of the segment.
  for (std::size_t s = 0; s < nseg; ++s) {
    const auto& tris = edge_triangles.at(edge_key(path.vertices[s], path.vertices[s + 1]));
    for (std::size_t i : {s, s + 1}) {
      if (i == 0 || i + 1 == npv) continue;
      if (side[i].at(tris[0]) == side[i].at(tris[1])) {
        throw CrackError("inconsistent side assignment along segment " + std::to_string(s));
      }
    }
    if (s > 0 && s + 2 < npv) {
      for (std::size_t t : tris) {
        if (side[s].at(t) != side[s + 1].at(t)) {
          throw CrackError("inconsistent side assignment along segment " + std::to_string(s));
        }
      }
    }
  }

  for (std::size_t i = 1; i + 1 < npv; ++i) {
    const int w = path.vertices[i];
    const int dup = static_cast<int>(space.mesh_.vertices.size());
    space.mesh_.vertices.push_back(mesh.vertices[w]);
    space.dirichlet_.push_back(false);
    space.duplicate_[i] = dup;
    for (const auto& [t, ccw_side] : side[i]) {
      if (!ccw_side) continue;
      for (int& v : space.mesh_.triangles[t]) {
        if (v == w) v = dup;
      }
    }
  }
  return space;
}

double crack_increment(const CrackedSpace& space, double t0, double t1) {
  if (t1 <= t0) return 0.0;
  double inc = 0.0;
  const auto& times = space.path().release_times;
  for (std::size_t s = 0; s < space.num_segments(); ++s) {
    if (times[s] > t0 + release_slack(t0) && times[s] <= t1 + release_slack(t1)) {
      inc += space.segment_length(s);
    }
  }
  return inc;
}

}  // namespace kvcrack
