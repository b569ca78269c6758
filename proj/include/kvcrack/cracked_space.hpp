#pragma once

#include <Eigen/Core>
#include <limits>
#include <stdexcept>
#include <vector>

#include "kvcrack/mesh.hpp"

namespace kvcrack {

inline constexpr double kNeverReleased = std::numeric_limits<double>::infinity();

/// Prescribed crack path: a polyline of base-mesh vertices w_0..w_m, one
/// release time per segment (w_i, w_{i+1}). Release times must be
/// non-decreasing along the path; segments released at t = 0 form the initial
/// crack.
struct CrackPath {
  std::vector<int> vertices;
  std::vector<double> release_times;

  std::size_t num_segments() const { return release_times.size(); }
};

struct CrackError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-segment tie state at one time: tied[s] is true while segment s has not
/// been released.
struct ConstraintSet {
  std::vector<bool> tied;

  std::size_t count() const;
  /// True when every tie of *this is also a tie of `other`.
  bool subset_of(const ConstraintSet& other) const;
  bool operator==(const ConstraintSet&) const = default;
};

/// Numbering of the free degrees of freedom for one constraint state.
///
/// Maps each expanded nodal DOF to a reduced index; Dirichlet DOFs map to -1,
/// and the two copies of a tied crack vertex share one reduced index.
struct DofMap {
  std::vector<int> reduced;
  int num_reduced = 0;

  /// Expanded field from reduced values (Dirichlet entries zero).
  Eigen::VectorXd prolong(const Eigen::VectorXd& x) const;
  /// Reduced values of an expanded field that satisfies the constraints.
  Eigen::VectorXd restrict_values(const Eigen::VectorXd& full) const;
  /// Transpose of prolong: sums dual entries of tied copies, drops Dirichlet rows.
  Eigen::VectorXd restrict_dual(const Eigen::VectorXd& full) const;
};

/// Reference configuration with the crack path built in by node duplication.
///
/// `mesh()` is the side-resolved triangulation: every vertex interior to the
/// path has a second copy, and the triangles on one side of the path reference
/// that copy. While a vertex is tied the copies share their DOFs, so the
/// space coincides with the uncracked one; releasing segments only removes ties.
class CrackedSpace {
 public:
  const Mesh& mesh() const { return mesh_; }
  std::size_t base_vertex_count() const { return base_vertex_count_; }
  const CrackPath& path() const { return path_; }
  std::size_t num_segments() const { return path_.num_segments(); }
  double segment_length(std::size_t s) const { return segment_length_[s]; }
  double path_length() const;

  /// Expanded vertex id of the second copy of path vertex w_i (1 <= i < m).
  int duplicate_of_path_vertex(std::size_t i) const { return duplicate_[i]; }
  /// Base vertex that an expanded vertex copies (identity for base vertices).
  int original_vertex(int v) const;

  const std::vector<bool>& dirichlet_mask() const { return dirichlet_; }

  /// Ties for all segments with release_time > t.
  ConstraintSet active_constraints(double t) const;

  /// Interior path vertices whose two copies move independently: both adjacent
  /// segments released. Indexed by path position; tips are always tied.
  std::vector<bool> open_vertices(const ConstraintSet& c) const;

  DofMap dof_map(const ConstraintSet& c) const;

  /// Number of free DOFs of the uncracked mesh with the same Dirichlet set.
  int uncracked_free_dofs() const;

 private:
  friend CrackedSpace insert_crack(const Mesh& mesh, const CrackPath& path);

  Mesh mesh_;
  std::size_t base_vertex_count_ = 0;
  CrackPath path_;
  std::vector<double> segment_length_;
  std::vector<int> duplicate_;  // by path position; -1 at the tips
  std::vector<bool> dirichlet_;
};

/// Throws CrackError when a segment is not an interior edge, the path touches
/// the boundary or revisits a vertex, release times decrease along the path,
/// or the triangles around a path vertex cannot be split into two sides.
CrackedSpace insert_crack(const Mesh& mesh, const CrackPath& path);

/// Total length of segments with release_time in (t0, t1].
double crack_increment(const CrackedSpace& space, double t0, double t1);

/// Release times are compared against grid times with this relative slack so
/// that a release at exactly k*tau lands on node k despite rounding.
double release_slack(double t);

}  // namespace kvcrack
