#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "kvcrack/constitutive.hpp"
#include "kvcrack/cracked_space.hpp"
#include "kvcrack/loads.hpp"
#include "kvcrack/mesh.hpp"
#include "kvcrack/stepper.hpp"

namespace kvcrack {

/// Malformed JSON, wrong types, or unknown keys.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Well-formed file describing an inadmissible problem. The message names
/// the violated assumption, e.g. (D3) or (E4).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometrySpec {
  double width = 1.0;
  double height = 1.0;
  int nx = 8;
  int ny = 8;
  std::vector<RectSide> dirichlet{RectSide::Left};
};

/// Initial displacement or velocity.
struct InitialSpec {
  enum class Kind { Zero, Lift, Field };
  Kind kind = Kind::Zero;
  /// Static spatial terms for Kind::Field, evaluated at t = 0.
  LoadField field;
};

struct OutputSpec {
  std::string ledger = "ledger.csv";
  /// 0 selects ceil(n / 10).
  int snapshot_stride = 0;
  bool snapshots = true;
  bool summary = true;
};

struct Scenario {
  GeometrySpec geometry;
  double p = 2.0;
  EpsRegPolicy eps_reg;
  double T = 1.0;
  std::vector<int> n_list{16};
  std::vector<Point2> crack_points;
  std::vector<double> release_times;
  LoadField f;
  LoadField z;
  InitialSpec u0;
  InitialSpec u1;
  SolverConfig solver;
  OutputSpec outputs;
  double paradox_tol_fraction = 0.05;
  /// Non-fatal findings, e.g. a Dirichlet set on one side of the crack.
  std::vector<std::string> warnings;

  int snapshot_stride(int n) const;
  ConstitutiveLaw law(int n) const { return {p, eps_reg.resolve(n)}; }
};

/// Cracked domain and data built from a scenario. Not movable: operators
/// built on `space.mesh()` keep a pointer to it.
struct Problem {
  CrackedSpace space;
  LoadData loads;

  Problem(CrackedSpace s, LoadData l) : space(std::move(s)), loads(std::move(l)) {}
  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;
};

/// Strict parse: unknown keys are errors. The problem is built once to
/// validate crack geometry and data compatibility.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& source = "<string>");

/// Throws ValidationError.
std::unique_ptr<Problem> build_problem(const Scenario& scenario);

}  // namespace kvcrack
