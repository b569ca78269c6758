#include "kvcrack/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace kvcrack {

namespace {

using json = nlohmann::json;

/// Object view that records consumed keys so leftovers can be rejected.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail_type(path_, "object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ParseError("missing key '" + child(key) + "'");
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : (used_.insert(key), fallback);
  }
  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) fail_type(child(key), "number");
    return v.get<double>();
  }
  int integer(const std::string& key, int fallback) {
    return has(key) ? integer(key) : (used_.insert(key), fallback);
  }
  int integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) fail_type(child(key), "integer");
    return v.get<int>();
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) fail_type(child(key), "boolean");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) fail_type(child(key), "string");
    return v.get<std::string>();
  }

  std::string child(const std::string& key) const { return path_ + "/" + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ParseError("unknown key '" + child(it.key()) + "'");
    }
  }

  [[noreturn]] static void fail_type(const std::string& path, const std::string& expected) {
    throw ParseError("key '" + path + "': expected " + expected);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) Reader::fail_type(path, "number");
  return v.get<double>();
}

std::array<double, 2> as_pair(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) Reader::fail_type(path, "array of two numbers");
  return {as_number(v[0], path + "/0"), as_number(v[1], path + "/1")};
}

RectSide parse_side(const json& v, const std::string& path) {
  if (!v.is_string()) Reader::fail_type(path, "side name");
  const std::string s = v.get<std::string>();
  if (s == "left") return RectSide::Left;
  if (s == "right") return RectSide::Right;
  if (s == "bottom") return RectSide::Bottom;
  if (s == "top") return RectSide::Top;
  throw ParseError("key '" + path + "': unknown side '" + s + "' (left, right, bottom, top)");
}

TimeProfile parse_time(const json& v, const std::string& path) {
  Reader r(v, path);
  TimeProfile tp;
  const std::string family = r.string("family", "constant");
  if (family == "constant") {
    tp.family = TimeProfile::Family::Constant;
    tp.coeffs[0] = r.number("value");
  } else if (family == "polynomial") {
    tp.family = TimeProfile::Family::Polynomial;
    const json& c = r.at("coeffs");
    if (!c.is_array() || c.empty() || c.size() > 3) {
      Reader::fail_type(r.child("coeffs"), "array of 1 to 3 numbers");
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
      tp.coeffs[i] = as_number(c[i], r.child("coeffs") + "/" + std::to_string(i));
    }
  } else if (family == "sinusoidal") {
    tp.family = TimeProfile::Family::Sinusoidal;
    tp.amplitude = r.number("amplitude");
    tp.omega = r.number("omega");
    tp.phase = r.number("phase", 0.0);
  } else {
    throw ParseError("key '" + r.child("family") + "': unknown time family '" + family +
                     "' (constant, polynomial, sinusoidal)");
  }
  r.finish();
  return tp;
}

SpatialProfile parse_space(Reader& r) {
  const std::string s = r.string("space", "uniform");
  if (s == "uniform") return SpatialProfile::Uniform;
  if (s == "linear_x") return SpatialProfile::LinearX;
  if (s == "linear_y") return SpatialProfile::LinearY;
  throw ParseError("key '" + r.child("space") + "': unknown spatial profile '" + s +
                   "' (uniform, linear_x, linear_y)");
}

LoadField parse_field(const json& v, const std::string& path) {
  if (!v.is_array()) Reader::fail_type(path, "array of load terms");
  std::vector<LoadTerm> terms;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    Reader r(v[i], p);
    LoadTerm term;
    term.time = parse_time(r.at("time"), r.child("time"));
    term.space = parse_space(r);
    term.offset = r.number("offset", 0.0);
    term.direction = as_pair(r.at("direction"), r.child("direction"));
    r.finish();
    terms.push_back(term);
  }
  return LoadField(std::move(terms));
}

/// Static field: time profile fixed to the constant `scale`.
LoadField parse_static_field(const json& v, const std::string& path) {
  if (!v.is_array()) Reader::fail_type(path, "array of field terms");
  std::vector<LoadTerm> terms;
  for (std::size_t i = 0; i < v.size(); ++i) {
    Reader r(v[i], path + "/" + std::to_string(i));
    LoadTerm term;
    term.time.family = TimeProfile::Family::Constant;
    term.time.coeffs[0] = r.number("scale", 1.0);
    term.space = parse_space(r);
    term.offset = r.number("offset", 0.0);
    term.direction = as_pair(r.at("direction"), r.child("direction"));
    r.finish();
    terms.push_back(term);
  }
  return LoadField(std::move(terms));
}

InitialSpec parse_initial(const json& v, const std::string& path) {
  InitialSpec spec;
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "zero") return spec;
    if (s == "lift") {
      spec.kind = InitialSpec::Kind::Lift;
      return spec;
    }
    throw ParseError("key '" + path + "': unknown initial family '" + s + "' (zero, lift, field)");
  }
  Reader r(v, path);
  const std::string family = r.string("family", "zero");
  if (family == "zero") {
    spec.kind = InitialSpec::Kind::Zero;
  } else if (family == "lift") {
    spec.kind = InitialSpec::Kind::Lift;
  } else if (family == "field") {
    spec.kind = InitialSpec::Kind::Field;
    spec.field = parse_static_field(r.at("terms"), r.child("terms"));
  } else {
    throw ParseError("key '" + r.child("family") + "': unknown initial family '" + family +
                     "' (zero, lift, field)");
  }
  r.finish();
  return spec;
}

double parse_release_time(const json& v, const std::string& path) {
  if (v.is_null()) return kNeverReleased;
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return kNeverReleased;
    Reader::fail_type(path, "number, \"inf\" or null");
  }
  return as_number(v, path);
}

void parse_into(const json& root, Scenario& sc) {
  Reader top(root, "");

  if (top.has("geometry")) {
    Reader g(top.at("geometry"), "/geometry");
    sc.geometry.width = g.number("width", sc.geometry.width);
    sc.geometry.height = g.number("height", sc.geometry.height);
    sc.geometry.nx = g.integer("nx", sc.geometry.nx);
    sc.geometry.ny = g.integer("ny", sc.geometry.ny);
    if (g.has("dirichlet")) {
      const json& d = g.at("dirichlet");
      if (!d.is_array()) Reader::fail_type(g.child("dirichlet"), "array of side names");
      sc.geometry.dirichlet.clear();
      for (std::size_t i = 0; i < d.size(); ++i) {
        sc.geometry.dirichlet.push_back(parse_side(d[i], g.child("dirichlet") + "/" + std::to_string(i)));
      }
    }
    g.finish();
  }

  {
    Reader l(top.at("law"), "/law");
    sc.p = l.number("p");
    if (l.has("eps_reg")) {
      const json& e = l.at("eps_reg");
      if (e.is_string()) {
        if (e.get<std::string>() != "coupled") {
          throw ParseError("key '/law/eps_reg': expected a number or \"coupled\"");
        }
        sc.eps_reg = EpsRegPolicy{true, 0.0};
      } else {
        sc.eps_reg = EpsRegPolicy{false, as_number(e, "/law/eps_reg")};
      }
    }
    l.finish();
  }

  {
    Reader t(top.at("time"), "/time");
    sc.T = t.number("T", sc.T);
    const json& n = t.at("n");
    sc.n_list.clear();
    if (n.is_number_integer()) {
      sc.n_list.push_back(n.get<int>());
    } else if (n.is_array() && !n.empty()) {
      for (std::size_t i = 0; i < n.size(); ++i) {
        if (!n[i].is_number_integer()) Reader::fail_type("/time/n/" + std::to_string(i), "integer");
        sc.n_list.push_back(n[i].get<int>());
      }
    } else {
      Reader::fail_type("/time/n", "integer or non-empty array of integers");
    }
    t.finish();
  }

  if (top.has("crack")) {
    Reader c(top.at("crack"), "/crack");
    const json& pts = c.at("points");
    if (!pts.is_array()) Reader::fail_type("/crack/points", "array of [x, y] points");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto xy = as_pair(pts[i], "/crack/points/" + std::to_string(i));
      sc.crack_points.push_back({xy[0], xy[1]});
    }
    const json& rt = c.at("release_times");
    if (!rt.is_array()) Reader::fail_type("/crack/release_times", "array");
    for (std::size_t i = 0; i < rt.size(); ++i) {
      sc.release_times.push_back(parse_release_time(rt[i], "/crack/release_times/" + std::to_string(i)));
    }
    c.finish();
  }

  if (top.has("loads")) {
    Reader l(top.at("loads"), "/loads");
    if (l.has("f")) sc.f = parse_field(l.at("f"), "/loads/f");
    if (l.has("z")) sc.z = parse_field(l.at("z"), "/loads/z");
    l.finish();
  }

  if (top.has("initial")) {
    Reader i(top.at("initial"), "/initial");
    if (i.has("u0")) sc.u0 = parse_initial(i.at("u0"), "/initial/u0");
    if (i.has("u1")) sc.u1 = parse_initial(i.at("u1"), "/initial/u1");
    i.finish();
  }

  if (top.has("solver")) {
    Reader s(top.at("solver"), "/solver");
    sc.solver.newton_tol = s.number("newton_tol", sc.solver.newton_tol);
    sc.solver.newton_max_iter = s.integer("newton_max_iter", sc.solver.newton_max_iter);
    sc.solver.hessian_floor = s.number("hessian_floor", sc.solver.hessian_floor);
    sc.solver.warm_start = s.boolean("warm_start", sc.solver.warm_start);
    sc.solver.threads = s.integer("threads", sc.solver.threads);
    s.finish();
  }

  if (top.has("outputs")) {
    Reader o(top.at("outputs"), "/outputs");
    sc.outputs.ledger = o.string("ledger", sc.outputs.ledger);
    sc.outputs.snapshot_stride = o.integer("snapshot_stride", sc.outputs.snapshot_stride);
    sc.outputs.snapshots = o.boolean("snapshots", sc.outputs.snapshots);
    sc.outputs.summary = o.boolean("summary", sc.outputs.summary);
    o.finish();
  }

  if (top.has("paradox")) {
    Reader p(top.at("paradox"), "/paradox");
    sc.paradox_tol_fraction = p.number("tolerance_fraction", sc.paradox_tol_fraction);
    p.finish();
  }

  top.finish();
}

void validate_scalars(const Scenario& sc) {
  const GeometrySpec& g = sc.geometry;
  if (!(g.width > 0.0) || !(g.height > 0.0) || g.nx < 2 || g.ny < 2) {
    throw ValidationError("geometry: need width, height > 0 and nx, ny >= 2");
  }
  if (!(sc.p > 1.0) || !std::isfinite(sc.p)) throw ValidationError("law: p must be a finite number > 1");
  if (!sc.eps_reg.coupled && !(sc.eps_reg.value >= 0.0)) {
    throw ValidationError("law: eps_reg must be >= 0");
  }
  if (!(sc.T > 0.0) || !std::isfinite(sc.T)) throw ValidationError("time: T must be positive");
  for (int n : sc.n_list) {
    if (n < 1) throw ValidationError("time: every n must be >= 1");
  }
  if (!(sc.solver.newton_tol > 0.0)) throw ValidationError("solver: newton_tol must be positive");
  if (sc.solver.newton_max_iter < 1) throw ValidationError("solver: newton_max_iter must be >= 1");
  if (!(sc.solver.hessian_floor >= 0.0)) throw ValidationError("solver: hessian_floor must be >= 0");
  if (sc.outputs.snapshot_stride < 0) throw ValidationError("outputs: snapshot_stride must be >= 0");
  if (!(sc.paradox_tol_fraction > 0.0)) {
    throw ValidationError("paradox: tolerance_fraction must be positive");
  }
  if (!sc.crack_points.empty() && sc.release_times.size() + 1 != sc.crack_points.size()) {
    throw ValidationError("crack: need one release time per segment (points - 1)");
  }
  if (sc.crack_points.size() == 1) throw ValidationError("crack: a path needs at least two points");
  for (std::size_t i = 0; i < sc.release_times.size(); ++i) {
    if (!(sc.release_times[i] >= 0.0)) {
      throw ValidationError("crack: release times must be >= 0");
    }
    if (i > 0 && sc.release_times[i] < sc.release_times[i - 1]) {
      throw ValidationError(
          "(E4) crack release times must be non-decreasing along the path (monotone growth)");
    }
  }
}

int vertex_at(const GeometrySpec& g, const Point2& p, std::size_t index) {
  const double hx = g.width / g.nx;
  const double hy = g.height / g.ny;
  const long i = std::lround(p.x / hx);
  const long j = std::lround(p.y / hy);
  const double tol = 1e-9 * std::max(hx, hy);
  if (i < 0 || i > g.nx || j < 0 || j > g.ny || std::abs(i * hx - p.x) > tol ||
      std::abs(j * hy - p.y) > tol) {
    throw ValidationError("crack: point " + std::to_string(index) + " is not a mesh vertex");
  }
  return static_cast<int>(j * (g.nx + 1) + i);
}

/// Warns when every Dirichlet vertex lies on one side of the line through
/// the crack end points.
void check_dirichlet_sides(const Scenario& sc, const Mesh& mesh, std::vector<std::string>& warnings) {
  if (sc.crack_points.size() < 2) return;
  const Point2 a = sc.crack_points.front();
  const Point2 b = sc.crack_points.back();
  const std::vector<bool> dir = dirichlet_vertices(mesh);
  const double scale = std::hypot(b.x - a.x, b.y - a.y) * std::max(sc.geometry.width, sc.geometry.height);
  bool pos = false;
  bool neg = false;
  for (std::size_t v = 0; v < dir.size(); ++v) {
    if (!dir[v]) continue;
    const Point2& q = mesh.vertices[v];
    const double s = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
    if (s > 1e-12 * scale) pos = true;
    if (s < -1e-12 * scale) neg = true;
  }
  if (!(pos && neg)) {
    warnings.push_back(
        "(E3) the Dirichlet boundary lies on one side of the crack line; coercivity may be lost "
        "once the crack separates the body");
  }
}

Eigen::VectorXd initial_field(const InitialSpec& spec, const Mesh& mesh, const Eigen::VectorXd& lift) {
  switch (spec.kind) {
    case InitialSpec::Kind::Zero:
      return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_dofs()));
    case InitialSpec::Kind::Lift:
      return lift;
    case InitialSpec::Kind::Field:
      return spec.field.nodal(mesh, 0.0);
  }
  return {};
}

}  // namespace

int Scenario::snapshot_stride(int n) const {
  if (outputs.snapshot_stride > 0) return outputs.snapshot_stride;
  return std::max(1, (n + 9) / 10);
}

std::unique_ptr<Problem> build_problem(const Scenario& sc) {
  validate_scalars(sc);
  const GeometrySpec& g = sc.geometry;
  Mesh mesh = build_rect_mesh(g.width, g.height, g.nx, g.ny, g.dirichlet);

  CrackPath path;
  for (std::size_t i = 0; i < sc.crack_points.size(); ++i) {
    path.vertices.push_back(vertex_at(g, sc.crack_points[i], i));
  }
  path.release_times = sc.release_times;
  CrackedSpace space = [&] {
    try {
      return insert_crack(mesh, path);
    } catch (const CrackError& e) {
      throw ValidationError(std::string("crack: ") + e.what());
    }
  }();

  LoadData loads;
  loads.f = sc.f;
  loads.z = sc.z;
  const Mesh& m = space.mesh();
  loads.u0 = initial_field(sc.u0, m, sc.z.nodal(m, 0.0));
  loads.u1 = initial_field(sc.u1, m, sc.z.nodal_rate(m, 0.0));
  try {
    check_compatibility(space, loads);
  } catch (const IncompatibleData& e) {
    throw ValidationError(e.what());
  }
  return std::make_unique<Problem>(std::move(space), std::move(loads));
}

Scenario parse_scenario_text(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError(source + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  Scenario sc;
  try {
    parse_into(root, sc);
  } catch (const ParseError& e) {
    throw ParseError(source + ": " + e.what());
  } catch (const json::exception& e) {
    throw ParseError(source + ": " + e.what());
  }
  const auto problem = build_problem(sc);
  check_dirichlet_sides(sc, problem->space.mesh(), sc.warnings);
  return sc;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

}  // namespace kvcrack
