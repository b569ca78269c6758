#include "kvcrack/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kvcrack {

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string ledger_csv(const EnergyLedger& ledger) {
  std::string out = kLedgerHeader;
  out += '\n';
  for (const LedgerRow& r : ledger.rows) {
    out += std::to_string(r.k);
    for (double v : {r.t, r.kinetic, r.elastic, r.viscous_cum, r.work_cum, r.crack_cum,
                     r.residual_kv, r.residual_general}) {
      out += ',';
      out += format_real(v);
    }
    out += '\n';
  }
  return out;
}

void write_ledger_csv(const std::filesystem::path& path, const EnergyLedger& ledger) {
  atomic_write(path, ledger_csv(ledger));
}

std::string snapshot_text(const CrackedSpace& space, const FemOperators& ops, const StepState& state) {
  const Mesh& mesh = space.mesh();
  std::ostringstream out;
  out << "step " << state.k << "\n";
  out << "time " << format_real(state.t) << "\n";
  out << "vertices " << mesh.num_vertices() << "\n";
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    out << format_real(mesh.vertices[v].x) << ' ' << format_real(mesh.vertices[v].y) << ' '
        << format_real(state.u[static_cast<Eigen::Index>(2 * v)]) << ' '
        << format_real(state.u[static_cast<Eigen::Index>(2 * v + 1)]) << "\n";
  }
  out << "triangles " << mesh.num_triangles() << "\n";
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    out << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << format_real(norm(ops.strain(t, state.u)))
        << "\n";
  }
  const ConstraintSet c = space.active_constraints(state.t);
  const auto& pv = space.path().vertices;
  std::size_t released = 0;
  for (bool tied : c.tied) released += tied ? 0 : 1;
  out << "crack_segments " << released << "\n";
  for (std::size_t s = 0; s < c.tied.size(); ++s) {
    if (!c.tied[s]) out << pv[s] << ' ' << pv[s + 1] << "\n";
  }
  return out.str();
}

void write_snapshot(const std::filesystem::path& dir, const CrackedSpace& space,
                    const FemOperators& ops, const StepState& state) {
  atomic_write(dir / ("snap_" + std::to_string(state.k) + ".txt"), snapshot_text(space, ops, state));
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = kSweepHeader;
  out += '\n';
  for (const SweepRow& r : rows) {
    out += std::to_string(r.n);
    out += ',' + format_real(r.max_residual_kv);
    out += ',' + format_real(r.max_residual_general);
    for (double q : r.estimates.values()) out += ',' + format_real(q);
    out += '\n';
  }
  return out;
}

}  // namespace kvcrack
