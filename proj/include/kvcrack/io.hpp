#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kvcrack/cracked_space.hpp"
#include "kvcrack/energy.hpp"
#include "kvcrack/fem.hpp"
#include "kvcrack/stepper.hpp"

namespace kvcrack {

/// Writes to a temporary sibling and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Shortest-roundtrip-safe 17 significant digits.
std::string format_real(double x);

inline constexpr const char* kLedgerHeader =
    "k,t,kinetic,elastic,viscous_cum,work_cum,crack_cum,residual_kv,residual_general";

std::string ledger_csv(const EnergyLedger& ledger);
void write_ledger_csv(const std::filesystem::path& path, const EnergyLedger& ledger);

/// Plain-text snapshot: vertex coordinates with displacement, triangles with
/// the strain magnitude, and released crack segments as base-vertex pairs.
std::string snapshot_text(const CrackedSpace& space, const FemOperators& ops, const StepState& state);
void write_snapshot(const std::filesystem::path& dir, const CrackedSpace& space,
                    const FemOperators& ops, const StepState& state);

struct SweepRow {
  int n = 0;
  double max_residual_kv = 0.0;
  double max_residual_general = 0.0;
  EstimateReport estimates;
};

inline constexpr const char* kSweepHeader =
    "n,max_residual_kv,max_residual_general,estM_q1,estM_q2,estM_q3,estM_q4,estM_q5";

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace kvcrack
