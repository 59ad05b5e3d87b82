#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "qheat/diagnostics.hpp"
#include "qheat/solver.hpp"

namespace qheat {

using Json = nlohmann::ordered_json;

/// Snapshot dump: one row per (snapshot, node) with columns
/// t,y,x,v,u,du_dx,d2u_dx2. Comma separated, '.' decimal, LF endings.
void write_snapshots_csv(const std::filesystem::path& path, const SolveResult& res,
                         const Transform& T);

/// Diagnostics dump: t,lip_sqrt,q_ratio,d2_sup,d2_at_zero,zero_residual,barrier_margin.
void write_diagnostics_csv(const std::filesystem::path& path,
                           const std::vector<DiagnosticsReport>& reports);

void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Little-endian float64 dump, length-prefixed with a uint64 count.
void write_f64_dump(const std::filesystem::path& path, const std::vector<double>& values);

std::string sha1_of_file(const std::filesystem::path& path);

/// Render a double so that the value round-trips exactly.
std::string fmt_full(double v);

}  // namespace qheat
