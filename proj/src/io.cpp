#include "qheat/io.hpp"

#include <cstdio>
#include <fstream>

#include "qheat/sha1.hpp"

namespace qheat {

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
}

void write_snapshots_csv(const std::filesystem::path& path, const SolveResult& res,
                         const Transform& T) {
  std::string s = "t,y,x,v,u,du_dx,d2u_dx2\n";
  for (const auto& f : res.trajectory) {
    const auto phys = v_to_u_derivatives(f, T);
    for (Index i = 0; i < f.size(); ++i) {
      s += fmt_full(f.t);
      s += ',';
      s += fmt_full(f.grid.y(i));
      s += ',';
      s += fmt_full(phys.x[i]);
      s += ',';
      s += fmt_full(f.v[i]);
      s += ',';
      s += fmt_full(phys.u[i]);
      s += ',';
      s += fmt_full(phys.du_dx[i]);
      s += ',';
      s += fmt_full(phys.d2u_dx2[i]);
      s += '\n';
    }
  }
  write_text_file(path, s);
}

void write_diagnostics_csv(const std::filesystem::path& path,
                           const std::vector<DiagnosticsReport>& reports) {
  std::string s = "t,lip_sqrt,q_ratio,d2_sup,d2_at_zero,zero_residual,barrier_margin\n";
  for (const auto& r : reports) {
    s += fmt_full(r.t);
    s += ',';
    s += fmt_full(r.lip_sqrt);
    s += ',';
    s += fmt_full(r.q_ratio);
    s += ',';
    s += fmt_full(r.d2_sup);
    s += ',';
    s += fmt_full(r.d2_at_zero);
    s += ',';
    s += fmt_full(r.zero_residual);
    s += ',';
    s += fmt_full(r.barrier_margin);
    s += '\n';
  }
  write_text_file(path, s);
}

void write_f64_dump(const std::filesystem::path& path, const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  const uint64_t n = values.size();
  uint8_t hdr[8];
  for (int i = 0; i < 8; ++i) hdr[i] = static_cast<uint8_t>(n >> (8 * i));
  out.write(reinterpret_cast<const char*>(hdr), 8);
  for (double v : values) {
    uint64_t bits;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&bits, &v, 8);
    uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  }
}

std::string sha1_of_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for hashing: " + path.string());
  Sha1 h;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(buf, static_cast<size_t>(in.gcount()));
  }
  return h.hex();
}

}  // namespace qheat
