#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tlgerm/effective.hpp"
#include "tlgerm/errors.hpp"
#include "tlgerm/fvm.hpp"
#include "tlgerm/germ.hpp"
#include "tlgerm/hj.hpp"

namespace tlgerm {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header,
            const std::vector<std::string>& preamble = {})
      : out_(path) {
    if (!out_) throw Error("cannot write " + path.string());
    for (const auto& line : preamble) out_ << "# " << line << '\n';
    row_strings(header);
  }
  void row(std::initializer_list<double> vals) {
    bool first = true;
    for (double v : vals) {
      if (!first) out_ << ',';
      out_ << num(v);
      first = false;
    }
    out_ << '\n';
  }
  void row_strings(const std::vector<std::string>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) out_ << (i ? "," : "") << quote(vals[i]);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
};

// lambda,hat1,hat2 on the tabulation nodes of the hat curves, limiters in the preamble.
inline void write_effective_germ_csv(const std::filesystem::path& path, const GermParams& L) {
  CsvWriter w(path, {"lambda", "hat1", "hat2"},
              {"bar0=" + num(L.bar0) + ",bar1=" + num(L.bar1) + ",bar2=" + num(L.bar2)});
  std::vector<double> xs = L.hat1.xs();
  xs.insert(xs.end(), L.hat2.xs().begin(), L.hat2.xs().end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double l : xs)
    if (l <= L.bar0) w.row({l, L.hat(1, l), L.hat(2, l)});
}

inline void write_snapshot_csv(const std::filesystem::path& path, const Field& f) {
  CsvWriter w(path, {"x", "branch", "rho"});
  for (int j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < f.cells(); ++i)
      w.row({f.x_center(j, i), static_cast<double>(j), f.u[static_cast<std::size_t>(j)][i]});
}

inline void write_trace_csv(const std::filesystem::path& path, const Trajectory& tr) {
  CsvWriter w(path, {"t", "phi0", "phi1", "phi2", "p0", "p1", "p2"});
  for (const auto& r : tr.trace) w.row({r.t, r.phi[0], r.phi[1], r.phi[2], r.p[0], r.p[1], r.p[2]});
}

inline void write_ledger_csv(const std::filesystem::path& path, const Trajectory& tr) {
  CsvWriter w(path, {"t", "mass", "inflow", "outflow", "residual"});
  for (const auto& r : tr.ledger) w.row({r.t, r.mass, r.inflow, r.outflow, r.residual});
}

inline std::string snapshot_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_%.6f.csv", t);
  return buf;
}

struct ConvergenceRow {
  double eps, l1_error;
};

inline void write_convergence_csv(const std::filesystem::path& path, const std::vector<ConvergenceRow>& rows) {
  CsvWriter w(path, {"eps", "l1_error"});
  for (const auto& r : rows) w.row({r.eps, r.l1_error});
}

struct GermCheckRow {
  std::string kind;
  Triple p;
  double violation;
};

inline void write_germ_check_csv(const std::filesystem::path& path, const std::vector<GermCheckRow>& rows) {
  CsvWriter w(path, {"kind", "p0", "p1", "p2", "violation"});
  for (const auto& r : rows) w.row_strings({r.kind, num(r.p[0]), num(r.p[1]), num(r.p[2]), num(r.violation)});
}

inline void write_corrector_csv(const std::filesystem::path& path, const Corrector& c, int nt, int nx, double X) {
  CsvWriter w(path, {"t", "x", "branch", "u"});
  for (int it = 0; it < nt; ++it) {
    double t = static_cast<double>(it) / nt;
    for (int j = 0; j < 3; ++j)
      for (int ix = 0; ix <= nx; ++ix) {
        double x = X * ix / nx;
        if (j == 0) x = -x;
        if (ix == 0) x = j == 0 ? -1e-6 : 1e-6;
        w.row({t, x, static_cast<double>(j), c.density(j, t, x)});
      }
  }
}

}  // namespace tlgerm
