#pragma once

#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tunnel/errors.hpp"
#include "tunnel/trajectories.hpp"

namespace tunnel::csv {

inline constexpr int schema_version = 1;

inline const std::string spectrum_header = "n,E_plus,E_minus,splitting,flags";
inline const std::string levels_header = "n,parity,energy";
inline const std::string scan_header = "hbar_inverse,level,method,ln_exact,ln_semiclassical,ln_ratio,lambda,flags";
inline const std::string trace_grid_header = "re_T,im_T,re_delta0,im_delta0";
inline const std::string trajectory_header = "s,re_q,im_q,re_p,im_p,re_t,im_t";
inline const std::string staircase_header = "segment,direction,duration";

inline std::string preamble(const std::string& name) {
  return "# tunnel." + name + " schema " + std::to_string(schema_version);
}

inline std::string number(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Writer {
 public:
  Writer(const std::filesystem::path& path, const std::string& name, const std::string& header) : out_(path) {
    if (!out_) throw ConfigError("cannot write '" + path.string() + "'");
    out_ << preamble(name) << '\n' << header << '\n';
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(double x) { return number(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }

  std::ofstream out_;
};

inline void write_trajectory(const std::filesystem::path& path, const Trajectory& tr) {
  Writer w(path, "trajectory", trajectory_header);
  for (auto& s : tr.samples) w.row(s.s, s.q.real(), s.q.imag(), s.p.real(), s.p.imag(), s.t.real(), s.t.imag());
}

inline void write_staircase(const std::filesystem::path& path, const ComplexTimePath& p) {
  Writer w(path, "staircase", staircase_header);
  int i = 0;
  for (auto& s : p.segments) w.row(i++, s.direction == Direction::real ? "real" : "imaginary", s.duration);
}

}  // namespace tunnel::csv
