#pragma once
// Text output: CSV tables and gnuplot-ready data files. Numbers are printed
// with %.17g so a report parsed back gives the exact doubles that were
// computed -- byte-identical reports are part of the determinism contract,
// so nothing locale- or clock-dependent belongs here.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "mvk/grid.hpp"

namespace mvk {

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
  if (!out) throw ConfigError("write failed: " + path);
}

// One CSV table: a header line plus string rows, newline-terminated.
struct CsvTable {
  std::vector<std::string> comments;  // emitted first, prefixed with '# '
  std::string header;
  std::vector<std::string> rows;

  std::string str() const {
    std::string s;
    for (const auto& c : comments) s += "# " + c + "\n";
    s += header + "\n";
    for (const auto& r : rows) s += r + "\n";
    return s;
  }
  void write(const std::string& path) const { write_text_file(path, str()); }
};

inline std::string csv_field2(const Field2<double>& f, const char* value_name = "value") {
  std::string s = std::string("i,j,x1,x2,") + value_name + "\n";
  const Grid2& g = f.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 x = g.node(i, j);
      s += std::to_string(i) + "," + std::to_string(j) + "," + format_number(x.x()) + "," +
           format_number(x.y()) + "," + format_number(f(i, j)) + "\n";
    }
  return s;
}

inline std::string csv_field2(const Field2<Vec2>& f, const char* n1 = "u1", const char* n2 = "u2") {
  std::string s = std::string("i,j,x1,x2,") + n1 + "," + n2 + "\n";
  const Grid2& g = f.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 x = g.node(i, j);
      s += std::to_string(i) + "," + std::to_string(j) + "," + format_number(x.x()) + "," +
           format_number(x.y()) + "," + format_number(f(i, j).x()) + "," +
           format_number(f(i, j).y()) + "\n";
    }
  return s;
}

inline std::string csv_deformation3(const Field3<Vec3>& f) {
  std::string s = "i,j,k,x1,x2,x3,y1,y2,y3\n";
  const Grid3& g = f.grid;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.plane.ny; ++j)
      for (int i = 0; i < g.plane.nx; ++i) {
        const Vec2 x = g.plane.node(i, j);
        const Vec3& v = f(i, j, k);
        s += std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + "," +
             format_number(x.x()) + "," + format_number(x.y()) + "," + format_number(g.x3(k)) +
             "," + format_number(v.x()) + "," + format_number(v.y()) + "," +
             format_number(v.z()) + "\n";
      }
  return s;
}

}  // namespace mvk
