#include "tvlevel/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tvlevel {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// PNM token scanner: skips whitespace and # comments.
struct PnmScanner {
  const std::string& data;
  size_t pos = 0;
  const std::string& path;

  void skip_space() {
    while (pos < data.size()) {
      if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        pos++;
      } else if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') pos++;
      } else {
        break;
      }
    }
  }
  long next_int() {
    skip_space();
    size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) pos++;
    if (start == pos) fail(path, "truncated header");
    return std::stol(data.substr(start, pos - start));
  }
};

}  // namespace

void atomic_write(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(tmp.string(), "cannot open for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(tmp.string(), "short write");
  }
  fs::rename(tmp, target);
}

void write_pgm(const std::string& path, const ScalarField& f, double lo, double hi,
               int maxval, bool ascii) {
  if (maxval != 255 && maxval != 65535) fail(path, "maxval must be 255 or 65535");
  if (!(hi > lo)) fail(path, "empty range");
  std::ostringstream out;
  out << (ascii ? "P2" : "P5") << "\n" << f.width() << " " << f.height() << "\n" << maxval << "\n";
  for (int y = 0; y < f.height(); y++)
    for (int x = 0; x < f.width(); x++) {
      const double v = f.kind(x, y) == CellKind::Outside ? lo : f.at(x, y);
      long lv = std::lround((v - lo) / (hi - lo) * maxval);
      lv = std::clamp(lv, 0l, long(maxval));
      if (ascii) {
        out << lv << (x + 1 == f.width() ? "\n" : " ");
      } else if (maxval == 255) {
        out.put(static_cast<char>(lv));
      } else {
        out.put(static_cast<char>(lv >> 8));
        out.put(static_cast<char>(lv & 0xff));
      }
    }
  atomic_write(path, out.str());
}

namespace {

struct PgmRaw {
  int width, height, maxval;
  std::vector<long> levels;
};

PgmRaw read_pgm_raw(const std::string& path) {
  const std::string data = slurp(path);
  if (data.size() < 2 || data[0] != 'P' || (data[1] != '2' && data[1] != '5'))
    fail(path, "not a P2/P5 PGM");
  const bool ascii = data[1] == '2';
  PnmScanner sc{data, 2, path};
  PgmRaw raw;
  raw.width = static_cast<int>(sc.next_int());
  raw.height = static_cast<int>(sc.next_int());
  raw.maxval = static_cast<int>(sc.next_int());
  if (raw.width <= 0 || raw.height <= 0) fail(path, "bad dimensions");
  if (raw.maxval != 255 && raw.maxval != 65535) fail(path, "maxval must be 255 or 65535");
  raw.levels.reserve(static_cast<size_t>(raw.width) * raw.height);
  if (ascii) {
    for (long i = 0; i < long(raw.width) * raw.height; i++) raw.levels.push_back(sc.next_int());
  } else {
    size_t pos = sc.pos + 1;  // single whitespace after maxval
    const int bytes = raw.maxval == 255 ? 1 : 2;
    if (data.size() - pos < static_cast<size_t>(raw.width) * raw.height * bytes)
      fail(path, "truncated pixel data");
    for (long i = 0; i < long(raw.width) * raw.height; i++) {
      const unsigned char hi_byte = data[pos], lo_byte = bytes == 2 ? data[pos + 1] : 0;
      raw.levels.push_back(bytes == 1 ? hi_byte : (long(hi_byte) << 8) | lo_byte);
      pos += bytes;
    }
  }
  for (long lv : raw.levels)
    if (lv < 0 || lv > raw.maxval) fail(path, "pixel out of range");
  return raw;
}

}  // namespace

ScalarField read_pgm(const std::string& path, double lo, double hi, double delta) {
  const PgmRaw raw = read_pgm_raw(path);
  ScalarField f(raw.width, raw.height, delta);
  for (int i = 0; i < f.cells(); i++)
    f[i] = lo + double(raw.levels[i]) / raw.maxval * (hi - lo);
  return f;
}

void write_mask_pgm(const std::string& path, const GridGeometry& g, bool ascii) {
  std::ostringstream out;
  out << (ascii ? "P2" : "P5") << "\n" << g.width << " " << g.height << "\n255\n";
  for (int i = 0; i < g.cells(); i++) {
    const int code = g.mask[i] == CellKind::Outside ? 0 : g.mask[i] == CellKind::Boundary ? 128 : 255;
    if (ascii)
      out << code << ((i + 1) % g.width == 0 ? "\n" : " ");
    else
      out.put(static_cast<char>(code));
  }
  atomic_write(path, out.str());
}

GridGeometry read_mask_pgm(const std::string& path, double delta) {
  const PgmRaw raw = read_pgm_raw(path);
  if (raw.maxval != 255) fail(path, "mask PGM must have maxval 255");
  GridGeometry g(raw.width, raw.height, delta);
  for (int i = 0; i < g.cells(); i++) {
    switch (raw.levels[i]) {
      case 0: g.mask[i] = CellKind::Outside; break;
      case 128: g.mask[i] = CellKind::Boundary; break;
      case 255: g.mask[i] = CellKind::Interior; break;
      default: fail(path, "mask codes are {0, 128, 255}");
    }
  }
  g.validate();
  return g;
}

void write_pbm(const std::string& path, const BinarySet& e) {
  const auto& g = e.geom();
  std::ostringstream out;
  out << "P1\n" << g.width << " " << g.height << "\n";
  for (int y = 0; y < g.height; y++) {
    for (int x = 0; x < g.width; x++) {
      out << (e.contains(x, y) ? '1' : '0');
      out << (x + 1 == g.width ? '\n' : ' ');
    }
  }
  atomic_write(path, out.str());
}

BinarySet read_pbm(const std::string& path, double delta) {
  const std::string data = slurp(path);
  if (data.size() < 2 || data[0] != 'P' || data[1] != '1') fail(path, "not a P1 PBM");
  PnmScanner sc{data, 2, path};
  const int w = static_cast<int>(sc.next_int());
  const int h = static_cast<int>(sc.next_int());
  if (w <= 0 || h <= 0) fail(path, "bad dimensions");
  BinarySet e(GridGeometry(w, h, delta));
  int got = 0;
  for (size_t pos = sc.pos; pos < data.size() && got < w * h; pos++) {
    if (data[pos] == '0' || data[pos] == '1') e.bits()[got++] = data[pos] == '1';
    else if (data[pos] == '#')
      while (pos < data.size() && data[pos] != '\n') pos++;
    else if (!std::isspace(static_cast<unsigned char>(data[pos])))
      fail(path, "bad PBM digit");
  }
  if (got != w * h) fail(path, "truncated pixel data");
  return e;
}

void write_csv(const std::string& path, const ScalarField& f, double lo, double hi) {
  std::ostringstream out;
  out << "width,height,delta,lo,hi\n";
  out << f.width() << "," << f.height() << "," << fmt_double(f.delta()) << ","
      << fmt_double(lo) << "," << fmt_double(hi) << "\n";
  for (int y = 0; y < f.height(); y++)
    for (int x = 0; x < f.width(); x++) {
      const double v = f.kind(x, y) == CellKind::Outside ? 0.0 : f.at(x, y);
      out << fmt_double(v) << (x + 1 == f.width() ? "\n" : ",");
    }
  atomic_write(path, out.str());
}

CsvField read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::string header;
  if (!std::getline(in, header)) fail(path, "missing header");
  if (header != "width,height,delta,lo,hi" && header != "width,height,delta,lo,hi\r")
    fail(path, "expected header width,height,delta,lo,hi");
  std::string meta;
  if (!std::getline(in, meta)) fail(path, "missing metadata row");
  std::istringstream ms(meta);
  std::string tok;
  std::vector<double> m;
  while (std::getline(ms, tok, ',')) m.push_back(std::stod(tok));
  if (m.size() != 5) fail(path, "metadata row needs 5 fields");
  const int w = static_cast<int>(m[0]), h = static_cast<int>(m[1]);
  if (w <= 0 || h <= 0 || !(m[2] > 0)) fail(path, "bad metadata");
  CsvField r;
  r.field = ScalarField(w, h, m[2]);
  r.lo = m[3];
  r.hi = m[4];
  std::string line;
  for (int y = 0; y < h; y++) {
    if (!std::getline(in, line)) fail(path, "missing data row");
    std::istringstream ls(line);
    for (int x = 0; x < w; x++) {
      if (!std::getline(ls, tok, ',')) fail(path, "short data row");
      r.field.at(x, y) = std::stod(tok);
    }
  }
  return r;
}

}  // namespace tvlevel
