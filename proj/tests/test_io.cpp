#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tvlevel/io.hpp"
#include "tvlevel/verify.hpp"

using namespace tvlevel;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("tvlevel_io_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("pgm round trip at both depths") {
  TempDir tmp;
  const ScalarField f = verify::smooth_field(9, 6, 0.5, 3);
  for (int maxval : {255, 65535}) {
    for (bool ascii : {false, true}) {
      const std::string path = tmp.file("f.pgm");
      write_pgm(path, f, 0.0, 1.0, maxval, ascii);
      const ScalarField g = read_pgm(path, 0.0, 1.0, 0.5);
      REQUIRE(g.width() == 9);
      REQUIRE(g.height() == 6);
      for (int i = 0; i < f.cells(); i++)
        CHECK(std::abs(g[i] - f[i]) <= 0.51 / maxval + 1e-12);
    }
  }
}

TEST_CASE("csv is a lossless round trip") {
  TempDir tmp;
  const ScalarField f = verify::smooth_field(7, 8, 0.125, 5);
  const std::string path = tmp.file("f.csv");
  write_csv(path, f, 0.0, 1.0);
  const CsvField r = read_csv(path);
  CHECK(r.lo == 0.0);
  CHECK(r.hi == 1.0);
  CHECK(r.field.delta() == 0.125);
  CHECK(r.field.values() == f.values());
}

TEST_CASE("pbm round trip") {
  TempDir tmp;
  const BinarySet e = verify::random_set(11, 4, 1.0, 9);
  const std::string path = tmp.file("e.pbm");
  write_pbm(path, e);
  const BinarySet r = read_pbm(path);
  CHECK(r.bits() == e.bits());
}

TEST_CASE("mask codes round trip and reject junk") {
  TempDir tmp;
  GridGeometry g(5, 4, 1.0);
  g.mask[0] = CellKind::Outside;
  g.mask[7] = CellKind::Boundary;
  const std::string path = tmp.file("mask.pgm");
  write_mask_pgm(path, g);
  const GridGeometry r = read_mask_pgm(path);
  CHECK(r.mask == g.mask);

  std::ofstream bad(tmp.file("bad.pgm"), std::ios::binary);
  bad << "P5\n2 1\n255\n";
  bad.put(char(17));
  bad.put(char(255));
  bad.close();
  CHECK_THROWS_AS((void)read_mask_pgm(tmp.file("bad.pgm")), std::runtime_error);
}

TEST_CASE("malformed inputs raise errors") {
  TempDir tmp;
  CHECK_THROWS_AS((void)read_pgm(tmp.file("missing.pgm"), 0, 1), std::runtime_error);
  {
    std::ofstream f(tmp.file("trunc.pgm"), std::ios::binary);
    f << "P5\n4 4\n255\nab";
  }
  CHECK_THROWS_AS((void)read_pgm(tmp.file("trunc.pgm"), 0, 1), std::runtime_error);
  {
    std::ofstream f(tmp.file("badheader.csv"));
    f << "width,height\n1,1\n0\n";
  }
  CHECK_THROWS_AS((void)read_csv(tmp.file("badheader.csv")), std::runtime_error);
  {
    std::ofstream f(tmp.file("short.csv"));
    f << "width,height,delta,lo,hi\n3,2,1,0,1\n0,0,0\n";
  }
  CHECK_THROWS_AS((void)read_csv(tmp.file("short.csv")), std::runtime_error);
}

TEST_CASE("atomic write replaces, never truncates in place") {
  TempDir tmp;
  const std::string path = tmp.file("x.txt");
  atomic_write(path, "first");
  atomic_write(path, "second");
  std::ifstream in(path);
  std::string got;
  in >> got;
  CHECK(got == "second");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
}
