#include <filesystem>

#include "doctest.h"
#include "geotri/error.hpp"
#include "geotri/io.hpp"
#include "geotri/random.hpp"

using namespace geotri;
namespace fs = std::filesystem;

TEST_CASE("split and trim") {
  CHECK(io::split("a\t\tb", '\t') == std::vector<std::string>{"a", "", "b"});
  CHECK(io::split_lines("x\r\ny\n") == std::vector<std::string>{"x", "y"});
  CHECK(io::trim("  pad \t") == "pad");
}

TEST_CASE("strict number parsing") {
  CHECK(io::parse_double(" 42.36 ") == doctest::Approx(42.36));
  CHECK_FALSE(io::parse_double("4x"));
  CHECK_FALSE(io::parse_double(""));
  CHECK(io::parse_int("-7") == -7);
  CHECK_FALSE(io::parse_int("7.5"));
}

TEST_CASE("exact formats round trip") {
  for (double v : {0.1, 1.0 / 3.0, -71.06, 6.02214076e23, 5e-324}) {
    CHECK(*io::parse_double(io::format_exact(v)) == v);
    CHECK(*io::parse_double(io::format_shortest(v)) == v);
  }
  CHECK(io::format_shortest(-71.06) == "-71.06");
}

TEST_CASE("atomic write replaces content and leaves no temp file") {
  const auto dir = fs::temp_directory_path() / "geotri_io_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto target = dir / "out.txt";
  io::write_file_atomic(target, "first");
  io::write_file_atomic(target, "second");
  CHECK(io::read_file(target) == "second");
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);
  fs::remove_all(dir);
}

TEST_CASE("missing file is an I/O error") {
  CHECK_THROWS_AS(io::read_file("/nonexistent/geotri/file"), IoError);
  CHECK_THROWS_AS(io::write_file_atomic("/nonexistent/geotri/out", "x"), IoError);
}

TEST_CASE("random helpers are deterministic and in range") {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const auto k = uniform_index(a, 7);
    CHECK(k < 7);
    CHECK(k == uniform_index(b, 7));
    const double u = uniform_unit(a);
    CHECK(u == uniform_unit(b));
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  // Pinned so a change of generator or helper shows up here.
  Rng c(42);
  const auto first = c();
  Rng d(42);
  CHECK(d() == first);
  CHECK(fnv1a("") == 14695981039346656037ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("standard normal moments") {
  Rng rng(11);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    sum += z;
    sq += z * z;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.01).scale(1.0));
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.01));
}
