#include "doctest.h"

#include <atomic>
#include <cstdlib>

#include "gplab/config.hpp"
#include "gplab/error.hpp"
#include "gplab/io.hpp"
#include "gplab/parallel.hpp"

using namespace gplab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gplab_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("defaults parse and match the documented values") {
  const RunConfig c = parse_config(Json::object());
  CHECK(c.radial());
  CHECK(c.grid.n == 4096);
  CHECK(c.nl.g() == -1.0);
  CHECK(c.branch.relative);
  CHECK(c.simulate.nu == 4.0);
}

TEST_CASE("schema violations are config errors") {
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"grid": {"radial": {"n": -4}}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"unknown": 1})")), ConfigError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"potential": {"kind": "square"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"grid": {"box": {"n": 33}}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"branch": {"lambda_range": [1, 2], "offset_range": [0.1, 0.2]}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"simulate": {"z0": [[0.1]]}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"fgr": {"eps_ladder": [0.01]}})")), ConfigError);
  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << "{ not json";
  CHECK_THROWS_AS(load_config(bad.string()), ConfigError);
}

TEST_CASE("complex amplitudes and absolute ranges") {
  const RunConfig c = parse_config(Json::parse(R"({"simulate": {"z0": [[0.01, -0.02]], "lambda0": 5.0},
                                                   "branch": {"lambda_range": [4.8, 5.2]}})"));
  CHECK(c.simulate.z0[0] == cplx(0.01, -0.02));
  CHECK_FALSE(c.simulate.relative);
  CHECK(c.simulate.lambda == 5.0);
  CHECK_FALSE(c.branch.relative);
}

TEST_CASE("field container round trip") {
  CVec z(5);
  for (int i = 0; i < 5; ++i) z[i] = cplx(i, -0.5 * i);
  const fs::path p = scratch("z.fld");
  write_field(p, z, {{"geometry", "radial"}});
  const Field f = read_field(p);
  CHECK(f.is_complex());
  CHECK(f.header["geometry"] == "radial");
  CHECK((f.complex - z).norm() == 0.0);
  const Vec v = Vec::LinSpaced(4, 0.0, 1.0);
  write_field(p, v, {});
  CHECK((read_field(p).real - v).norm() == 0.0);
  std::ofstream(scratch("junk.fld")) << "nonsense";
  CHECK_THROWS(read_field(scratch("junk.fld")));
}

TEST_CASE("json output is byte-stable and hashes match known digests") {
  const Json doc{{"b", 1.0}, {"a", {1, 2}}};
  write_json(scratch("a.json"), doc);
  write_json(scratch("b.json"), Json::parse(doc.dump()));
  CHECK(sha256_file(scratch("a.json")) == sha256_file(scratch("b.json")));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("manifest lists every written file") {
  const fs::path dir = scratch("run");
  fs::remove_all(dir);
  Manifest m(dir);
  write_json(m.file("x.json", "report"), {{"v", 1}});
  CsvWriter(m.file("y.csv", "table"), {"a", "b"}).row({1.0, 2.0});
  m.write("test");
  const Json man = read_json(dir / "manifest.json");
  REQUIRE(man["files"].size() == 2);
  CHECK(man["files"][0]["path"] == "x.json");
  CHECK(man["files"][0]["sha256"] == sha256_file(dir / "x.json"));
  Manifest again(dir);
  write_json(again.file("z.json", "report"), {});
  again.write("second");
  CHECK(read_json(dir / "manifest.json")["files"].size() == 3);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, [&](int i) { ++hits[i]; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, [](int i) {
                    if (i == 3) throw NumericalError("boom");
                  }),
                  NumericalError);
  setenv("GP_LAB_THREADS", "2", 1);
  CHECK(thread_cap() == 2);
  unsetenv("GP_LAB_THREADS");
}
