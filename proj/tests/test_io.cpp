#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "symmin/io.hpp"

using namespace symmin;

namespace {

Field sample_field() {
  Grid g(Domain::box(2, 1.5), {7, 9});
  Field u(g, 2);
  for (std::size_t p = 0; p < g.num_nodes(); ++p)
    for (int c = 0; c < 2; ++c)
      u.at(p, c) = std::sin(0.37 * (double)p + c) * 1e3;
  u.apply_mask();
  return u;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("domain and grid JSON round-trips") {
  for (Domain d : {Domain::ball(3, 2.0), Domain::annulus(2, 0.5, 1.5),
                   Domain::box(3, Vec{1.0, 2.0, 3.0})}) {
    Domain back = domain_from_json(domain_to_json(d));
    CHECK(back.kind == d.kind);
    CHECK(back.dim == d.dim);
    CHECK(back.bound(0) == d.bound(0));
  }
  Grid g(Domain::ball(2, 1.0), {11, 13});
  Grid back = grid_from_json(grid_to_json(g));
  CHECK(back.same_layout(g));
}

TEST_CASE("field binary container round-trips bit-exactly") {
  Field u = sample_field();
  std::stringstream buf;
  write_field(buf, u);
  Field back = read_field(buf);
  CHECK(back.grid.same_layout(u.grid));
  CHECK(back.m == u.m);
  REQUIRE(back.values.size() == u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i)
    CHECK(back.values[i] == u.values[i]);
}

TEST_CASE("field container rejects corrupt input") {
  Field u = sample_field();
  std::stringstream buf;
  write_field(buf, u);
  std::string raw = buf.str();

  std::stringstream bad_magic(std::string("NOPE") + raw.substr(4));
  CHECK_THROWS_AS(read_field(bad_magic), ConfigError);

  // implausible header length
  std::string huge = raw;
  huge[8] = (char)0xff;
  huge[14] = (char)0x7f;
  std::stringstream bad_header(huge);
  CHECK_THROWS_AS(read_field(bad_header), ConfigError);

  std::stringstream truncated(raw.substr(0, raw.size() - 16));
  CHECK_THROWS_AS(read_field(truncated), ConfigError);

  std::stringstream empty;
  CHECK_THROWS_AS(read_field(empty), ConfigError);
}

TEST_CASE("field file save/load and CSV shape") {
  Field u = sample_field();
  std::string path = temp_path("symmin_io_test.field");
  save_field(path, u);
  Field back = load_field(path);
  CHECK(back.values == u.values);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_field(path), ConfigError);

  std::stringstream csv;
  write_field_csv(csv, u);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "x0,x1,u1,u2");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == u.grid.num_nodes());
}

TEST_CASE("golden tables save, load, and compare with recorded tolerances") {
  GoldenTable t;
  t["I"] = {34.87, 1e-3};
  t["beta0"] = {5.8117, 1e-3};
  std::string path = temp_path("symmin_io_test.golden.json");
  save_golden(path, t, "unit-test table");
  GoldenTable back = load_golden(path);
  REQUIRE(back.size() == 2);
  CHECK(back["I"].value == t["I"].value);
  CHECK(back["beta0"].rel_tol == t["beta0"].rel_tol);

  GoldenCheck ok = check_golden(back, "I", 34.87 * (1.0 + 5e-4));
  CHECK(ok.pass);
  GoldenCheck fail = check_golden(back, "I", 34.87 * 1.01);
  CHECK(!fail.pass);
  CHECK(fail.rel_error == doctest::Approx(0.01).epsilon(1e-6));
  CHECK_THROWS_AS(check_golden(back, "unknown_name", 1.0), MissingGolden);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_golden(path), MissingGolden);
}

TEST_CASE("radial profile CSV has matched columns and rows") {
  RadialProfile prof;
  prof.N = 3;
  prof.r = {0.0, 0.1, 0.2};
  prof.v = {1.0, 0.5, 0.0};
  prof.vp = {0.0, -0.4, 0.0};
  prof.v0 = 1.0;
  prof.R_support = 0.2;
  std::stringstream csv;
  write_profile_csv(csv, prof);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "r,v,dv");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 3);
  json meta = profile_to_json(prof);
  CHECK(meta["dim"] == 3);
  CHECK(meta["support_radius"] == 0.2);
}
