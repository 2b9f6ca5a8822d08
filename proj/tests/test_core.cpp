#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tcgen/core/geodesy.hpp"
#include "tcgen/core/io.hpp"
#include "tcgen/core/types.hpp"
#include "tcgen/rng.hpp"

using namespace tcgen;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "tcgen_test_core";
  fs::create_directories(dir);
  return dir;
}

core::FieldStack small_stack() {
  core::FieldStack s;
  s.grid = {4, 3, -95.0, 28.0, 0.5, 0.5};
  s.units = "mm/hr";
  s.times = {0, 3600, 7200};
  s.values.resize(3 * 3 * 4);
  Rng rng(42);
  for (auto& v : s.values) v = rng.uniform() * 10.0;
  s.mask.assign(12, 0);
  s.mask[5] = 1;
  return s;
}

}  // namespace

TEST_CASE("great-circle distance basics") {
  CHECK(core::gc_distance({0, 0}, {0, 0}) == 0.0);
  // One meridian degree on the reference sphere.
  CHECK(core::gc_distance({0, 0}, {0, 1}) == doctest::Approx(111.195).epsilon(1e-4));
  CHECK(core::gc_distance({10, 20}, {-30, 55}) ==
        core::gc_distance({-30, 55}, {10, 20}));
  CHECK_THROWS_AS(core::gc_distance({0, 91}, {0, 0}), InputError);
}

TEST_CASE("great-circle distance matches spherical law of cosines") {
  // Independent evaluation via the chord/arc formula.
  auto slc = [](core::LonLat a, core::LonLat b) {
    const double d2r = core::kPi / 180.0;
    const double c = std::sin(a.lat * d2r) * std::sin(b.lat * d2r) +
                     std::cos(a.lat * d2r) * std::cos(b.lat * d2r) *
                         std::cos((b.lon - a.lon) * d2r);
    return core::kEarthRadiusKm * std::acos(std::min(1.0, std::max(-1.0, c)));
  };
  const double got = core::gc_distance({10, 20}, {-30, 55});
  CHECK(got == doctest::Approx(slc({10, 20}, {-30, 55})).epsilon(1e-9));
}

TEST_CASE("great-circle distance satisfies the triangle inequality") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    core::LonLat a{rng.uniform() * 360.0 - 180.0, rng.uniform() * 120.0 - 60.0};
    core::LonLat b{rng.uniform() * 360.0 - 180.0, rng.uniform() * 120.0 - 60.0};
    core::LonLat c{rng.uniform() * 360.0 - 180.0, rng.uniform() * 120.0 - 60.0};
    const double ab = core::gc_distance(a, b);
    const double bc = core::gc_distance(b, c);
    const double ac = core::gc_distance(a, c);
    CHECK(ac <= ab + bc + 1e-9 * (ab + bc));
  }
}

TEST_CASE("storm-centered polar angle convention") {
  const core::LonLat center{-90.0, 25.0};
  const auto origin = core::to_storm_polar(center, center);
  CHECK(origin.r_km == 0.0);
  CHECK(origin.theta == 0.0);

  const auto east = core::to_storm_polar({-89.0, 25.0}, center);
  CHECK(east.theta == doctest::Approx(0.0).epsilon(1e-12));
  const auto north = core::to_storm_polar({-90.0, 26.0}, center);
  CHECK(north.theta == doctest::Approx(core::kPi / 2).epsilon(1e-12));
}

TEST_CASE("polar round-trip within 0.5 km up to 1000 km") {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const core::LonLat center{rng.uniform() * 360.0 - 180.0, rng.uniform() * 90.0 - 45.0};
    const double r = rng.uniform() * 1000.0;
    const double th = rng.uniform() * 2.0 * core::kPi - core::kPi;
    const core::LonLat s = core::polar_to_lonlat(center, r, th);
    const auto back = core::to_storm_polar(s, center);
    CHECK(std::abs(back.r_km - r) < 0.5);
    if (r > 1.0) {
      double dth = std::abs(back.theta - th);
      dth = std::min(dth, 2.0 * core::kPi - dth);
      CHECK(dth < 0.01);
    }
  }
}

TEST_CASE("polar angle continuity across the west seam") {
  const core::LonLat center{0.0, 30.0};
  const auto above = core::to_storm_polar({-5.0, 30.0 + 1e-7}, center);
  const auto below = core::to_storm_polar({-5.0, 30.0 - 1e-7}, center);
  // Just above/below due west the angle jumps by ~2 pi only (the seam).
  CHECK(std::abs(std::abs(above.theta - below.theta) - 2.0 * core::kPi) < 1e-5);
}

TEST_CASE("distance to coast") {
  // Half-plane mask split at lon = 0: land for lon >= 0.
  core::GridSpec grid{21, 11, -10.0, -5.0, 1.0, 1.0};
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(grid.n_cells()), 0);
  for (int j = 0; j < grid.n_lat; ++j) {
    for (int i = 0; i < grid.n_lon; ++i) {
      if (grid.lon(i) >= 0.0) mask[static_cast<std::size_t>(j) * grid.n_lon + i] = 1;
    }
  }
  const double cell_km = core::kKmPerDegree;
  const double d = core::dist_to_coast({2.0, 0.0}, mask, grid);
  CHECK(std::abs(d - 2.0 * core::kKmPerDegree) <= cell_km);

  // Centered on a boundary cell: ~0 within one cell width.
  CHECK(core::dist_to_coast({0.0, 0.0}, mask, grid) <= cell_km);

  // Label-swap invariance.
  std::vector<std::uint8_t> swapped(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) swapped[i] = mask[i] ? 0 : 1;
  CHECK(core::dist_to_coast({2.0, 0.0}, swapped, grid) == doctest::Approx(d));

  std::vector<std::uint8_t> all_land(mask.size(), 1);
  CHECK_THROWS_AS(core::dist_to_coast({0, 0}, all_land, grid), InputError);
}

TEST_CASE("field stack round-trip is bit exact") {
  const auto dir = temp_dir();
  const auto stack = small_stack();
  core::write_field_stack(stack, dir / "s.json");
  const auto back = core::read_field_stack(dir / "s.json");
  CHECK(back.grid == stack.grid);
  CHECK(back.times == stack.times);
  CHECK(back.units == stack.units);
  CHECK(back.mask == stack.mask);
  REQUIRE(back.values.size() == stack.values.size());
  for (std::size_t i = 0; i < stack.values.size(); ++i) {
    CHECK(back.values[i] == stack.values[i]);  // bit-exact
  }
}

TEST_CASE("truncated blob names expected and actual byte counts") {
  const auto dir = temp_dir();
  const auto stack = small_stack();
  core::write_field_stack(stack, dir / "t.json");
  // Truncate the data blob.
  fs::resize_file(dir / "t.f64", 16);
  try {
    core::read_field_stack(dir / "t.json");
    FAIL("expected format error");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("16") != std::string::npos);
    CHECK(msg.find(std::to_string(stack.values.size() * 8)) != std::string::npos);
  }
}

TEST_CASE("invalid grid spec in manifest is rejected") {
  const auto dir = temp_dir();
  const auto stack = small_stack();
  core::write_field_stack(stack, dir / "g.json");
  std::ifstream in(dir / "g.json");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  auto pos = text.find("\"d_lon\": 0.5");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 12, "\"d_lon\": 0.0");
  std::ofstream(dir / "g.json") << text;
  CHECK_THROWS_AS(core::read_field_stack(dir / "g.json"), InputError);
}

TEST_CASE("non-hourly timestamps are rejected") {
  auto stack = small_stack();
  stack.times[2] = stack.times[1] + 7200;
  CHECK_THROWS_AS(stack.validate(), InputError);
}

TEST_CASE("track CSV round-trip at 6 decimals") {
  const auto dir = temp_dir();
  core::StormTrack track;
  for (int t = 0; t < 5; ++t) {
    core::TrackPoint p;
    p.time = 1125273600 + 3600 * t;
    p.lon = -95.123456 + 0.1 * t;
    p.lat = 27.654321 + 0.05 * t;
    p.rmax_km = 48.25;
    p.pdef_hpa = 41.5;
    p.dir_u = 0.1;
    p.dir_v = 0.05;
    p.dist_coast_km = 120.0 - t;
    track.points.push_back(p);
  }
  core::write_track(track, dir / "t.csv");
  const auto back = core::read_track(dir / "t.csv");
  REQUIRE(back.size() == track.size());
  for (int t = 0; t < track.size(); ++t) {
    CHECK(back[t].time == track[t].time);
    CHECK(back[t].lon == doctest::Approx(track[t].lon).epsilon(1e-6));
    CHECK(back[t].rmax_km == doctest::Approx(track[t].rmax_km).epsilon(1e-6));
  }
}

TEST_CASE("track validation rejects nonpositive rmax") {
  core::StormTrack track;
  for (int t = 0; t < 3; ++t) {
    core::TrackPoint p;
    p.time = 3600 * t;
    p.rmax_km = t == 2 ? 0.0 : 50.0;
    track.points.push_back(p);
  }
  CHECK_THROWS_AS(track.validate(), InputError);
}

TEST_CASE("track CSV rejects wrong header") {
  const auto dir = temp_dir();
  std::ofstream(dir / "bad.csv") << "time,lon,lat\n2005-08-29T00:00:00Z,-95,27\n";
  CHECK_THROWS_AS(core::read_track(dir / "bad.csv"), InputError);
}

TEST_CASE("ISO-8601 helpers round-trip") {
  const std::int64_t t = 1125273600;  // 2005-08-29T00:00:00Z
  CHECK(core::format_iso8601(t) == "2005-08-29T00:00:00Z");
  CHECK(core::parse_iso8601("2005-08-29T00:00:00Z") == t);
  CHECK(core::parse_iso8601(core::format_iso8601(t + 86400 * 400 + 3600)) ==
        t + 86400 * 400 + 3600);
}

TEST_CASE("grid spec validation") {
  core::GridSpec bad{1, 3, 0, 0, 0.5, 0.5};
  CHECK_THROWS_AS(bad.validate(), InputError);
  core::GridSpec bad2{3, 3, 0, 0, -0.5, 0.5};
  CHECK_THROWS_AS(bad2.validate(), InputError);
}
