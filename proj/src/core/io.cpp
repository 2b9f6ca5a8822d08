#include "tcgen/core/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tcgen::core {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void byteswap_if_big_endian(std::vector<double>& data) {
  if constexpr (std::endian::native == std::endian::big) {
    for (double& d : data) {
      std::uint64_t u;
      std::memcpy(&u, &d, 8);
      u = __builtin_bswap64(u);
      std::memcpy(&d, &u, 8);
    }
  }
}

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

void write_f64_blob(const fs::path& path, const std::vector<double>& data) {
  std::vector<double> out = data;
  byteswap_if_big_endian(out);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size() * sizeof(double)));
  if (!f) throw InputError("write failed: " + path.string());
}

std::vector<double> read_f64_blob(const fs::path& path, std::size_t expected_count) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw InputError("cannot open " + path.string());
  const std::size_t bytes = static_cast<std::size_t>(f.tellg());
  if (bytes != expected_count * sizeof(double)) {
    throw FormatError(path.string() + ": expected " +
                      std::to_string(expected_count * sizeof(double)) +
                      " bytes, found " + std::to_string(bytes));
  }
  f.seekg(0);
  std::vector<double> data(expected_count);
  f.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
  if (!f) throw FormatError("read failed: " + path.string());
  byteswap_if_big_endian(data);
  return data;
}

std::int64_t parse_iso8601(const std::string& s) {
  std::tm tm{};
  int y, mo, d, h, mi, sec;
  if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%dZ", &y, &mo, &d, &h, &mi, &sec) != 6) {
    throw FormatError("bad ISO-8601 timestamp: " + s);
  }
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = sec;
  return static_cast<std::int64_t>(timegm(&tm));
}

std::string format_iso8601(std::int64_t epoch_seconds) {
  std::time_t t = static_cast<std::time_t>(epoch_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

FieldStack read_field_stack(const fs::path& manifest_path) {
  const json j = load_json(manifest_path);
  FieldStack s;
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw FormatError(manifest_path.string() + ": unsupported format_version");
    }
    s.grid.n_lon = j.at("n_lon").get<int>();
    s.grid.n_lat = j.at("n_lat").get<int>();
    s.grid.lon0 = j.at("lon0").get<double>();
    s.grid.lat0 = j.at("lat0").get<double>();
    s.grid.d_lon = j.at("d_lon").get<double>();
    s.grid.d_lat = j.at("d_lat").get<double>();
    s.units = j.at("units").get<std::string>();
    const int n_t = j.at("n_t").get<int>();
    for (const auto& t : j.at("times")) s.times.push_back(parse_iso8601(t.get<std::string>()));
    if (static_cast<int>(s.times.size()) != n_t) {
      throw FormatError(manifest_path.string() + ": times length != n_t");
    }
    s.grid.validate();
    const fs::path dir = manifest_path.parent_path();
    const std::size_t count =
        static_cast<std::size_t>(n_t) * static_cast<std::size_t>(s.grid.n_cells());
    s.values = read_f64_blob(dir / j.at("data").get<std::string>(), count);
    if (j.value("has_mask", false)) {
      const fs::path mpath = dir / j.at("mask").get<std::string>();
      std::ifstream mf(mpath, std::ios::binary | std::ios::ate);
      if (!mf) throw InputError("cannot open " + mpath.string());
      const std::size_t bytes = static_cast<std::size_t>(mf.tellg());
      if (bytes != static_cast<std::size_t>(s.grid.n_cells())) {
        throw FormatError(mpath.string() + ": expected " +
                          std::to_string(s.grid.n_cells()) + " bytes, found " +
                          std::to_string(bytes));
      }
      mf.seekg(0);
      s.mask.resize(bytes);
      mf.read(reinterpret_cast<char*>(s.mask.data()), static_cast<std::streamsize>(bytes));
    }
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  s.validate(s.units == "mm/hr");
  return s;
}

void write_field_stack(const FieldStack& stack, const fs::path& manifest_path) {
  stack.validate(stack.units == "mm/hr");
  fs::path stem = manifest_path;
  stem.replace_extension();
  const std::string name = stem.filename().string();
  const fs::path dir = manifest_path.parent_path();

  json j;
  j["format_version"] = 1;
  j["n_lon"] = stack.grid.n_lon;
  j["n_lat"] = stack.grid.n_lat;
  j["n_t"] = stack.n_t();
  j["lon0"] = stack.grid.lon0;
  j["lat0"] = stack.grid.lat0;
  j["d_lon"] = stack.grid.d_lon;
  j["d_lat"] = stack.grid.d_lat;
  j["units"] = stack.units;
  json times = json::array();
  for (std::int64_t t : stack.times) times.push_back(format_iso8601(t));
  j["times"] = std::move(times);
  j["data"] = name + ".f64";
  j["has_mask"] = !stack.mask.empty();
  if (!stack.mask.empty()) j["mask"] = name + ".mask.u8";

  write_f64_blob(dir / (name + ".f64"), stack.values);
  if (!stack.mask.empty()) {
    std::ofstream mf(dir / (name + ".mask.u8"), std::ios::binary | std::ios::trunc);
    mf.write(reinterpret_cast<const char*>(stack.mask.data()),
             static_cast<std::streamsize>(stack.mask.size()));
    if (!mf) throw InputError("write failed: " + (dir / (name + ".mask.u8")).string());
  }
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw InputError("cannot open " + manifest_path.string() + " for writing");
  out << j.dump(2) << "\n";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

StormTrack read_track(const fs::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw InputError("cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(csv_path.string() + ": empty file");
  if (line != "time,lon,lat,rmax_km,pdef_hpa,dir_u,dir_v,dist_coast_km") {
    throw FormatError(csv_path.string() + ": unexpected header: " + line);
  }
  StormTrack track;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 8) {
      throw FormatError(csv_path.string() + ": row " + std::to_string(row) +
                        " has " + std::to_string(cells.size()) + " columns, expected 8");
    }
    TrackPoint p;
    try {
      p.time = parse_iso8601(cells[0]);
      p.lon = std::stod(cells[1]);
      p.lat = std::stod(cells[2]);
      p.rmax_km = std::stod(cells[3]);
      p.pdef_hpa = std::stod(cells[4]);
      p.dir_u = std::stod(cells[5]);
      p.dir_v = std::stod(cells[6]);
      p.dist_coast_km = std::stod(cells[7]);
    } catch (const std::exception&) {
      throw FormatError(csv_path.string() + ": unparsable row " + std::to_string(row));
    }
    track.points.push_back(p);
    ++row;
  }
  try {
    track.validate();
  } catch (const std::exception& e) {
    throw FormatError(csv_path.string() + ": " + e.what());
  }
  return track;
}

void write_track(const StormTrack& track, const fs::path& csv_path) {
  track.validate();
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw InputError("cannot open " + csv_path.string() + " for writing");
  out << "time,lon,lat,rmax_km,pdef_hpa,dir_u,dir_v,dist_coast_km\n";
  char buf[256];
  for (const TrackPoint& p : track.points) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  format_iso8601(p.time).c_str(), p.lon, p.lat, p.rmax_km,
                  p.pdef_hpa, p.dir_u, p.dir_v, p.dist_coast_km);
    out << buf;
  }
}

std::vector<LonLat> read_reference_centers(const fs::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw InputError("cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(csv_path.string() + ": empty file");
  const auto header = split_csv_line(line);
  int lon_col = -1, lat_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "lon") lon_col = static_cast<int>(i);
    if (header[i] == "lat") lat_col = static_cast<int>(i);
  }
  if (lon_col < 0 || lat_col < 0) {
    throw FormatError(csv_path.string() + ": header must contain lon and lat columns");
  }
  std::vector<LonLat> centers;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) <= std::max(lon_col, lat_col)) {
      throw FormatError(csv_path.string() + ": short row " + std::to_string(centers.size()));
    }
    centers.push_back({std::stod(cells[lon_col]), std::stod(cells[lat_col])});
  }
  if (centers.empty()) throw FormatError(csv_path.string() + ": no data rows");
  return centers;
}

GridSpec read_grid_spec(const fs::path& path) {
  const json j = load_json(path);
  GridSpec g;
  try {
    g.n_lon = j.at("n_lon").get<int>();
    g.n_lat = j.at("n_lat").get<int>();
    g.lon0 = j.at("lon0").get<double>();
    g.lat0 = j.at("lat0").get<double>();
    g.d_lon = j.at("d_lon").get<double>();
    g.d_lat = j.at("d_lat").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  g.validate();
  return g;
}

void write_grid_spec(const GridSpec& grid, const fs::path& path) {
  grid.validate();
  json j;
  j["n_lon"] = grid.n_lon;
  j["n_lat"] = grid.n_lat;
  j["lon0"] = grid.lon0;
  j["lat0"] = grid.lat0;
  j["d_lon"] = grid.d_lon;
  j["d_lat"] = grid.d_lat;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
}

}  // namespace tcgen::core
