#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tcgen/core/types.hpp"

namespace tcgen::core {

/// Raw little-endian IEEE-754 float64 blob I/O.
void write_f64_blob(const std::filesystem::path& path, const std::vector<double>& data);
std::vector<double> read_f64_blob(const std::filesystem::path& path, std::size_t expected_count);

/// Field stack: `<name>.json` manifest next to a `<name>.f64` blob
/// (and an optional `<name>.mask.u8` byte mask).
FieldStack read_field_stack(const std::filesystem::path& manifest_path);
void write_field_stack(const FieldStack& stack, const std::filesystem::path& manifest_path);

/// Track CSV with header
/// `time,lon,lat,rmax_km,pdef_hpa,dir_u,dir_v,dist_coast_km`.
StormTrack read_track(const std::filesystem::path& csv_path);
void write_track(const StormTrack& track, const std::filesystem::path& csv_path);

/// Reference-center CSV: any CSV whose header contains time, lon and lat
/// columns (a full track CSV qualifies).
std::vector<LonLat> read_reference_centers(const std::filesystem::path& csv_path);

/// ISO-8601 UTC timestamp helpers (format 2005-08-29T06:00:00Z).
std::int64_t parse_iso8601(const std::string& s);
std::string format_iso8601(std::int64_t epoch_seconds);

/// GridSpec as a standalone JSON file.
GridSpec read_grid_spec(const std::filesystem::path& path);
void write_grid_spec(const GridSpec& grid, const std::filesystem::path& path);

}  // namespace tcgen::core
