#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace attackability {

/// Shortest round-trip decimal form of a double ("0.05", "1e-09", "inf").
std::string format_double(double v);

/// Parses a double; accepts "inf"/"+inf"/"-inf". Throws FormatError otherwise.
double parse_double(const std::string& s);

/// Splits one CSV line on commas. Fields never contain commas or quotes in
/// any format this project writes.
std::vector<std::string> split_csv_line(const std::string& line);

/// Reads a CSV file: skips blank lines and "#" comment lines, returns rows of
/// fields. If config_hash_out is non-null it receives the value of a leading
/// "# config_hash=<hex>" comment (empty if absent).
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               std::string* config_hash_out = nullptr);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

/// Little-endian IEEE float64 blobs (model parameters, embedding caches).
void write_f64_le(const std::filesystem::path& path, const std::vector<double>& values);
std::vector<double> read_f64_le(const std::filesystem::path& path);

/// FNV-1a 64 content hash of a file, as 16 hex digits. Throws if unreadable.
std::string hash_file(const std::filesystem::path& path);
std::string hash_string(const std::string& s);
std::string to_hex(std::uint64_t v);

}  // namespace attackability
