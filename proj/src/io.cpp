#include "attackability/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "attackability/errors.hpp"
#include "attackability/rng.hpp"

namespace attackability {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw FormatError("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               std::string* config_hash_out) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  if (config_hash_out) config_hash_out->clear();
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      constexpr std::string_view kHashKey = "# config_hash=";
      if (config_hash_out && line.rfind(kHashKey, 0) == 0)
        *config_hash_out = line.substr(kHashKey.size());
      continue;
    }
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << content;
  if (!out) throw FormatError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

void put_le64(std::uint64_t bits, unsigned char out[8]) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(bits >> (8 * i));
}

std::uint64_t get_le64(const unsigned char in[8]) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return bits;
}

}  // namespace

void write_f64_le(const std::filesystem::path& path, const std::vector<double>& values) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  std::vector<unsigned char> buf(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i)
    put_le64(std::bit_cast<std::uint64_t>(values[i]), buf.data() + i * 8);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

std::vector<double> read_f64_le(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw FormatError("cannot open " + path.string());
  auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % 8 != 0)
    throw FormatError(path.string() + ": size " + std::to_string(bytes) +
                      " is not a multiple of 8");
  in.seekg(0);
  std::vector<unsigned char> buf(bytes);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw FormatError("read failed for " + path.string());
  std::vector<double> values(bytes / 8);
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = std::bit_cast<double>(get_le64(buf.data() + i * 8));
  return values;
}

std::string hash_file(const std::filesystem::path& path) {
  return hash_string(read_text_file(path));
}

std::string hash_string(const std::string& s) {
  return to_hex(fnv1a64(s.data(), s.size()));
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[v & 0xf];
    v >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf, 16);
}

}  // namespace attackability
