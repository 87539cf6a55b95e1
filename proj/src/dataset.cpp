#include "attackability/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "attackability/errors.hpp"
#include "attackability/io.hpp"
#include "attackability/rng.hpp"

namespace attackability {

const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw ConfigError("unknown split '" + s + "'");
}

void LabeledDataset::validate(int num_classes) const {
  if (features.size() != size() * dim || sample_ids.size() != size())
    throw ShapeError("dataset arrays disagree: " + std::to_string(size()) +
                     " labels, " + std::to_string(sample_ids.size()) + " ids, " +
                     std::to_string(features.size()) + " feature values for dim " +
                     std::to_string(dim));
  for (double f : features)
    if (!(f >= 0.0 && f <= 1.0))
      throw DomainError("feature " + format_double(f) + " outside [0,1]");
  for (std::size_t i = 0; i < size(); ++i)
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw DomainError("label " + std::to_string(labels[i]) + " of sample " +
                        sample_ids[i] + " outside [0," + std::to_string(num_classes) + ")");
  std::set<std::string> seen(sample_ids.begin(), sample_ids.end());
  if (seen.size() != sample_ids.size())
    throw DomainError("duplicate sample ids in dataset");
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.dim = dim;
  out.split = split;
  out.features.reserve(indices.size() * dim);
  out.labels.reserve(indices.size());
  out.sample_ids.reserve(indices.size());
  for (std::size_t i : indices) {
    auto row = sample(i);
    out.features.insert(out.features.end(), row.begin(), row.end());
    out.labels.push_back(labels[i]);
    out.sample_ids.push_back(sample_ids[i]);
  }
  return out;
}

namespace {

// Box-Muller from two SplitMix64 uniforms; the second value is dropped so the
// draw count per sample stays fixed.
double next_gaussian(SplitMix64& rng) {
  double u1 = rng.next_double();
  double u2 = rng.next_double();
  while (u1 <= 1e-300) u1 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace

DatasetBundle make_synthetic(const SyntheticConfig& cfg) {
  if (cfg.classes < 2 || cfg.dim < 2)
    throw ConfigError("synthetic dataset needs >= 2 classes and >= 2 dims");
  if (cfg.per_class <= 0) throw ConfigError("per_class must be positive");
  if (!(cfg.spread >= 0)) throw ConfigError("spread must be nonnegative");
  if (!(cfg.test_fraction > 0 && cfg.test_fraction < 1))
    throw ConfigError("test_fraction must lie in (0,1)");

  const std::size_t n = static_cast<std::size_t>(cfg.classes) * cfg.per_class;
  const std::size_t d = static_cast<std::size_t>(cfg.dim);

  SplitMix64 rng(cfg.seed);
  std::vector<double> means(static_cast<std::size_t>(cfg.classes) * d);
  for (auto& m : means) m = rng.next_double();

  std::vector<double> raw(n * d);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    int c = static_cast<int>(i % cfg.classes);
    labels[i] = c;
    for (std::size_t j = 0; j < d; ++j)
      raw[i * d + j] = means[c * d + j] + cfg.spread * next_gaussian(rng);
  }

  // Single global affine squash into [0,1] keeps the blob geometry intact.
  auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  double lo = *lo_it, hi = *hi_it;
  double scale = hi > lo ? 1.0 / (hi - lo) : 1.0;
  for (auto& v : raw) v = (v - lo) * scale;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[rng.next_below(i)]);

  const auto n_test = static_cast<std::size_t>(std::llround(cfg.test_fraction * n));
  const std::size_t n_rest = n - n_test;
  const auto n_train = static_cast<std::size_t>(std::llround(0.8 * n_rest));

  auto build = [&](std::size_t begin, std::size_t end, Split split) {
    LabeledDataset out;
    out.dim = d;
    out.split = split;
    out.features.reserve((end - begin) * d);
    for (std::size_t k = begin; k < end; ++k) {
      std::size_t i = order[k];
      out.features.insert(out.features.end(), raw.begin() + i * d, raw.begin() + (i + 1) * d);
      out.labels.push_back(labels[i]);
      char id[16];
      std::snprintf(id, sizeof id, "s%06zu", i);
      out.sample_ids.emplace_back(id);
    }
    return out;
  };

  DatasetBundle bundle;
  bundle.test = build(0, n_test, Split::kTest);
  bundle.train = build(n_test, n_test + n_train, Split::kTrain);
  bundle.validation = build(n_test + n_train, n, Split::kValidation);
  return bundle;
}

LabeledDataset ingest_cifar10(const std::filesystem::path& path, Split split) {
  constexpr std::size_t kRecordBytes = 3073;  // 1 label + 3*1024 pixels
  constexpr std::size_t kPixels = 3072;

  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw FormatError("cannot open " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % kRecordBytes != 0)
    throw FormatError(path.string() + ": " + std::to_string(bytes) +
                      " bytes is not a whole number of 3073-byte records (offset " +
                      std::to_string(bytes - bytes % kRecordBytes) + ")");
  in.seekg(0);

  const std::size_t n = bytes / kRecordBytes;
  LabeledDataset out;
  out.dim = kPixels;
  out.split = split;
  out.features.resize(n * kPixels);
  out.labels.resize(n);
  out.sample_ids.reserve(n);

  std::vector<unsigned char> record(kRecordBytes);
  const std::string stem = path.filename().string();
  for (std::size_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(record.data()), kRecordBytes);
    if (!in) throw FormatError(path.string() + ": truncated read at record " + std::to_string(i));
    if (record[0] > 9)
      throw FormatError(path.string() + ": label byte " + std::to_string(record[0]) +
                        " at record " + std::to_string(i));
    out.labels[i] = record[0];
    for (std::size_t j = 0; j < kPixels; ++j)
      out.features[i * kPixels + j] = record[1 + j] / 255.0;
    out.sample_ids.push_back(stem + ":" + std::to_string(i));
  }
  return out;
}

void save_dataset_csv(const LabeledDataset& data, const std::filesystem::path& path,
                      const std::string& config_hash) {
  std::ostringstream out;
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
  out << "# split=" << to_string(data.split) << "\n";
  out << "sample_id,label";
  for (std::size_t j = 0; j < data.dim; ++j) out << ",f" << j;
  out << "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.sample_ids[i] << "," << data.labels[i];
    auto row = data.sample(i);
    for (double v : row) out << "," << format_double(v);
    out << "\n";
  }
  write_text_file(path, out.str());
}

LabeledDataset load_dataset_csv(const std::filesystem::path& path, Split split) {
  auto rows = read_csv(path);
  if (rows.empty()) throw FormatError(path.string() + ": empty dataset file");
  const auto& header = rows.front();
  if (header.size() < 3 || header[0] != "sample_id" || header[1] != "label")
    throw FormatError(path.string() + ": unexpected dataset header");
  LabeledDataset out;
  out.dim = header.size() - 2;
  out.split = split;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw FormatError(path.string() + ": row " + std::to_string(r) + " has " +
                        std::to_string(row.size()) + " fields, expected " +
                        std::to_string(header.size()));
    out.sample_ids.push_back(row[0]);
    out.labels.push_back(static_cast<int>(parse_double(row[1])));
    for (std::size_t j = 2; j < row.size(); ++j)
      out.features.push_back(parse_double(row[j]));
  }
  return out;
}

}  // namespace attackability
