#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace attackability {

enum class Split { kTrain, kValidation, kTest };

const char* to_string(Split s);
Split split_from_string(const std::string& s);

/// Feature vectors in [0,1]^dim with class labels and stable sample ids.
struct LabeledDataset {
  std::size_t dim = 0;
  std::vector<double> features;  // row-major, size() * dim
  std::vector<int> labels;
  std::vector<std::string> sample_ids;
  Split split = Split::kTrain;

  std::size_t size() const { return labels.size(); }
  std::span<const double> sample(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }

  /// Checks features in [0,1], labels < num_classes, ids unique and aligned.
  void validate(int num_classes) const;

  /// Subset by row indices, keeping ids and the split tag.
  LabeledDataset subset(std::span<const std::size_t> indices) const;
};

struct DatasetBundle {
  LabeledDataset train;
  LabeledDataset validation;
  LabeledDataset test;
};

struct SyntheticConfig {
  int classes = 10;
  int dim = 32;
  int per_class = 600;
  double spread = 0.5;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;  // held out first; remainder split 80/20 train/val
};

/// Gaussian blobs with class-dependent means, affinely squashed into [0,1]^d.
/// Deterministic per seed. Emits a held-out test split plus an 80-20
/// train/validation split of the remainder.
DatasetBundle make_synthetic(const SyntheticConfig& cfg);

/// Reads one CIFAR-10 binary batch file: records of 3073 bytes, first byte
/// the label (0-9), then 3072 pixel bytes (R,G,B planes, row-major 32x32).
/// Pixels are scaled to [0,1] by /255; ids are "<file name>:<record index>".
LabeledDataset ingest_cifar10(const std::filesystem::path& path,
                              Split split = Split::kTrain);

/// Dataset persistence: CSV with header "sample_id,label,f0,...,f{d-1}".
/// A leading "# config_hash=<hex>" comment is written when hash is nonempty.
void save_dataset_csv(const LabeledDataset& data, const std::filesystem::path& path,
                      const std::string& config_hash = "");
LabeledDataset load_dataset_csv(const std::filesystem::path& path, Split split);

}  // namespace attackability
