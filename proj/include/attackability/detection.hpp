#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "attackability/labeling.hpp"
#include "attackability/nn.hpp"

namespace attackability {

/// Single-hidden-layer attackability/robustness detector operating on a
/// victim encoder's output h: score = sigmoid(W1 * sigmoid(W0 * h)).
/// Hidden width equals the embedding width; there are no bias terms.
struct DetectorModel {
  std::vector<double> w0;  // hidden x embed, row-major
  std::vector<double> w1;  // 1 x hidden
  int embed_dim = 0;
  int hidden_dim = 0;
  std::string owning_model_id;
  Polarity polarity = Polarity::kAttackable;

  void validate() const;
};

/// Row-major matrix of encoder outputs, one row per dataset sample.
struct EmbeddingMatrix {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<std::string> sample_ids;

  std::size_t size() const { return sample_ids.size(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

/// Encoder outputs for every sample, in dataset order.
EmbeddingMatrix embed_dataset(const VictimModel& model, const LabeledDataset& data);

/// Detector score in (0,1) for one embedding.
double detector_score(const DetectorModel& det, std::span<const double> embedding);

/// Scores for every row of an embedding matrix.
std::vector<double> detector_scores(const DetectorModel& det, const EmbeddingMatrix& embeddings);

/// Trains a detector with binary cross-entropy on frozen embeddings using
/// the shared SGD-momentum stack. Deterministic given (init_seed,
/// cfg.shuffle_seed). Targets with a single class are rejected.
DetectorModel train_detector_on_embeddings(const EmbeddingMatrix& embeddings,
                                           const std::vector<bool>& targets,
                                           const TrainConfig& cfg, Polarity polarity,
                                           std::uint64_t init_seed,
                                           const std::string& owning_model_id);

/// Convenience wrapper: embeds `data` through the victim's encoder first.
/// The victim is read-only throughout.
DetectorModel train_detector(const VictimModel& victim, const LabeledDataset& data,
                             const std::vector<bool>& targets, const TrainConfig& cfg,
                             Polarity polarity, std::uint64_t init_seed);

/// Scores keyed by sample id, aligned by construction with one dataset.
struct ScoreVector {
  std::vector<std::string> sample_ids;
  std::vector<double> scores;

  void validate() const;
};

/// Mean over member scores raised to alpha (alpha >= 1), per sample.
/// Members must agree exactly on sample ids and order.
ScoreVector ensemble_score(std::span<const ScoreVector> members, double alpha);

/// Confidence baseline for one sample: 1 - max(probs) for the attackable
/// polarity, max(probs) for the robust polarity.
double confidence_score(const VictimModel& model, std::span<const double> x, Polarity polarity);

/// Confidence baseline over a dataset (conf-s when model is the target;
/// averaging these vectors over the seen set gives conf-u).
ScoreVector confidence_scores(const VictimModel& model, const LabeledDataset& data,
                              Polarity polarity);

/// Detector persistence: flat little-endian float64 (W0 row-major then W1)
/// plus a JSON manifest carrying dims, polarity and owning model id.
void save_detector(const DetectorModel& det, const std::filesystem::path& manifest_path,
                   const std::string& config_hash = "");
DetectorModel load_detector(const std::filesystem::path& manifest_path);

void save_scores_csv(const ScoreVector& scores, const std::filesystem::path& path,
                     const std::string& config_hash = "");
ScoreVector load_scores_csv(const std::filesystem::path& path,
                            std::string* config_hash_out = nullptr);

}  // namespace attackability
