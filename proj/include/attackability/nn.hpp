#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "attackability/dataset.hpp"

namespace attackability {

enum class Activation { kRelu, kSigmoid };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Architecture + init seed of a dense feed-forward classifier.
///
/// layer_widths runs input dim first, class count last; hidden_activations
/// has one entry per hidden layer (layer_widths.size() - 2 of them; the final
/// layer emits raw logits). Identical spec + seed gives bit-identical initial
/// parameters: init draws uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer
/// (weights then biases) from SplitMix64 keyed by `seed`.
struct DenseNetSpec {
  std::vector<int> layer_widths;
  std::vector<Activation> hidden_activations;
  std::uint64_t seed = 0;

  int num_layers() const { return static_cast<int>(layer_widths.size()) - 1; }
  int input_dim() const { return layer_widths.front(); }
  int num_classes() const { return layer_widths.back(); }
  std::size_t param_count() const;
  void validate() const;
};

/// A classifier split into an encoder (layers [0, encoder_depth)) and a
/// classification head (the rest). Parameters are stored flat, in layer
/// order, row-major weight matrix then bias per layer.
struct VictimModel {
  DenseNetSpec spec;
  std::vector<double> params;
  int encoder_depth = 0;
  std::string id;

  int encoding_dim() const { return spec.layer_widths[encoder_depth]; }
  void validate() const;
};

/// Builds a model with freshly initialized parameters.
/// encoder_depth < 0 selects the last hidden activation (num_layers - 1).
VictimModel init_model(const DenseNetSpec& spec, int encoder_depth = -1,
                       const std::string& id = "");

struct ForwardResult {
  std::vector<double> logits;
  std::vector<double> probs;     // softmax(logits), sums to 1 within 1e-9
  std::vector<double> encoding;  // activation at encoder_depth
};

ForwardResult forward(const VictimModel& model, std::span<const double> x);

/// Argmax class of the softmax output (first index on ties).
int predict(const VictimModel& model, std::span<const double> x);

/// Cross-entropy loss -log softmax(logits)[y], via the log-sum-exp trick.
double loss(const VictimModel& model, std::span<const double> x, int y);

/// Gradient of the cross-entropy loss at (x, y) with respect to the input.
std::vector<double> input_gradient(const VictimModel& model, std::span<const double> x, int y);

/// Mean cross-entropy gradient over a batch with respect to the flat
/// parameter vector, plus the weight-decay term lambda * theta.
/// mean_loss_out, when given, receives the mean data loss (decay excluded).
std::vector<double> param_gradient(const VictimModel& model, const LabeledDataset& data,
                                   std::span<const std::size_t> batch_indices,
                                   double weight_decay, double* mean_loss_out = nullptr);

/// SGD with classical momentum: v <- mu*v + g; theta <- theta - lr*v.
class SgdMomentum {
 public:
  SgdMomentum(std::size_t n, double learning_rate, double momentum);
  void set_learning_rate(double lr) { lr_ = lr; }
  double learning_rate() const { return lr_; }
  void step(std::span<double> params, std::span<const double> grad);

 private:
  std::vector<double> velocity_;
  double lr_;
  double momentum_;
};

/// SGD-momentum training schedule. Defaults mirror the detector recipe
/// (batch 64, 200 epochs, lr 1e-3 dropped by 10x at epochs 100 and 150,
/// momentum 0.9, weight decay 1e-4); desk configs scale these down.
struct TrainConfig {
  int batch_size = 64;
  int epochs = 200;
  double learning_rate = 1e-3;
  std::vector<int> lr_drop_epochs = {100, 150};
  double lr_drop_factor = 10.0;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
  /// Per-epoch learning rate: base divided by factor once per listed epoch
  /// index reached (epochs are 0-based).
  double rate_at_epoch(int epoch) const;
};

struct TrainResult {
  VictimModel model;
  std::vector<double> epoch_losses;
};

/// Trains a freshly initialized model. Bit-reproducible given
/// (spec.seed, cfg.shuffle_seed). Throws TrainingDivergedError naming the
/// epoch if the loss becomes non-finite.
TrainResult train(const DenseNetSpec& spec, const LabeledDataset& data,
                  const TrainConfig& cfg, int encoder_depth = -1,
                  const std::string& id = "");

/// Continues training from existing parameters (adversarial fine-tuning).
TrainResult train_from(const VictimModel& start, const LabeledDataset& data,
                       const TrainConfig& cfg);

double accuracy(const VictimModel& model, const LabeledDataset& data);

/// Model persistence: JSON manifest (widths, activations, encoder_depth,
/// seed, id, params file) plus flat little-endian float64 parameters.
void save_model(const VictimModel& model, const std::filesystem::path& manifest_path,
                const std::string& config_hash = "");
VictimModel load_model(const std::filesystem::path& manifest_path);

}  // namespace attackability
