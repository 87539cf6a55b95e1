#include "attackability/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "attackability/errors.hpp"
#include "attackability/io.hpp"
#include "attackability/rng.hpp"

#include "json.hpp"

namespace attackability {

void DetectorModel::validate() const {
  if (embed_dim < 1 || hidden_dim < 1) throw ConfigError("detector dims must be positive");
  if (w0.size() != static_cast<std::size_t>(hidden_dim) * embed_dim ||
      w1.size() != static_cast<std::size_t>(hidden_dim))
    throw ShapeError("detector weights disagree with dims " + std::to_string(hidden_dim) +
                     "x" + std::to_string(embed_dim));
}

EmbeddingMatrix embed_dataset(const VictimModel& model, const LabeledDataset& data) {
  EmbeddingMatrix out;
  out.dim = static_cast<std::size_t>(model.encoding_dim());
  out.sample_ids = data.sample_ids;
  out.values.resize(data.size() * out.dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto enc = forward(model, data.sample(i)).encoding;
    std::copy(enc.begin(), enc.end(), out.values.begin() + i * out.dim);
  }
  return out;
}

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Forward pass keeping the hidden activation for backprop.
double detector_forward(const DetectorModel& det, std::span<const double> h,
                        std::vector<double>* hidden_out) {
  std::vector<double> hidden(det.hidden_dim);
  for (int i = 0; i < det.hidden_dim; ++i) {
    const double* row = det.w0.data() + static_cast<std::size_t>(i) * det.embed_dim;
    double acc = 0;
    for (int j = 0; j < det.embed_dim; ++j) acc += row[j] * h[j];
    hidden[i] = sigmoid(acc);
  }
  double out = 0;
  for (int i = 0; i < det.hidden_dim; ++i) out += det.w1[i] * hidden[i];
  if (hidden_out) *hidden_out = std::move(hidden);
  return sigmoid(out);
}

}  // namespace

double detector_score(const DetectorModel& det, std::span<const double> embedding) {
  det.validate();
  if (static_cast<int>(embedding.size()) != det.embed_dim)
    throw ShapeError("detector expects embedding of width " + std::to_string(det.embed_dim) +
                     ", got " + std::to_string(embedding.size()));
  return detector_forward(det, embedding, nullptr);
}

std::vector<double> detector_scores(const DetectorModel& det, const EmbeddingMatrix& embeddings) {
  std::vector<double> out(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i)
    out[i] = detector_score(det, embeddings.row(i));
  return out;
}

DetectorModel train_detector_on_embeddings(const EmbeddingMatrix& embeddings,
                                           const std::vector<bool>& targets,
                                           const TrainConfig& cfg, Polarity polarity,
                                           std::uint64_t init_seed,
                                           const std::string& owning_model_id) {
  cfg.validate();
  if (targets.size() != embeddings.size())
    throw ShapeError("targets/embeddings size mismatch");
  if (embeddings.size() == 0) throw DomainError("no training embeddings");
  const auto positives = static_cast<std::size_t>(
      std::count(targets.begin(), targets.end(), true));
  if (positives == 0 || positives == targets.size())
    throw DegenerateLabelsError("binary targets contain a single class (" +
                                std::to_string(positives) + " of " +
                                std::to_string(targets.size()) + " positive)");

  DetectorModel det;
  det.embed_dim = static_cast<int>(embeddings.dim);
  det.hidden_dim = det.embed_dim;  // hidden width = encoder output size
  det.owning_model_id = owning_model_id;
  det.polarity = polarity;
  det.w0.resize(static_cast<std::size_t>(det.hidden_dim) * det.embed_dim);
  det.w1.resize(det.hidden_dim);
  SplitMix64 rng(init_seed);
  const double bound0 = 1.0 / std::sqrt(static_cast<double>(det.embed_dim));
  for (auto& w : det.w0) w = rng.next_uniform(-bound0, bound0);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(det.hidden_dim));
  for (auto& w : det.w1) w = rng.next_uniform(-bound1, bound1);

  const std::size_t n0 = det.w0.size();
  const std::size_t n_params = n0 + det.w1.size();
  SgdMomentum opt(n_params, cfg.learning_rate, cfg.momentum);
  std::vector<double> flat(n_params), grad(n_params);

  std::vector<std::size_t> order(embeddings.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    opt.set_learning_rate(cfg.rate_at_epoch(epoch));
    SplitMix64 shuffle(derive_seed(cfg.shuffle_seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle.next_below(i)]);

    double epoch_loss = 0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0;
      for (std::size_t b = begin; b < end; ++b) {
        const std::size_t idx = order[b];
        auto h = embeddings.row(idx);
        std::vector<double> hidden;
        const double p = detector_forward(det, h, &hidden);
        const double t = targets[idx] ? 1.0 : 0.0;
        batch_loss += -(t * std::log(std::max(p, 1e-300)) +
                        (1.0 - t) * std::log(std::max(1.0 - p, 1e-300)));
        // BCE + sigmoid: d(loss)/d(out pre-activation) = p - t.
        const double dout = p - t;
        for (int i = 0; i < det.hidden_dim; ++i) {
          grad[n0 + i] += dout * hidden[i];
          const double dh = dout * det.w1[i] * hidden[i] * (1.0 - hidden[i]);
          double* gr = grad.data() + static_cast<std::size_t>(i) * det.embed_dim;
          for (int j = 0; j < det.embed_dim; ++j) gr[j] += dh * h[j];
        }
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      std::copy(det.w0.begin(), det.w0.end(), flat.begin());
      std::copy(det.w1.begin(), det.w1.end(), flat.begin() + n0);
      for (std::size_t i = 0; i < n_params; ++i)
        grad[i] = grad[i] * inv + cfg.weight_decay * flat[i];
      opt.step(flat, grad);
      std::copy(flat.begin(), flat.begin() + n0, det.w0.begin());
      std::copy(flat.begin() + n0, flat.end(), det.w1.begin());
      epoch_loss += batch_loss * inv;
      ++batches;
    }
    if (!std::isfinite(epoch_loss / static_cast<double>(batches)))
      throw TrainingDivergedError("detector training diverged at epoch " +
                                  std::to_string(epoch));
  }
  return det;
}

DetectorModel train_detector(const VictimModel& victim, const LabeledDataset& data,
                             const std::vector<bool>& targets, const TrainConfig& cfg,
                             Polarity polarity, std::uint64_t init_seed) {
  return train_detector_on_embeddings(embed_dataset(victim, data), targets, cfg,
                                      polarity, init_seed, victim.id);
}

void ScoreVector::validate() const {
  if (sample_ids.size() != scores.size())
    throw ShapeError("score vector ids/values mismatch");
  for (double s : scores)
    if (!std::isfinite(s)) throw DomainError("non-finite score");
}

ScoreVector ensemble_score(std::span<const ScoreVector> members, double alpha) {
  if (members.empty()) throw DomainError("no ensemble members");
  if (!(alpha >= 1.0)) throw ConfigError("alpha must be >= 1");
  const auto& first = members.front();
  first.validate();
  for (const auto& m : members) {
    m.validate();
    if (m.sample_ids != first.sample_ids)
      throw AlignmentError("ensemble members disagree on sample ids");
  }
  ScoreVector out;
  out.sample_ids = first.sample_ids;
  out.scores.resize(first.scores.size());
  const double inv = 1.0 / static_cast<double>(members.size());
  for (std::size_t i = 0; i < out.scores.size(); ++i) {
    double mean = 0;
    for (const auto& m : members) mean += m.scores[i];
    out.scores[i] = std::pow(mean * inv, alpha);
  }
  return out;
}

double confidence_score(const VictimModel& model, std::span<const double> x,
                        Polarity polarity) {
  auto probs = forward(model, x).probs;
  const double top = *std::max_element(probs.begin(), probs.end());
  return polarity == Polarity::kAttackable ? 1.0 - top : top;
}

ScoreVector confidence_scores(const VictimModel& model, const LabeledDataset& data,
                              Polarity polarity) {
  ScoreVector out;
  out.sample_ids = data.sample_ids;
  out.scores.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    out.scores[i] = confidence_score(model, data.sample(i), polarity);
  return out;
}

void save_detector(const DetectorModel& det, const std::filesystem::path& manifest_path,
                   const std::string& config_hash) {
  det.validate();
  nlohmann::json manifest;
  manifest["embed_dim"] = det.embed_dim;
  manifest["hidden_dim"] = det.hidden_dim;
  manifest["owning_model_id"] = det.owning_model_id;
  manifest["polarity"] = to_string(det.polarity);
  auto params_path = manifest_path;
  params_path.replace_extension(".bin");
  manifest["params_file"] = params_path.filename().string();
  if (!config_hash.empty()) manifest["config_hash"] = config_hash;
  write_text_file(manifest_path, manifest.dump(2) + "\n");
  std::vector<double> flat(det.w0);
  flat.insert(flat.end(), det.w1.begin(), det.w1.end());
  write_f64_le(params_path, flat);
}

DetectorModel load_detector(const std::filesystem::path& manifest_path) {
  nlohmann::json manifest = nlohmann::json::parse(read_text_file(manifest_path));
  DetectorModel det;
  det.embed_dim = manifest.at("embed_dim").get<int>();
  det.hidden_dim = manifest.at("hidden_dim").get<int>();
  det.owning_model_id = manifest.at("owning_model_id").get<std::string>();
  det.polarity = polarity_from_string(manifest.at("polarity").get<std::string>());
  auto params_path = manifest_path.parent_path() / manifest.at("params_file").get<std::string>();
  auto flat = read_f64_le(params_path);
  const std::size_t n0 = static_cast<std::size_t>(det.hidden_dim) * det.embed_dim;
  if (flat.size() != n0 + det.hidden_dim)
    throw FormatError(params_path.string() + ": expected " +
                      std::to_string(n0 + det.hidden_dim) + " values, got " +
                      std::to_string(flat.size()));
  det.w0.assign(flat.begin(), flat.begin() + n0);
  det.w1.assign(flat.begin() + n0, flat.end());
  det.validate();
  return det;
}

void save_scores_csv(const ScoreVector& scores, const std::filesystem::path& path,
                     const std::string& config_hash) {
  scores.validate();
  std::ostringstream out;
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
  out << "sample_id,score\n";
  for (std::size_t i = 0; i < scores.sample_ids.size(); ++i)
    out << scores.sample_ids[i] << "," << format_double(scores.scores[i]) << "\n";
  write_text_file(path, out.str());
}

ScoreVector load_scores_csv(const std::filesystem::path& path, std::string* config_hash_out) {
  auto rows = read_csv(path, config_hash_out);
  if (rows.empty()) throw FormatError(path.string() + ": empty scores file");
  ScoreVector out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2)
      throw FormatError(path.string() + ": row " + std::to_string(r) + " needs 2 fields");
    out.sample_ids.push_back(rows[r][0]);
    out.scores.push_back(parse_double(rows[r][1]));
  }
  return out;
}

}  // namespace attackability
