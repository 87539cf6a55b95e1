#include "attackability/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "attackability/errors.hpp"
#include "attackability/io.hpp"
#include "attackability/rng.hpp"

#include "json.hpp"

namespace attackability {

const char* to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "sigmoid";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "sigmoid") return Activation::kSigmoid;
  throw ConfigError("unknown activation '" + s + "'");
}

std::size_t DenseNetSpec::param_count() const {
  std::size_t n = 0;
  for (int l = 0; l + 1 < static_cast<int>(layer_widths.size()); ++l)
    n += static_cast<std::size_t>(layer_widths[l + 1]) * layer_widths[l] + layer_widths[l + 1];
  return n;
}

void DenseNetSpec::validate() const {
  if (layer_widths.size() < 2)
    throw ConfigError("layer_widths needs at least input and output entries");
  for (int w : layer_widths)
    if (w < 1) throw ConfigError("layer width " + std::to_string(w) + " must be >= 1");
  if (hidden_activations.size() != layer_widths.size() - 2)
    throw ConfigError("expected " + std::to_string(layer_widths.size() - 2) +
                      " hidden activations, got " + std::to_string(hidden_activations.size()));
}

void VictimModel::validate() const {
  spec.validate();
  if (params.size() != spec.param_count())
    throw ShapeError("parameter vector has " + std::to_string(params.size()) +
                     " entries, spec wants " + std::to_string(spec.param_count()));
  if (encoder_depth < 0 || encoder_depth >= spec.num_layers())
    throw ConfigError("encoder_depth " + std::to_string(encoder_depth) +
                      " outside [0," + std::to_string(spec.num_layers()) + ")");
}

VictimModel init_model(const DenseNetSpec& spec, int encoder_depth, const std::string& id) {
  spec.validate();
  VictimModel m;
  m.spec = spec;
  m.id = id;
  m.encoder_depth = encoder_depth < 0 ? spec.num_layers() - 1 : encoder_depth;
  m.params.resize(spec.param_count());
  SplitMix64 rng(spec.seed);
  std::size_t off = 0;
  for (int l = 0; l < spec.num_layers(); ++l) {
    const int fan_in = spec.layer_widths[l];
    const int fan_out = spec.layer_widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    const std::size_t count = static_cast<std::size_t>(fan_out) * fan_in + fan_out;
    for (std::size_t i = 0; i < count; ++i)
      m.params[off + i] = rng.next_uniform(-bound, bound);
    off += count;
  }
  m.validate();
  return m;
}

namespace {

// All intermediate activations of one forward pass. acts[l] has width
// layer_widths[l]; acts[0] is the input, the final entry holds raw logits.
struct Trace {
  std::vector<std::vector<double>> acts;
};

void check_input(const VictimModel& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.spec.input_dim())
    throw ShapeError("layer 0 expects input of width " +
                     std::to_string(m.spec.input_dim()) + ", got " +
                     std::to_string(x.size()));
}

Trace run_forward(const VictimModel& m, std::span<const double> x) {
  check_input(m, x);
  const auto& widths = m.spec.layer_widths;
  Trace t;
  t.acts.resize(widths.size());
  t.acts[0].assign(x.begin(), x.end());
  std::size_t off = 0;
  for (int l = 0; l < m.spec.num_layers(); ++l) {
    const int in = widths[l], out = widths[l + 1];
    const double* w = m.params.data() + off;
    const double* b = w + static_cast<std::size_t>(out) * in;
    const auto& a = t.acts[l];
    auto& z = t.acts[l + 1];
    z.resize(out);
    for (int i = 0; i < out; ++i) {
      double acc = b[i];
      const double* wi = w + static_cast<std::size_t>(i) * in;
      for (int j = 0; j < in; ++j) acc += wi[j] * a[j];
      z[i] = acc;
    }
    if (l < m.spec.num_layers() - 1) {
      if (m.spec.hidden_activations[l] == Activation::kRelu) {
        for (auto& v : z) v = v > 0 ? v : 0.0;
      } else {
        for (auto& v : z) v = 1.0 / (1.0 + std::exp(-v));
      }
    }
    off += static_cast<std::size_t>(out) * in + out;
  }
  return t;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  std::vector<double> p(logits.size());
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

double log_sum_exp(const std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0;
  for (double v : z) sum += std::exp(v - m);
  return m + std::log(sum);
}

void check_class(const VictimModel& m, int y) {
  if (y < 0 || y >= m.spec.num_classes())
    throw DomainError("class index " + std::to_string(y) + " outside [0," +
                      std::to_string(m.spec.num_classes()) + ")");
}

// Backpropagates dL/dlogits through the trace. Accumulates parameter
// gradients into param_grad when given; returns dL/dinput when wanted.
std::vector<double> backward(const VictimModel& m, const Trace& t,
                             std::vector<double> dz, double* param_grad,
                             bool want_input_grad) {
  const auto& widths = m.spec.layer_widths;
  std::vector<std::size_t> offsets(m.spec.num_layers());
  std::size_t off = 0;
  for (int l = 0; l < m.spec.num_layers(); ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>(widths[l + 1]) * widths[l] + widths[l + 1];
  }

  for (int l = m.spec.num_layers() - 1; l >= 0; --l) {
    const int in = widths[l], out = widths[l + 1];
    const double* w = m.params.data() + offsets[l];
    const auto& a = t.acts[l];
    if (param_grad) {
      double* gw = param_grad + offsets[l];
      double* gb = gw + static_cast<std::size_t>(out) * in;
      for (int i = 0; i < out; ++i) {
        double* gwi = gw + static_cast<std::size_t>(i) * in;
        for (int j = 0; j < in; ++j) gwi[j] += dz[i] * a[j];
        gb[i] += dz[i];
      }
    }
    if (l == 0 && !want_input_grad) return {};
    std::vector<double> da(in, 0.0);
    for (int i = 0; i < out; ++i) {
      const double* wi = w + static_cast<std::size_t>(i) * in;
      const double g = dz[i];
      for (int j = 0; j < in; ++j) da[j] += wi[j] * g;
    }
    if (l == 0) return da;
    // da -> dz through the hidden activation of layer l-1.
    if (m.spec.hidden_activations[l - 1] == Activation::kRelu) {
      for (int j = 0; j < in; ++j) da[j] = a[j] > 0 ? da[j] : 0.0;
    } else {
      for (int j = 0; j < in; ++j) da[j] *= a[j] * (1.0 - a[j]);
    }
    dz = std::move(da);
  }
  return {};
}

}  // namespace

ForwardResult forward(const VictimModel& model, std::span<const double> x) {
  Trace t = run_forward(model, x);
  ForwardResult r;
  r.logits = t.acts.back();
  r.probs = softmax(r.logits);
  r.encoding = t.acts[model.encoder_depth];
  return r;
}

int predict(const VictimModel& model, std::span<const double> x) {
  Trace t = run_forward(model, x);
  const auto& z = t.acts.back();
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double loss(const VictimModel& model, std::span<const double> x, int y) {
  check_class(model, y);
  Trace t = run_forward(model, x);
  return log_sum_exp(t.acts.back()) - t.acts.back()[y];
}

std::vector<double> input_gradient(const VictimModel& model, std::span<const double> x, int y) {
  check_class(model, y);
  Trace t = run_forward(model, x);
  std::vector<double> dz = softmax(t.acts.back());
  dz[y] -= 1.0;
  return backward(model, t, std::move(dz), nullptr, true);
}

std::vector<double> param_gradient(const VictimModel& model, const LabeledDataset& data,
                                   std::span<const std::size_t> batch_indices,
                                   double weight_decay, double* mean_loss_out) {
  if (batch_indices.empty()) throw DomainError("empty batch");
  std::vector<double> grad(model.params.size(), 0.0);
  double loss_sum = 0;
  for (std::size_t idx : batch_indices) {
    const int y = data.labels[idx];
    check_class(model, y);
    Trace t = run_forward(model, data.sample(idx));
    loss_sum += log_sum_exp(t.acts.back()) - t.acts.back()[y];
    std::vector<double> dz = softmax(t.acts.back());
    dz[y] -= 1.0;
    backward(model, t, std::move(dz), grad.data(), false);
  }
  const double inv = 1.0 / static_cast<double>(batch_indices.size());
  for (std::size_t i = 0; i < grad.size(); ++i)
    grad[i] = grad[i] * inv + weight_decay * model.params[i];
  if (mean_loss_out) *mean_loss_out = loss_sum * inv;
  return grad;
}

SgdMomentum::SgdMomentum(std::size_t n, double learning_rate, double momentum)
    : velocity_(n, 0.0), lr_(learning_rate), momentum_(momentum) {}

void SgdMomentum::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != velocity_.size() || grad.size() != velocity_.size())
    throw ShapeError("optimizer state sized for " + std::to_string(velocity_.size()) +
                     " parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity_[i] = momentum_ * velocity_[i] + grad[i];
    params[i] -= lr_ * velocity_[i];
  }
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (!(lr_drop_factor > 0)) throw ConfigError("lr_drop_factor must be positive");
  if (!(momentum >= 0 && momentum < 1)) throw ConfigError("momentum must lie in [0,1)");
  if (!(weight_decay >= 0)) throw ConfigError("weight_decay must be nonnegative");
  for (std::size_t i = 0; i < lr_drop_epochs.size(); ++i) {
    if (lr_drop_epochs[i] >= epochs)
      throw ConfigError("lr drop epoch " + std::to_string(lr_drop_epochs[i]) +
                        " not below epochs " + std::to_string(epochs));
    if (i > 0 && lr_drop_epochs[i] <= lr_drop_epochs[i - 1])
      throw ConfigError("lr_drop_epochs must be strictly increasing");
  }
}

double TrainConfig::rate_at_epoch(int epoch) const {
  double lr = learning_rate;
  for (int drop : lr_drop_epochs)
    if (epoch >= drop) lr /= lr_drop_factor;
  return lr;
}

TrainResult train(const DenseNetSpec& spec, const LabeledDataset& data,
                  const TrainConfig& cfg, int encoder_depth, const std::string& id) {
  return train_from(init_model(spec, encoder_depth, id), data, cfg);
}

TrainResult train_from(const VictimModel& start, const LabeledDataset& data,
                       const TrainConfig& cfg) {
  cfg.validate();
  start.validate();
  if (data.size() == 0) throw DomainError("training data is empty");
  data.validate(start.spec.num_classes());

  TrainResult result;
  result.model = start;
  auto& model = result.model;

  SgdMomentum opt(model.params.size(), cfg.learning_rate, cfg.momentum);
  std::vector<std::size_t> order(data.size());
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
      double batch_loss = 0;
      auto grad = param_gradient(model, data,
                                 std::span(order).subspan(begin, end - begin),
                                 cfg.weight_decay, &batch_loss);
      opt.step(model.params, grad);
      epoch_loss += batch_loss;
      ++batches;
    }
    epoch_loss /= static_cast<double>(batches);
    if (!std::isfinite(epoch_loss))
      throw TrainingDivergedError("training diverged at epoch " + std::to_string(epoch));
    result.epoch_losses.push_back(epoch_loss);
  }
  return result;
}

double accuracy(const VictimModel& model, const LabeledDataset& data) {
  if (data.size() == 0) throw DomainError("empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (predict(model, data.sample(i)) == data.labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

void save_model(const VictimModel& model, const std::filesystem::path& manifest_path,
                const std::string& config_hash) {
  model.validate();
  nlohmann::json manifest;
  manifest["layer_widths"] = model.spec.layer_widths;
  std::vector<std::string> acts;
  for (auto a : model.spec.hidden_activations) acts.emplace_back(to_string(a));
  manifest["activations"] = acts;
  manifest["seed"] = model.spec.seed;
  manifest["encoder_depth"] = model.encoder_depth;
  manifest["id"] = model.id;
  auto params_path = manifest_path;
  params_path.replace_extension(".bin");
  manifest["params_file"] = params_path.filename().string();
  if (!config_hash.empty()) manifest["config_hash"] = config_hash;
  write_text_file(manifest_path, manifest.dump(2) + "\n");
  write_f64_le(params_path, model.params);
}

VictimModel load_model(const std::filesystem::path& manifest_path) {
  nlohmann::json manifest = nlohmann::json::parse(read_text_file(manifest_path));
  VictimModel m;
  m.spec.layer_widths = manifest.at("layer_widths").get<std::vector<int>>();
  for (const auto& a : manifest.at("activations"))
    m.spec.hidden_activations.push_back(activation_from_string(a.get<std::string>()));
  m.spec.seed = manifest.at("seed").get<std::uint64_t>();
  m.encoder_depth = manifest.at("encoder_depth").get<int>();
  m.id = manifest.value("id", "");
  auto params_path = manifest_path.parent_path() / manifest.at("params_file").get<std::string>();
  m.params = read_f64_le(params_path);
  m.validate();
  return m;
}

}  // namespace attackability
