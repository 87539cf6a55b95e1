#include "attackability/labeling.hpp"

#include <algorithm>
#include <sstream>

#include "attackability/errors.hpp"
#include "attackability/io.hpp"

namespace attackability {

void ThresholdPair::validate() const {
  if (!(eps_attackable > 0) || !(eps_robust > 0))
    throw ConfigError("thresholds must be positive");
  if (!(eps_attackable < eps_robust))
    throw ConfigError("eps_attackable (" + format_double(eps_attackable) +
                      ") must be below eps_robust (" + format_double(eps_robust) + ")");
}

const char* to_string(Polarity p) {
  return p == Polarity::kAttackable ? "attackable" : "robust";
}

Polarity polarity_from_string(const std::string& s) {
  if (s == "attackable") return Polarity::kAttackable;
  if (s == "robust") return Polarity::kRobust;
  throw ConfigError("unknown polarity '" + s + "'");
}

std::size_t AttackabilityLabels::model_index(const std::string& model_id) const {
  auto it = std::find(model_ids.begin(), model_ids.end(), model_id);
  if (it == model_ids.end())
    throw DomainError("model '" + model_id + "' not present in labels");
  return static_cast<std::size_t>(it - model_ids.begin());
}

std::vector<bool> AttackabilityLabels::universal(std::span<const std::string> model_subset,
                                                 Polarity p) const {
  std::vector<std::size_t> cols;
  for (const auto& id : model_subset) cols.push_back(model_index(id));
  std::vector<bool> out(sample_ids.size(), true);
  for (std::size_t i = 0; i < sample_ids.size(); ++i)
    for (std::size_t k : cols)
      if (!flag(i, k, p)) {
        out[i] = false;
        break;
      }
  return out;
}

AttackabilityLabels label_samples(const PerturbationTable& table, AttackMethod method,
                                  std::span<const std::string> sample_ids,
                                  std::span<const std::string> model_ids,
                                  const ThresholdPair& thresholds) {
  thresholds.validate();
  AttackabilityLabels labels;
  labels.sample_ids.assign(sample_ids.begin(), sample_ids.end());
  labels.model_ids.assign(model_ids.begin(), model_ids.end());
  labels.attackable.resize(sample_ids.size() * model_ids.size());
  labels.robust.resize(sample_ids.size() * model_ids.size());

  // One column() call per model so a missing pair reports all gaps at once.
  for (std::size_t k = 0; k < model_ids.size(); ++k) {
    auto eps = table.column(sample_ids, model_ids[k], method);
    for (std::size_t i = 0; i < sample_ids.size(); ++i) {
      const std::size_t idx = i * model_ids.size() + k;
      labels.attackable[idx] = eps[i] < thresholds.eps_attackable;
      labels.robust[idx] = eps[i] > thresholds.eps_robust;  // sentinel inf => robust
    }
  }
  return labels;
}

std::vector<std::pair<double, double>> fraction_attackable_curve(
    const PerturbationTable& table, AttackMethod method,
    std::span<const std::string> sample_ids, std::span<const std::string> model_ids,
    const std::string& model_id, std::span<const double> eps_grid) {
  if (sample_ids.empty()) throw DomainError("empty sample set");
  for (std::size_t i = 1; i < eps_grid.size(); ++i)
    if (!(eps_grid[i] > eps_grid[i - 1]))
      throw ConfigError("epsilon grid must be strictly increasing");

  // Per-sample effective minimum: one model's value, or the max over models
  // for the universal curve (attackable under every model iff the largest
  // per-model minimum is below the threshold).
  std::vector<double> effective(sample_ids.size());
  if (model_id == "uni") {
    std::fill(effective.begin(), effective.end(), 0.0);
    for (const auto& mid : model_ids) {
      auto eps = table.column(sample_ids, mid, method);
      for (std::size_t i = 0; i < effective.size(); ++i)
        effective[i] = std::max(effective[i], eps[i]);
    }
  } else {
    effective = table.column(sample_ids, model_id, method);
  }

  std::vector<std::pair<double, double>> curve;
  curve.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    std::size_t count = 0;
    for (double e : effective)
      if (e < eps) ++count;
    curve.emplace_back(eps, static_cast<double>(count) / static_cast<double>(effective.size()));
  }
  return curve;
}

const char* to_string(EvalSetting s) {
  switch (s) {
    case EvalSetting::kAll: return "all";
    case EvalSetting::kUni: return "uni";
    case EvalSetting::kSpec: return "spec";
    case EvalSetting::kVspec: return "vspec";
  }
  return "?";
}

EvalSetting setting_from_string(const std::string& s) {
  if (s == "all") return EvalSetting::kAll;
  if (s == "uni") return EvalSetting::kUni;
  if (s == "spec") return EvalSetting::kSpec;
  if (s == "vspec") return EvalSetting::kVspec;
  throw ConfigError("unknown evaluation setting '" + s + "'");
}

std::map<EvalSetting, std::vector<bool>> evaluation_sets(
    const AttackabilityLabels& labels, std::span<const std::string> seen_models,
    const std::string& target_model, Polarity polarity) {
  for (const auto& m : seen_models)
    if (m == target_model)
      throw ConfigError("target model '" + target_model + "' is in the seen set");

  const std::size_t t = labels.model_index(target_model);
  std::vector<std::size_t> seen_cols;
  for (const auto& m : seen_models) seen_cols.push_back(labels.model_index(m));

  const std::size_t n = labels.sample_ids.size();
  std::map<EvalSetting, std::vector<bool>> sets;
  for (auto s : kAllSettings) sets[s].assign(n, false);

  for (std::size_t i = 0; i < n; ++i) {
    const bool target = labels.flag(i, t, polarity);
    bool uni_seen = true;
    bool any_seen = false;
    for (std::size_t k : seen_cols) {
      const bool f = labels.flag(i, k, polarity);
      uni_seen = uni_seen && f;
      any_seen = any_seen || f;
    }
    sets[EvalSetting::kAll][i] = target;
    sets[EvalSetting::kUni][i] = target && uni_seen;
    sets[EvalSetting::kSpec][i] = target && !uni_seen;
    sets[EvalSetting::kVspec][i] = target && !any_seen;
  }
  return sets;
}

void save_labels_csv(const AttackabilityLabels& labels, const std::filesystem::path& path,
                     const std::string& config_hash) {
  std::ostringstream out;
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
  out << "sample_id,model_id,attackable,robust\n";
  for (std::size_t i = 0; i < labels.sample_ids.size(); ++i)
    for (std::size_t k = 0; k < labels.model_ids.size(); ++k)
      out << labels.sample_ids[i] << "," << labels.model_ids[k] << ","
          << (labels.is_attackable(i, k) ? 1 : 0) << ","
          << (labels.is_robust(i, k) ? 1 : 0) << "\n";
  write_text_file(path, out.str());
}

AttackabilityLabels load_labels_csv(const std::filesystem::path& path,
                                    std::string* config_hash_out) {
  auto rows = read_csv(path, config_hash_out);
  if (rows.size() < 2) throw FormatError(path.string() + ": empty labels file");

  AttackabilityLabels labels;
  std::map<std::string, std::size_t> sample_index, model_index;
  // First pass fixes the id orders (file order).
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 4)
      throw FormatError(path.string() + ": row " + std::to_string(r) + " needs 4 fields");
    if (sample_index.emplace(row[0], labels.sample_ids.size()).second)
      labels.sample_ids.push_back(row[0]);
    if (model_index.emplace(row[1], labels.model_ids.size()).second)
      labels.model_ids.push_back(row[1]);
  }
  labels.attackable.assign(labels.sample_ids.size() * labels.model_ids.size(), false);
  labels.robust.assign(labels.sample_ids.size() * labels.model_ids.size(), false);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t idx =
        sample_index[row[0]] * labels.model_ids.size() + model_index[row[1]];
    labels.attackable[idx] = row[2] == "1";
    labels.robust[idx] = row[3] == "1";
  }
  return labels;
}

}  // namespace attackability
