#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "attackability/table.hpp"

namespace attackability {

/// Strict attackable / generous robust thresholds. Defaults are the matched
/// FGSM values; PGD re-tunes to (0.03, 0.10).
struct ThresholdPair {
  double eps_attackable = 0.05;
  double eps_robust = 0.39;

  void validate() const;
};

enum class Polarity { kAttackable, kRobust };

const char* to_string(Polarity p);
Polarity polarity_from_string(const std::string& s);

/// Per (sample, model) attackable/robust flags for one attack method.
/// Both comparisons are strict, so eps_attackable < eps_robust guarantees a
/// sample is never both; sentinel (infinite) perturbations count as robust.
struct AttackabilityLabels {
  std::vector<std::string> sample_ids;
  std::vector<std::string> model_ids;
  // flag(sample i, model k) at index i * model_ids.size() + k
  std::vector<bool> attackable;
  std::vector<bool> robust;

  bool is_attackable(std::size_t sample, std::size_t model) const {
    return attackable[sample * model_ids.size() + model];
  }
  bool is_robust(std::size_t sample, std::size_t model) const {
    return robust[sample * model_ids.size() + model];
  }
  bool flag(std::size_t sample, std::size_t model, Polarity p) const {
    return p == Polarity::kAttackable ? is_attackable(sample, model)
                                      : is_robust(sample, model);
  }
  std::size_t model_index(const std::string& model_id) const;

  /// Conjunction of per-model flags over a model subset (Eq. of universality).
  std::vector<bool> universal(std::span<const std::string> model_subset, Polarity p) const;
};

AttackabilityLabels label_samples(const PerturbationTable& table, AttackMethod method,
                                  std::span<const std::string> sample_ids,
                                  std::span<const std::string> model_ids,
                                  const ThresholdPair& thresholds);

/// Fraction of samples with min perturbation strictly below each grid value,
/// for one model or (model_id == "uni") attackable under every listed model.
std::vector<std::pair<double, double>> fraction_attackable_curve(
    const PerturbationTable& table, AttackMethod method,
    std::span<const std::string> sample_ids, std::span<const std::string> model_ids,
    const std::string& model_id, std::span<const double> eps_grid);

enum class EvalSetting { kAll, kUni, kSpec, kVspec };

const char* to_string(EvalSetting s);
EvalSetting setting_from_string(const std::string& s);
inline constexpr EvalSetting kAllSettings[] = {EvalSetting::kAll, EvalSetting::kUni,
                                               EvalSetting::kSpec, EvalSetting::kVspec};

/// Ground-truth vectors for the four evaluation regimes on an unseen target:
///   all   target flagged
///   uni   target flagged and universally flagged over the seen set
///   spec  target flagged but not universally flagged over the seen set
///   vspec target flagged and flagged for no seen model
/// The same definitions apply to the robust polarity with R in place of A.
std::map<EvalSetting, std::vector<bool>> evaluation_sets(
    const AttackabilityLabels& labels, std::span<const std::string> seen_models,
    const std::string& target_model, Polarity polarity);

/// Labels CSV: sample_id,model_id,attackable,robust.
void save_labels_csv(const AttackabilityLabels& labels, const std::filesystem::path& path,
                     const std::string& config_hash = "");
AttackabilityLabels load_labels_csv(const std::filesystem::path& path,
                                    std::string* config_hash_out = nullptr);

}  // namespace attackability
