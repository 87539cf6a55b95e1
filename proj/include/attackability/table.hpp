#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "attackability/attacks.hpp"

namespace attackability {

/// One minimum-perturbation measurement.
/// min_epsilon is the estimated smallest successful budget (kNotAttackable
/// when no grid point succeeded); delta_inf_norm is the realized norm of the
/// attack delta at that budget (at the largest grid budget for failures).
struct PerturbationRecord {
  std::string sample_id;
  std::string model_id;
  AttackMethod method = AttackMethod::kFgsm;
  double delta_inf_norm = 0.0;
  double min_epsilon = 0.0;
};

/// Per (sample, model, attack-method) minimum perturbation magnitudes.
class PerturbationTable {
 public:
  void add(PerturbationRecord rec);

  const PerturbationRecord* find(const std::string& sample_id, const std::string& model_id,
                                 AttackMethod method) const;

  /// Throws IncompleteTableError naming the missing pair.
  double min_epsilon(const std::string& sample_id, const std::string& model_id,
                     AttackMethod method) const;

  /// min_epsilon for each sample id, one model. Throws IncompleteTableError
  /// listing every missing pair.
  std::vector<double> column(std::span<const std::string> sample_ids,
                             const std::string& model_id, AttackMethod method) const;

  const std::vector<PerturbationRecord>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  /// CSV: sample_id,model_id,attack_method,delta_inf_norm,success_epsilon_or_inf
  void save_csv(const std::filesystem::path& path, const std::string& config_hash = "") const;
  static PerturbationTable load_csv(const std::filesystem::path& path,
                                    std::string* config_hash_out = nullptr);

 private:
  using Key = std::tuple<std::string, std::string, AttackMethod>;
  std::vector<PerturbationRecord> rows_;
  std::map<Key, std::size_t> index_;
};

}  // namespace attackability
