#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attackability/attacks.hpp"
#include "attackability/dataset.hpp"
#include "attackability/detection.hpp"
#include "attackability/evaluation.hpp"
#include "attackability/labeling.hpp"
#include "attackability/nn.hpp"

#include "json.hpp"

namespace attackability {

struct VictimSpecConfig {
  std::string id;
  DenseNetSpec spec;
  int encoder_depth = -1;
};

/// One attack method's sweep + labeling thresholds.
struct AttackSuiteConfig {
  AttackConfig base;        // epsilon = largest grid point; step ratio preserved
  MinPerturbConfig sweep;
  ThresholdPair thresholds;
};

struct CifarConfig {
  std::vector<std::filesystem::path> train_files;
  std::filesystem::path test_file;
  std::uint64_t shuffle_seed = 0;  // 80-20 train/validation split order
};

/// Fully resolved experiment description. Parsed from a JSON config file;
/// every seed is explicit and nothing reads the clock.
struct ExperimentConfig {
  unsigned threads = 0;

  std::string dataset_type;  // "synthetic" | "cifar10"
  SyntheticConfig synthetic;
  CifarConfig cifar;

  std::vector<VictimSpecConfig> seen;
  VictimSpecConfig target;
  TrainConfig victim_train;

  std::vector<AttackMethod> eval_methods;
  std::map<AttackMethod, AttackSuiteConfig> suites;

  AttackMethod detector_train_method = AttackMethod::kFgsm;
  TrainConfig detector_train;
  std::uint64_t detector_init_seed = 0;
  std::optional<double> alpha;  // absent: |M| + 1

  std::vector<EvalSetting> eval_settings;
  std::vector<Polarity> eval_polarities;

  bool active_adv_enabled = false;
  std::vector<double> active_budgets;
  std::vector<RankingMethod> active_rankings;
  AttackConfig active_attack;
  TrainConfig active_finetune;
  std::uint64_t active_ranking_seed = 0;

  std::filesystem::path output_dir;

  int num_classes() const;
  int input_dim() const;
  double resolved_alpha() const;
  std::vector<std::string> seen_ids() const;
  std::vector<std::string> all_model_ids() const;  // seen + target
  void validate() const;
};

/// Parses and validates a config JSON document / file.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Applies a "dot.path=json-literal" override to a raw config document.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Stage names in execution order.
inline constexpr const char* kStageData = "data";
inline constexpr const char* kStageTrainVictims = "train-victims";
inline constexpr const char* kStagePerturb = "perturb";
inline constexpr const char* kStageLabel = "label";
inline constexpr const char* kStageTrainDetectors = "train-detectors";
inline constexpr const char* kStageScore = "score";
inline constexpr const char* kStageEvaluate = "evaluate";
inline constexpr const char* kStageActiveAdv = "active-adv";

/// Orchestrates the experiment stages over an owned output directory.
///
/// Every stage is cached: its input hash covers the relevant config subtree
/// and all upstream stages (hashes and output file contents), each produced
/// artifact is stamped with that hash, and a stage re-runs whenever the
/// recorded hash or any output's content hash no longer matches. Given one
/// config, two clean-directory runs produce byte-identical artifacts.
class Pipeline {
 public:
  Pipeline(ExperimentConfig cfg, nlohmann::json raw_config,
           std::filesystem::path output_dir);

  /// Runs the named stage, first ensuring all stages it depends on.
  /// Returns true if the stage (re-)ran, false if it was cached.
  bool ensure(const std::string& stage);

  /// All stages through evaluate, plus active-adv when enabled.
  void run_all();

  /// Human summary of report.json (+ active-adv results) for the CLI.
  std::string report_summary();

  const ExperimentConfig& config() const { return cfg_; }
  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path report_path() const;

 private:
  struct StageInfo;
  const StageInfo& stage_info(const std::string& stage) const;
  std::string stage_input_hash(const StageInfo& info);
  bool stage_is_current(const StageInfo& info, const std::string& input_hash) const;
  void record_provenance(const StageInfo& info, const std::string& input_hash);

  void run_data(const std::string& hash);
  void run_train_victims(const std::string& hash);
  void run_perturb(const std::string& hash);
  void run_label(const std::string& hash);
  void run_train_detectors(const std::string& hash);
  void run_score(const std::string& hash);
  void run_evaluate(const std::string& hash);
  void run_active_adv(const std::string& hash);

  LabeledDataset load_split(Split split) const;
  VictimModel load_victim(const std::string& id) const;
  /// Loads an artifact's stamp and rejects mixing with the expected hash.
  std::string checked_hash(const std::filesystem::path& artifact,
                           const std::string& expected_stage) const;

  ExperimentConfig cfg_;
  nlohmann::json raw_;
  std::filesystem::path dir_;
  std::map<std::string, std::string> stage_hashes_;  // stage -> current input hash
};

}  // namespace attackability
