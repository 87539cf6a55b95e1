#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "attackability/attacks.hpp"
#include "attackability/detection.hpp"

namespace attackability {

struct PRPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct PRCurve {
  std::vector<PRPoint> points;  // threshold ascending
  double best_f1 = 0.0;
  double best_threshold = 0.0;
};

/// Precision-recall sweep with positive prediction = score > threshold.
/// Thresholds are the distinct score values plus one below-minimum point, so
/// every reachable confusion matrix appears exactly once. Precision at the
/// empty-prediction point is 1 by convention; F1 is 0 whenever
/// precision + recall is 0. Throws UndefinedMetricError when truth has no
/// positives.
PRCurve pr_sweep(std::span<const double> scores, const std::vector<bool>& truth);
PRCurve pr_sweep(const ScoreVector& scores, const std::vector<bool>& truth);

/// F1 of predicting every sample positive: 2p / (n + p).
double prevalence_f1(const std::vector<bool>& truth);

/// Fractional ranks, ties averaged (1-based).
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation: Pearson correlation of average ranks.
/// Throws UndefinedMetricError if either vector is constant.
double spearman(std::span<const double> a, std::span<const double> b);

/// Fraction of samples whose prediction flips under the attack at its fixed
/// budget. Per-sample attacks use cfg.for_sample(id), so the result is
/// independent of iteration order and replayable sample by sample.
double fooling_rate(const VictimModel& model, const LabeledDataset& data,
                    const AttackConfig& cfg, unsigned threads = 0);

enum class RankingMethod { kRandom, kUncertainty, kDeep };

const char* to_string(RankingMethod r);
RankingMethod ranking_from_string(const std::string& s);

/// Prediction entropy -sum p log p of the model on each pool sample.
std::vector<double> prediction_entropy(const VictimModel& model, const LabeledDataset& pool);

struct ActiveAdvConfig {
  RankingMethod ranking = RankingMethod::kRandom;
  double budget_fraction = 1.0;
  AttackConfig attack;      // adversarial example generation + robustness eval
  TrainConfig finetune;     // fine-tuning on the adversarial examples
  std::uint64_t ranking_seed = 0;  // random ranking only
  unsigned threads = 0;
};

struct ActiveAdvResult {
  VictimModel model;
  double fooling_rate_before = 0.0;
  double fooling_rate_after = 0.0;
  std::vector<std::string> selected_ids;
};

/// Ranks the pool (random / target-model entropy / supplied deep
/// attackability scores), adversarially attacks the top budget fraction,
/// fine-tunes the target on those adversarial examples with their original
/// labels, and measures the fooling rate on `test` before and after.
/// deep_scores must align with the pool when ranking = kDeep; the selected
/// subset is canonicalized to pool order, so budget 1.0 coincides exactly
/// across ranking methods.
ActiveAdvResult active_adv_train(const VictimModel& target, const LabeledDataset& pool,
                                 const LabeledDataset& test,
                                 const std::vector<double>& deep_scores,
                                 const ActiveAdvConfig& cfg);

/// PR curve CSV: beta,precision,recall,f1.
void save_pr_curve_csv(const PRCurve& curve, const std::filesystem::path& path,
                       const std::string& config_hash = "");

}  // namespace attackability
