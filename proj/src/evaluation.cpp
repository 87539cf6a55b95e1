#include "attackability/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "attackability/errors.hpp"
#include "attackability/io.hpp"
#include "attackability/parallel.hpp"
#include "attackability/rng.hpp"

namespace attackability {

PRCurve pr_sweep(std::span<const double> scores, const std::vector<bool>& truth) {
  if (scores.size() != truth.size()) throw ShapeError("scores/truth size mismatch");
  if (scores.empty()) throw DomainError("empty score vector");
  const auto total_pos = static_cast<long>(std::count(truth.begin(), truth.end(), true));
  if (total_pos == 0) throw UndefinedMetricError("recall undefined: truth has no positives");

  // Sort samples by score ascending; a threshold at value v predicts positive
  // exactly the strict suffix of scores above v.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Suffix counts of positives/negatives strictly above each distinct value.
  std::vector<double> thresholds;
  thresholds.push_back(scores[order.front()] - 1.0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double v = scores[order[i]];
    if (thresholds.size() == 1 || thresholds.back() != v) thresholds.push_back(v);
  }

  PRCurve curve;
  curve.best_f1 = -1.0;
  long tp = total_pos;
  long fp = static_cast<long>(scores.size()) - total_pos;
  std::size_t consumed = 0;  // samples with score <= current threshold
  for (double beta : thresholds) {
    while (consumed < order.size() && scores[order[consumed]] <= beta) {
      if (truth[order[consumed]]) --tp; else --fp;
      ++consumed;
    }
    PRPoint pt;
    pt.threshold = beta;
    const long predicted = tp + fp;
    pt.precision = predicted == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(predicted);
    pt.recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    pt.f1 = pt.precision + pt.recall == 0.0
                ? 0.0
                : 2.0 * pt.precision * pt.recall / (pt.precision + pt.recall);
    if (pt.f1 > curve.best_f1) {
      curve.best_f1 = pt.f1;
      curve.best_threshold = pt.threshold;
    }
    curve.points.push_back(pt);
  }
  return curve;
}

PRCurve pr_sweep(const ScoreVector& scores, const std::vector<bool>& truth) {
  scores.validate();
  return pr_sweep(std::span<const double>(scores.scores), truth);
}

double prevalence_f1(const std::vector<bool>& truth) {
  const auto p = static_cast<double>(std::count(truth.begin(), truth.end(), true));
  const auto n = static_cast<double>(truth.size());
  if (p == 0) throw UndefinedMetricError("no positives");
  return 2.0 * p / (n + p);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Tied block [i, j] gets the mean of ranks i+1 .. j+1.
    const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("rank vectors differ in length");
  if (a.size() < 2) throw DomainError("need at least 2 observations");
  auto ra = average_ranks(a);
  auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mean_b = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double cov = 0, var_a = 0, var_b = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean_a;
    const double db = rb[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0 || var_b == 0)
    throw UndefinedMetricError("correlation undefined for a constant vector");
  return cov / std::sqrt(var_a * var_b);
}

double fooling_rate(const VictimModel& model, const LabeledDataset& data,
                    const AttackConfig& cfg, unsigned threads) {
  if (data.size() == 0) throw DomainError("empty dataset");
  cfg.validate();
  std::vector<unsigned char> fooled(data.size(), 0);
  parallel_for(data.size(), threads, [&](std::size_t i) {
    fooled[i] = run_attack(model, data.sample(i), cfg.for_sample(data.sample_ids[i])).success;
  });
  const auto hits = std::accumulate(fooled.begin(), fooled.end(), std::size_t{0});
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

const char* to_string(RankingMethod r) {
  switch (r) {
    case RankingMethod::kRandom: return "random";
    case RankingMethod::kUncertainty: return "uncertainty";
    case RankingMethod::kDeep: return "deep";
  }
  return "?";
}

RankingMethod ranking_from_string(const std::string& s) {
  if (s == "random") return RankingMethod::kRandom;
  if (s == "uncertainty") return RankingMethod::kUncertainty;
  if (s == "deep") return RankingMethod::kDeep;
  throw ConfigError("unknown ranking method '" + s + "'");
}

std::vector<double> prediction_entropy(const VictimModel& model, const LabeledDataset& pool) {
  std::vector<double> out(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto probs = forward(model, pool.sample(i)).probs;
    double h = 0;
    for (double p : probs)
      if (p > 0) h -= p * std::log(p);
    out[i] = h;
  }
  return out;
}

ActiveAdvResult active_adv_train(const VictimModel& target, const LabeledDataset& pool,
                                 const LabeledDataset& test,
                                 const std::vector<double>& deep_scores,
                                 const ActiveAdvConfig& cfg) {
  if (pool.size() == 0) throw DomainError("empty pool");
  if (!(cfg.budget_fraction > 0 && cfg.budget_fraction <= 1))
    throw ConfigError("budget_fraction must lie in (0,1]");
  const auto n_select = static_cast<std::size_t>(
      std::llround(cfg.budget_fraction * static_cast<double>(pool.size())));
  if (n_select == 0) throw DomainError("budget selects zero samples");

  // Ranking score per pool sample, higher = selected first.
  std::vector<double> score(pool.size());
  switch (cfg.ranking) {
    case RankingMethod::kRandom: {
      SplitMix64 rng(cfg.ranking_seed);
      for (auto& s : score) s = rng.next_double();
      break;
    }
    case RankingMethod::kUncertainty:
      score = prediction_entropy(target, pool);
      break;
    case RankingMethod::kDeep:
      if (deep_scores.size() != pool.size())
        throw ShapeError("deep scores not aligned with pool");
      score = deep_scores;
      break;
  }

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  order.resize(n_select);
  // Canonical pool order, so identical selections train identically.
  std::sort(order.begin(), order.end());

  ActiveAdvResult result;
  for (std::size_t i : order) result.selected_ids.push_back(pool.sample_ids[i]);

  // Adversarial examples for the selected samples, keeping original labels.
  LabeledDataset adv;
  adv.dim = pool.dim;
  adv.split = pool.split;
  adv.features.resize(n_select * pool.dim);
  adv.labels.reserve(n_select);
  adv.sample_ids.reserve(n_select);
  std::vector<std::size_t> slots(order.begin(), order.end());
  parallel_for(n_select, cfg.threads, [&](std::size_t k) {
    const std::size_t i = slots[k];
    auto x = pool.sample(i);
    auto out = run_attack(target, x, cfg.attack.for_sample(pool.sample_ids[i]));
    for (std::size_t j = 0; j < pool.dim; ++j)
      adv.features[k * pool.dim + j] = x[j] + out.delta[j];
  });
  for (std::size_t i : order) {
    adv.labels.push_back(pool.labels[i]);
    adv.sample_ids.push_back(pool.sample_ids[i] + ":adv");
  }

  result.fooling_rate_before = fooling_rate(target, test, cfg.attack, cfg.threads);
  result.model = train_from(target, adv, cfg.finetune).model;
  result.fooling_rate_after = fooling_rate(result.model, test, cfg.attack, cfg.threads);
  return result;
}

void save_pr_curve_csv(const PRCurve& curve, const std::filesystem::path& path,
                       const std::string& config_hash) {
  std::ostringstream out;
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
  out << "beta,precision,recall,f1\n";
  for (const auto& pt : curve.points)
    out << format_double(pt.threshold) << "," << format_double(pt.precision) << ","
        << format_double(pt.recall) << "," << format_double(pt.f1) << "\n";
  write_text_file(path, out.str());
}

}  // namespace attackability
