#include "attackability/attacks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "attackability/errors.hpp"
#include "attackability/rng.hpp"

namespace attackability {

const char* to_string(AttackMethod m) {
  switch (m) {
    case AttackMethod::kFgsm: return "fgsm";
    case AttackMethod::kBim: return "bim";
    case AttackMethod::kPgd: return "pgd";
  }
  return "?";
}

AttackMethod attack_method_from_string(const std::string& s) {
  if (s == "fgsm") return AttackMethod::kFgsm;
  if (s == "bim") return AttackMethod::kBim;
  if (s == "pgd") return AttackMethod::kPgd;
  throw ConfigError("unknown attack method '" + s + "'");
}

void AttackConfig::validate() const {
  if (!(epsilon >= 0)) throw ConfigError("epsilon must be nonnegative");
  if (!(clamp_lo < clamp_hi)) throw ConfigError("clamp range is empty");
  if (method != AttackMethod::kFgsm) {
    if (iterations < 1) throw ConfigError("iterative attacks need iterations >= 1");
    if (!(step_alpha >= 0) || step_alpha > epsilon + 1e-15)
      throw ConfigError("step_alpha must lie in [0, epsilon]");
  }
}

AttackConfig AttackConfig::with_epsilon(double eps) const {
  AttackConfig out = *this;
  out.epsilon = eps;
  out.step_alpha = epsilon > 0 ? step_alpha / epsilon * eps : 0.0;
  return out;
}

AttackConfig AttackConfig::for_sample(const std::string& sample_id) const {
  AttackConfig out = *this;
  out.init_seed = derive_seed(init_seed, fnv1a64(sample_id.data(), sample_id.size()));
  return out;
}

namespace {

std::atomic<std::uint64_t> g_audit_checks{0};
std::atomic<std::uint64_t> g_audit_violations{0};

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// Budget + box feasibility audit, run on every outcome before it escapes.
void audit(const AttackOutcome& out, std::span<const double> x, const AttackConfig& cfg) {
  g_audit_checks.fetch_add(1, std::memory_order_relaxed);
  constexpr double kTol = 1e-12;
  bool ok = out.delta_inf_norm <= cfg.epsilon + kTol;
  for (std::size_t i = 0; ok && i < out.delta.size(); ++i) {
    const double v = x[i] + out.delta[i];
    ok = std::abs(out.delta[i]) <= cfg.epsilon + kTol &&
         v >= cfg.clamp_lo - kTol && v <= cfg.clamp_hi + kTol;
  }
  if (!ok) {
    g_audit_violations.fetch_add(1, std::memory_order_relaxed);
    throw std::logic_error("attack outcome violates budget or box constraints");
  }
}

double inf_norm(const std::vector<double>& v) {
  double m = 0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

AttackOutcome iterative_attack(const VictimModel& model, std::span<const double> x,
                               const AttackConfig& cfg, bool random_start) {
  cfg.validate();
  const std::size_t d = x.size();
  AttackOutcome out;
  const int clean_pred = predict(model, x);
  out.queries = 1;

  std::vector<double> adv(x.begin(), x.end());
  if (random_start) {
    SplitMix64 rng(cfg.init_seed);
    for (std::size_t i = 0; i < d; ++i) {
      adv[i] = x[i] + rng.next_uniform(-cfg.epsilon, cfg.epsilon);
      adv[i] = std::clamp(adv[i], cfg.clamp_lo, cfg.clamp_hi);
    }
  }
  for (int it = 0; it < cfg.iterations; ++it) {
    auto grad = input_gradient(model, adv, clean_pred);
    ++out.queries;
    for (std::size_t i = 0; i < d; ++i) {
      adv[i] += cfg.step_alpha * sign(grad[i]);
      adv[i] = std::clamp(adv[i], x[i] - cfg.epsilon, x[i] + cfg.epsilon);
      adv[i] = std::clamp(adv[i], cfg.clamp_lo, cfg.clamp_hi);
    }
  }

  out.delta.resize(d);
  for (std::size_t i = 0; i < d; ++i) out.delta[i] = adv[i] - x[i];
  out.delta_inf_norm = inf_norm(out.delta);
  out.success = predict(model, adv) != clean_pred;
  ++out.queries;
  audit(out, x, cfg);
  return out;
}

}  // namespace

namespace attack_audit {
std::uint64_t checks() { return g_audit_checks.load(); }
std::uint64_t violations() { return g_audit_violations.load(); }
void reset() {
  g_audit_checks.store(0);
  g_audit_violations.store(0);
}
}  // namespace attack_audit

AttackOutcome fgsm(const VictimModel& model, std::span<const double> x,
                   const AttackConfig& cfg) {
  cfg.validate();
  AttackOutcome out;
  const int clean_pred = predict(model, x);
  auto grad = input_gradient(model, x, clean_pred);
  out.queries = 2;

  out.delta.resize(x.size());
  std::vector<double> adv(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    adv[i] = std::clamp(x[i] + cfg.epsilon * sign(grad[i]), cfg.clamp_lo, cfg.clamp_hi);
    out.delta[i] = adv[i] - x[i];
  }
  out.delta_inf_norm = inf_norm(out.delta);
  out.success = predict(model, adv) != clean_pred;
  ++out.queries;
  audit(out, x, cfg);
  return out;
}

AttackOutcome pgd(const VictimModel& model, std::span<const double> x,
                  const AttackConfig& cfg) {
  return iterative_attack(model, x, cfg, true);
}

AttackOutcome bim(const VictimModel& model, std::span<const double> x,
                  const AttackConfig& cfg) {
  return iterative_attack(model, x, cfg, false);
}

AttackOutcome run_attack(const VictimModel& model, std::span<const double> x,
                         const AttackConfig& cfg) {
  switch (cfg.method) {
    case AttackMethod::kFgsm: return fgsm(model, x, cfg);
    case AttackMethod::kBim: return bim(model, x, cfg);
    case AttackMethod::kPgd: return pgd(model, x, cfg);
  }
  throw ConfigError("unknown attack method");
}

void MinPerturbConfig::validate() const {
  if (epsilon_grid.empty()) throw ConfigError("epsilon grid is empty");
  double smallest_gap = epsilon_grid.front();
  for (std::size_t i = 0; i < epsilon_grid.size(); ++i) {
    if (!(epsilon_grid[i] > 0)) throw ConfigError("grid epsilons must be positive");
    if (i > 0) {
      if (epsilon_grid[i] <= epsilon_grid[i - 1])
        throw ConfigError("epsilon grid must be strictly increasing");
      smallest_gap = std::min(smallest_gap, epsilon_grid[i] - epsilon_grid[i - 1]);
    }
  }
  if (refine && !(refine_tolerance > 0 && refine_tolerance < smallest_gap))
    throw ConfigError("refine_tolerance must lie in (0, smallest grid gap)");
}

double min_perturbation(const VictimModel& model, std::span<const double> x,
                        AttackMethod method, const MinPerturbConfig& mp_cfg,
                        const AttackConfig& base) {
  mp_cfg.validate();
  AttackConfig cfg = base;
  cfg.method = method;

  auto succeeds = [&](double eps) {
    return run_attack(model, x, cfg.with_epsilon(eps)).success;
  };

  std::size_t first = mp_cfg.epsilon_grid.size();
  for (std::size_t i = 0; i < mp_cfg.epsilon_grid.size(); ++i) {
    if (succeeds(mp_cfg.epsilon_grid[i])) {
      first = i;
      break;
    }
  }
  if (first == mp_cfg.epsilon_grid.size()) return kNotAttackable;
  if (!mp_cfg.refine) return mp_cfg.epsilon_grid[first];

  double lo = first == 0 ? 0.0 : mp_cfg.epsilon_grid[first - 1];
  double hi = mp_cfg.epsilon_grid[first];
  double best = hi;
  while (hi - lo > mp_cfg.refine_tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (succeeds(mid)) {
      best = mid;
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return best;
}

}  // namespace attackability
