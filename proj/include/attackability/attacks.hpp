#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "attackability/nn.hpp"

namespace attackability {

enum class AttackMethod { kFgsm, kBim, kPgd };

const char* to_string(AttackMethod m);
AttackMethod attack_method_from_string(const std::string& s);

/// l-infinity attack parameters. The attack label is always the model's own
/// prediction on the clean sample, so a successful attack means the
/// prediction actually changed. epsilon = 0 is allowed and degenerates to a
/// no-op attack (zero budget, zero delta).
struct AttackConfig {
  AttackMethod method = AttackMethod::kFgsm;
  double epsilon = 0.05;
  double step_alpha = 0.0125;  // PGD/BIM inner step, default epsilon/4
  int iterations = 8;          // PGD/BIM only
  std::uint64_t init_seed = 0; // PGD random start
  double clamp_lo = 0.0;
  double clamp_hi = 1.0;

  void validate() const;
  /// Same config rescaled to budget eps, keeping step_alpha/epsilon fixed.
  AttackConfig with_epsilon(double eps) const;
  /// Same config with init_seed mixed with the sample id, so per-sample
  /// attacks are independent and reproducible regardless of iteration order.
  AttackConfig for_sample(const std::string& sample_id) const;
};

struct AttackOutcome {
  std::vector<double> delta;
  bool success = false;
  double delta_inf_norm = 0.0;
  int queries = 0;  // forward + gradient evaluations
};

/// delta = epsilon * sign(grad_x loss), then clamped into the input box.
/// sign(0) is 0: no perturbation where the gradient gives no direction.
AttackOutcome fgsm(const VictimModel& model, std::span<const double> x, const AttackConfig& cfg);

/// Iterative sign-gradient ascent from a uniform random start in the
/// epsilon-ball, each step projected back into the ball and the input box.
AttackOutcome pgd(const VictimModel& model, std::span<const double> x, const AttackConfig& cfg);

/// PGD without the random start (x'_0 = x).
AttackOutcome bim(const VictimModel& model, std::span<const double> x, const AttackConfig& cfg);

/// Dispatches on cfg.method.
AttackOutcome run_attack(const VictimModel& model, std::span<const double> x,
                         const AttackConfig& cfg);

/// Every attack invocation is audited against the l-infinity budget and box
/// feasibility before returning; a violation throws and is counted here.
namespace attack_audit {
std::uint64_t checks();
std::uint64_t violations();
void reset();
}  // namespace attack_audit

constexpr double kNotAttackable = std::numeric_limits<double>::infinity();

/// Minimum-perturbation search over an increasing epsilon grid with optional
/// bisection refinement between the first succeeding grid point and its
/// predecessor (0 below the first point).
struct MinPerturbConfig {
  std::vector<double> epsilon_grid;
  bool refine = true;
  double refine_tolerance = 1e-3;

  void validate() const;
};

/// Smallest tested epsilon at which the attack succeeds, or kNotAttackable
/// if no grid point succeeds. Seeded attacks reuse base.init_seed at every
/// epsilon, so the sweep is deterministic; the attack's inner step scales
/// with epsilon (fixed step_alpha/epsilon ratio). Success is not assumed
/// monotone in epsilon: the grid is scanned point by point.
double min_perturbation(const VictimModel& model, std::span<const double> x,
                        AttackMethod method, const MinPerturbConfig& mp_cfg,
                        const AttackConfig& base);

}  // namespace attackability
