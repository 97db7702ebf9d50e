#ifndef SAFERL_THEORY_HPP
#define SAFERL_THEORY_HPP

#include <optional>
#include <vector>

#include "saferl/recovery.hpp"

namespace saferl::theory {

/// Smoothness of the dynamics in the action argument:
/// ||T(s,a1) - T(s,a2)|| <= G ||a1 - a2||^alpha. Linear dynamics are exactly
/// Holder with G = sigma1(B) and alpha = 1.
struct HolderParams {
  double G = 1.0;
  double alpha = 1.0;

  void validate() const;
};

/// Upper bound on the online tracking cost:
///   cost_offline + 2^(alpha/2 + 1) * G * W * sigma1(A - Ahat)^alpha *
///     ( sigma1(B - Bhat)^alpha * a_max^alpha * 2/(alpha+2) + ||s1||^alpha ).
double performance_bound(double cost_offline, const Mat& A, const Mat& A_hat,
                         const Mat& B, const Mat& B_hat,
                         const HolderParams& params, int W, double a_max,
                         const Vec& s1);

/// argmin_{|a_i| <= bound} ||B a - target||_2. Starts from the clipped
/// minimum-norm least-squares solution and refines with exact coordinate
/// descent, which reaches the global optimum of this convex box QP. Columns
/// with no effect keep their minimum-norm value (B = 0 gives a = 0).
Vec boxed_least_squares(const Mat& B, const Vec& target, double bound);

/// A plain linear system s' = A s + B a (no augmentation).
struct LinSystem {
  Mat A;
  Mat B;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  void validate() const;
};

struct TrackingResult {
  std::vector<Vec> actions;
  std::vector<Vec> states;  // x_1 = s1 .. x_{W+1}
  double cost = 0.0;        // sum_t ||x_{t+1} - y_{t+1}||_2
};

/// Greedy per-step target tracking: at each realized state, pick the boxed
/// least-squares action against the planning model, then evolve under the
/// true system. plan == truth is the offline algorithm; planning with an
/// approximate model while evolving under the truth is the online one. The
/// reported cost is always measured on the realized (true) trajectory.
TrackingResult tracking_oracle(const LinSystem& plan, const LinSystem& truth,
                               const Vec& s1, const std::vector<Vec>& targets,
                               double action_bound);

/// Audit record for one online-vs-offline comparison; stores every Theorem
/// input.
struct RegretReport {
  double cost_online = 0.0;   // cost(That)
  double cost_offline = 0.0;  // cost(T)
  double bound_value = 0.0;
  double sigma1_dA = 0.0;
  double sigma1_dB = 0.0;
  double a_max = 0.0;
  double s1_norm = 0.0;
  int W = 0;
  double G = 0.0;
  double alpha = 1.0;
  bool bound_violated = false;
};

/// Runs the tracker online (plan = That) and offline (plan = T), evaluates
/// the performance bound with the exact linear-case constants
/// G = max(sigma1(B), sigma1(Bhat)), alpha = 1, and a_max taken over both
/// realized action sequences. A violated bound is reported, never swallowed.
RegretReport regret_experiment(const LinSystem& T, const LinSystem& T_hat,
                               const Vec& s1, const std::vector<Vec>& targets,
                               double action_bound);

/// Optional shielded variant: each online tracking action is filtered
/// through the switching controller on a CDM-shaped system before execution.
struct ShieldedTrackingConfig {
  LinearDynamics model;  // approximate CDM used for reachability
  const recovery::RecoveryController* recovery = nullptr;
  shield::SafetyTriggerSet set;
  shield::ShieldConfig shield;
};
RegretReport regret_experiment_shielded(const LinSystem& T,
                                        const LinSystem& T_hat, const Vec& s1,
                                        const std::vector<Vec>& targets,
                                        double action_bound,
                                        const ShieldedTrackingConfig& cfg);

/// Generator for the randomized bound check. Contractive state matrices and
/// feasible target trajectories keep the draws inside the regime the bound
/// speaks about (a trackable safe reference and subordinate model error).
struct RandomSystemConfig {
  int min_state_dim = 2;
  int max_state_dim = 5;
  int min_action_dim = 1;
  int max_action_dim = 3;
  int min_horizon = 5;
  int max_horizon = 50;
  double a_sigma_min = 0.2;     // sigma1(A) range
  double a_sigma_max = 0.6;
  double b_sigma_min = 1.0;     // sigma1(B) range
  double b_sigma_max = 2.0;
  double error_scale_max = 0.08;  // sigma1(A - Ahat) upper bound
  double s1_norm_min = 1.0;
  double s1_norm_max = 2.0;
  double target_action_frac = 0.25;  // reference actions, fraction of the box
  double action_bound = 2.0;
};

struct RandomTrackingProblem {
  LinSystem truth;
  LinSystem approx;
  Vec s1;
  std::vector<Vec> targets;
  double action_bound = 0.0;
};

RandomTrackingProblem random_tracking_problem(const RandomSystemConfig& cfg,
                                              Rng& rng);

struct BatchResult {
  std::vector<RegretReport> reports;
  int violations = 0;
};

/// count independent random systems; each report appended in draw order.
BatchResult regret_batch(const RandomSystemConfig& cfg, int count,
                         std::uint64_t seed);

}  // namespace saferl::theory

#endif  // SAFERL_THEORY_HPP
