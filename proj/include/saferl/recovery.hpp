#ifndef SAFERL_RECOVERY_HPP
#define SAFERL_RECOVERY_HPP

#include "saferl/shield.hpp"

namespace saferl::recovery {

/// Linear state-feedback regulator u = clip(-K (s - setpoint)) driving the
/// robot to the stationary balance state. Immutable after synthesis.
class RecoveryController {
 public:
  RecoveryController(Mat gain, Vec12 setpoint, double action_bound);

  ControlAction act(const CdmState& s) const;

  shield::DeterministicPolicy as_policy() const {
    return [*this](const CdmState& s) { return act(s); };
  }

  const Mat& gain() const { return gain_; }
  const Vec12& setpoint() const { return setpoint_; }
  double action_bound() const { return bound_; }
  int action_dim() const { return static_cast<int>(gain_.rows()); }

 private:
  Mat gain_;  // m x 12
  Vec12 setpoint_;
  double bound_;
};

/// Balance setpoint: the target height with every other regulated component
/// at zero.
Vec12 balance_setpoint(double target_height);

/// Default regulator weights: 100 on z, 10 on velocities, attitude and rates,
/// 1 on x and y.
Vec default_state_weights();

/// Riccati synthesis on the de-augmented model (the designer's approximate
/// dynamics). state_weights/action_weights are the diagonals of Q and R.
/// Throws when the fixed-point iteration does not converge.
RecoveryController synthesize(const LinearDynamics& model,
                              const Vec& state_weights,
                              const Vec& action_weights, const Vec12& setpoint,
                              double action_bound);

/// Closed-loop spectral radius of the synthesized loop on the model.
double closed_loop_spectral_radius(const LinearDynamics& model,
                                   const RecoveryController& ctrl);

/// Empirical recovery rate: sample states in the trigger set (excluding
/// failure) up to 20% beyond the thresholds, roll the controller under the
/// true dynamics (noise-free) for horizon_s seconds, and return the fraction
/// of runs that reach Safe without ever reaching Failure. When no valid
/// sample can be constructed the check is vacuous and returns 1.0 with a
/// warning on stderr.
double verify_viability(const RecoveryController& ctrl,
                        const LinearDynamics& true_dyn,
                        const shield::SafetyTriggerSet& set, int n_samples,
                        double horizon_s, Rng& rng);

nlohmann::json controller_to_json(const RecoveryController& ctrl);
RecoveryController controller_from_json(const nlohmann::json& j);

}  // namespace saferl::recovery

#endif  // SAFERL_RECOVERY_HPP
