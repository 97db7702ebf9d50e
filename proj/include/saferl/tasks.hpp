#ifndef SAFERL_TASKS_HPP
#define SAFERL_TASKS_HPP

#include "saferl/shield.hpp"

namespace saferl::tasks {

enum class TaskName { kEfficientGait, kCatwalk, kTwoLegBalance, kPacing };

const char* to_string(TaskName name);
TaskName task_name_from_string(const std::string& s);

/// Foot lateral placements for the catwalk task, in meters. Left placements
/// never cross right ones; from_raw enforces that with a smooth sharp-softplus
/// width so the constraint holds for any raw network output.
struct CatwalkAction {
  double p_fr_y = 0.0;
  double p_fl_y = 0.0;
  double p_rr_y = 0.0;
  double p_rl_y = 0.0;

  /// raw: the four appended action components (order FR, FL, RR, RL), in
  /// action units within [-bound, bound]; mapped to +-0.25 m candidates.
  static CatwalkAction from_raw(const Eigen::Vector4d& raw, double bound);

  double front_width() const { return p_fl_y - p_fr_y; }
  double rear_width() const { return p_rl_y - p_rr_y; }
  /// Mean of front and rear widths; drives the destabilization coupling.
  double stance_width() const { return 0.5 * (front_width() + rear_width()); }
};

/// Task description: reward shape, noise, episode mechanics. Rewards emitted
/// by the environment are the raw formulas scaled by reward_scale (default
/// 1/W) so an episode return is O(1) against the recovery penalty of 1.
struct TaskSpec {
  TaskName name = TaskName::kTwoLegBalance;
  double survival_bonus = 1.0;                      // e
  Eigen::Vector3d target_velocity{0.0, 0.0, 0.0};   // pacing
  double target_height = 0.45;                      // two-leg balance
  double energy_weight = 0.1;                       // c_E, efficient gait
  double catwalk_kappa = 0.05;                      // destabilization coupling
  NoiseModel noise = NoiseModel::disabled(CdmState::kDim);
  int episode_length = 200;                         // W
  std::string trigger_set = "ctri1";
  double reward_scale = 1.0 / 200.0;
  double action_bound = 20.0;
  int action_dim = 6;
  double start_jitter = 0.01;

  void validate() const;
};

/// Raw per-step task reward (unscaled paper formulas).
double reward(const TaskSpec& task, const CdmState& s, const ControlAction& a);

/// Constraint cost: the failure indicator 1[z < failure_z].
double cost(const CdmState& s, double failure_z = 0.1);

struct StepResult {
  CdmState next;
  double reward = 0.0;  // scaled by task.reward_scale
  double cost = 0.0;
  shield::Classification classification = shield::Classification::kSafe;
};

/// One environment transition under the true dynamics with task noise. For
/// the catwalk the lateral-velocity noise grows as the stance narrows:
/// sigma_eff = sigma_ydot * (1 + kappa / (stance_width + 0.01)).
StepResult env_step(const TaskSpec& task, const LinearDynamics& dyn_true,
                    const shield::SafetyTriggerSet& set, const CdmState& s,
                    const ControlAction& a, Rng& rng);

/// Convenience overload resolving the trigger set from the task spec.
StepResult env_step(const TaskSpec& task, const LinearDynamics& dyn_true,
                    const CdmState& s, const ControlAction& a, Rng& rng);

/// A task bound to concrete true dynamics and trigger set. The nominal start
/// state sits at the target height (or the trigger set's height midpoint when
/// the target lies outside the safe band) with zero rates.
class Environment {
 public:
  Environment(TaskSpec task, LinearDynamics dyn_true);

  const TaskSpec& task() const { return task_; }
  const LinearDynamics& dynamics() const { return dyn_; }
  const shield::SafetyTriggerSet& trigger_set() const { return set_; }

  CdmState nominal_start() const;
  CdmState reset(Rng& rng) const;  // nominal start plus small jitter
  StepResult step(const CdmState& s, const ControlAction& a, Rng& rng) const {
    return env_step(task_, dyn_, set_, s, a, rng);
  }

 private:
  TaskSpec task_;
  LinearDynamics dyn_;
  shield::SafetyTriggerSet set_;
};

/// Tuned defaults per task (Laikago-scale robot).
TaskSpec task_preset(TaskName name);

/// CDM instances for the two robots.
LinearDynamics default_laikago_dynamics(int extra_action_dims = 0);
LinearDynamics default_a1_dynamics(int extra_action_dims = 0);

nlohmann::json task_to_json(const TaskSpec& task);
TaskSpec task_from_json(const nlohmann::json& j);

}  // namespace saferl::tasks

#endif  // SAFERL_TASKS_HPP
