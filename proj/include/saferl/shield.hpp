#ifndef SAFERL_SHIELD_HPP
#define SAFERL_SHIELD_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "saferl/dynamics.hpp"

namespace saferl::shield {

enum class Classification { kSafe, kTrigger, kFailure };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::kSafe:
      return "safe";
    case Classification::kTrigger:
      return "trigger";
    default:
      return "failure";
  }
}

/// Box thresholds for the trigger set, plus the failure height. The failure
/// set is nested inside the trigger set (failure_z < z_min).
struct SafetyTriggerSet {
  double z_min = 0.4;
  double z_max = 0.55;
  double roll_max = 0.26;
  double pitch_max = 0.26;
  double ydot_max = 0.5;
  double rolldot_max = 0.5;
  double failure_z = 0.1;

  void validate() const;
};

/// Failure iff z < failure_z; else Trigger iff any box threshold is crossed;
/// else Safe. Comparisons are strict, so states exactly on a threshold are
/// Safe.
Classification classify(const CdmState& s, const SafetyTriggerSet& set);

/// Named threshold presets: "ctri1" (default), the stricter "ctri2"/"ctri3"
/// lateral-rate variants, and the smaller-robot "a1" set.
const std::map<std::string, SafetyTriggerSet>& preset_trigger_sets();

/// Lookup by preset name; throws std::invalid_argument on unknown names.
SafetyTriggerSet trigger_set_by_name(const std::string& name);

nlohmann::json trigger_set_to_json(const SafetyTriggerSet& set);
SafetyTriggerSet trigger_set_from_json(const nlohmann::json& j);

/// Deterministic state-to-action map. Rollout policies must be the
/// deterministic mean; execution policies may capture their own sampling.
using DeterministicPolicy = std::function<ControlAction(const CdmState&)>;

/// The shield's memory: which policy produced the previous action. None only
/// before the first step of an episode. plan_countdown is used by the
/// planning-criteria mode (committed recovery prefix still to run).
struct SwitchState {
  std::optional<PolicySource> prev_source;
  int consecutive_recovery_steps = 0;
  int plan_countdown = -1;

  static SwitchState initial() { return SwitchState{}; }
};

enum class ShieldMode {
  kOff,           // learner always acts (no shield)
  kNaive,         // trigger-set membership only
  kReachability,  // trigger + w-step hand-back check (default)
  kPlanning       // trigger + minimal recovery-prefix planning
};

struct ShieldConfig {
  int horizon_w = 10;
  ShieldMode mode = ShieldMode::kReachability;
};

/// Stateless switch: recovery acts iff the state is in the trigger set.
std::pair<ControlAction, PolicySource> naive_select(
    const CdmState& s, const DeterministicPolicy& learner,
    const DeterministicPolicy& recovery, const SafetyTriggerSet& set);

/// Rolls the learner's mean actions w steps through the approximate model;
/// true iff every predicted state classifies Safe. w = 0 is vacuously true.
bool reachability_check(const LinearDynamics& model, const CdmState& s,
                        const DeterministicPolicy& learner_mean, int w,
                        const SafetyTriggerSet& set);

/// Minimal recovery prefix: smallest p in [0, w-1] such that p recovery
/// actions followed by learner actions out to the horizon keep every
/// predicted state out of the trigger set. nullopt when no prefix works.
std::optional<int> reachability_plan(const LinearDynamics& model,
                                     const CdmState& s,
                                     const DeterministicPolicy& recovery,
                                     const DeterministicPolicy& learner_mean,
                                     int w, const SafetyTriggerSet& set);

struct SelectResult {
  ControlAction executed;
  PolicySource source;
  ControlAction learner_proposal;  // always computed, for the replay buffer
  SwitchState next;
};

/// The switching control law. Recovery acts iff the state is in the trigger
/// set, or the previous action came from recovery and the w-step prediction
/// of the learner's mean actions re-enters the trigger set. The learner's
/// proposal is computed either way.
SelectResult select_action(const SwitchState& sw, const CdmState& s,
                           const DeterministicPolicy& learner_act,
                           const DeterministicPolicy& learner_mean,
                           const DeterministicPolicy& recovery,
                           const LinearDynamics& model,
                           const SafetyTriggerSet& set,
                           const ShieldConfig& config);

}  // namespace saferl::shield

#endif  // SAFERL_SHIELD_HPP
