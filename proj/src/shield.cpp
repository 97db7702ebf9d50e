#include "saferl/shield.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace saferl::shield {

void SafetyTriggerSet::validate() const {
  if (!(z_min < z_max))
    throw std::invalid_argument("SafetyTriggerSet: z_min >= z_max");
  if (z_min <= 0 || z_max <= 0 || roll_max <= 0 || pitch_max <= 0 ||
      ydot_max <= 0 || rolldot_max <= 0 || failure_z <= 0)
    throw std::invalid_argument("SafetyTriggerSet: thresholds must be > 0");
  if (!(failure_z < z_min))
    throw std::invalid_argument(
        "SafetyTriggerSet: failure_z must be < z_min (failure set nested in "
        "trigger set)");
}

Classification classify(const CdmState& s, const SafetyTriggerSet& set) {
  if (s.z < set.failure_z) return Classification::kFailure;
  const bool triggered = s.z < set.z_min || s.z > set.z_max ||
                         std::abs(s.roll) > set.roll_max ||
                         std::abs(s.pitch) > set.pitch_max ||
                         std::abs(s.ydot) > set.ydot_max ||
                         std::abs(s.rolldot) > set.rolldot_max;
  return triggered ? Classification::kTrigger : Classification::kSafe;
}

const std::map<std::string, SafetyTriggerSet>& preset_trigger_sets() {
  static const std::map<std::string, SafetyTriggerSet> kPresets = [] {
    std::map<std::string, SafetyTriggerSet> m;
    SafetyTriggerSet ctri1;  // Laikago defaults
    ctri1.z_min = 0.4;
    ctri1.z_max = 0.55;
    ctri1.roll_max = 0.26;
    ctri1.pitch_max = 0.26;
    ctri1.ydot_max = 0.5;
    ctri1.rolldot_max = 0.5;
    ctri1.failure_z = 0.1;
    m["ctri1"] = ctri1;

    SafetyTriggerSet ctri2 = ctri1;
    ctri2.ydot_max = 0.375;
    ctri2.rolldot_max = 0.375;
    m["ctri2"] = ctri2;

    SafetyTriggerSet ctri3 = ctri1;
    ctri3.ydot_max = 0.25;
    ctri3.rolldot_max = 0.25;
    m["ctri3"] = ctri3;

    SafetyTriggerSet a1 = ctri1;  // smaller robot: only height bounds change
    a1.z_min = 0.2;
    a1.z_max = 0.3;
    a1.failure_z = 0.05;
    m["a1"] = a1;

    for (const auto& kv : m) kv.second.validate();
    return m;
  }();
  return kPresets;
}

SafetyTriggerSet trigger_set_by_name(const std::string& name) {
  const auto& presets = preset_trigger_sets();
  const auto it = presets.find(name);
  if (it == presets.end())
    throw std::invalid_argument("unknown trigger set preset: " + name);
  return it->second;
}

nlohmann::json trigger_set_to_json(const SafetyTriggerSet& set) {
  return nlohmann::json{{"z_min", set.z_min},
                        {"z_max", set.z_max},
                        {"roll_max", set.roll_max},
                        {"pitch_max", set.pitch_max},
                        {"ydot_max", set.ydot_max},
                        {"rolldot_max", set.rolldot_max},
                        {"failure_z", set.failure_z}};
}

SafetyTriggerSet trigger_set_from_json(const nlohmann::json& j) {
  SafetyTriggerSet set;
  set.z_min = j.at("z_min").get<double>();
  set.z_max = j.at("z_max").get<double>();
  set.roll_max = j.at("roll_max").get<double>();
  set.pitch_max = j.at("pitch_max").get<double>();
  set.ydot_max = j.at("ydot_max").get<double>();
  set.rolldot_max = j.at("rolldot_max").get<double>();
  set.failure_z = j.at("failure_z").get<double>();
  set.validate();
  return set;
}

std::pair<ControlAction, PolicySource> naive_select(
    const CdmState& s, const DeterministicPolicy& learner,
    const DeterministicPolicy& recovery, const SafetyTriggerSet& set) {
  if (classify(s, set) != Classification::kSafe) {
    return {recovery(s), PolicySource::kRecovery};
  }
  return {learner(s), PolicySource::kLearner};
}

bool reachability_check(const LinearDynamics& model, const CdmState& s,
                        const DeterministicPolicy& learner_mean, int w,
                        const SafetyTriggerSet& set) {
  if (w < 0) throw std::invalid_argument("reachability_check: w < 0");
  CdmState pred = s;
  for (int i = 0; i < w; ++i) {
    pred = step(model, pred, learner_mean(pred));
    if (classify(pred, set) != Classification::kSafe) return false;
  }
  return true;
}

std::optional<int> reachability_plan(const LinearDynamics& model,
                                     const CdmState& s,
                                     const DeterministicPolicy& recovery,
                                     const DeterministicPolicy& learner_mean,
                                     int w, const SafetyTriggerSet& set) {
  if (w < 1) throw std::invalid_argument("reachability_plan: w < 1");
  // Prefix length 0 means an all-learner window; the search order makes the
  // returned prefix minimal by construction.
  for (int prefix = 0; prefix <= w - 1; ++prefix) {
    CdmState pred = s;
    bool safe = true;
    for (int i = 0; i < w && safe; ++i) {
      const ControlAction a =
          i < prefix ? recovery(pred) : learner_mean(pred);
      pred = step(model, pred, a);
      safe = classify(pred, set) == Classification::kSafe;
    }
    if (safe) return prefix;
  }
  return std::nullopt;
}

SelectResult select_action(const SwitchState& sw, const CdmState& s,
                           const DeterministicPolicy& learner_act,
                           const DeterministicPolicy& learner_mean,
                           const DeterministicPolicy& recovery,
                           const LinearDynamics& model,
                           const SafetyTriggerSet& set,
                           const ShieldConfig& config) {
  ControlAction proposal = learner_act(s);
  SwitchState next = sw;
  next.plan_countdown = -1;

  auto pick_learner = [&]() {
    next.prev_source = PolicySource::kLearner;
    next.consecutive_recovery_steps = 0;
    return SelectResult{proposal, PolicySource::kLearner, proposal, next};
  };
  auto pick_recovery = [&]() {
    next.prev_source = PolicySource::kRecovery;
    next.consecutive_recovery_steps = sw.consecutive_recovery_steps + 1;
    return SelectResult{recovery(s), PolicySource::kRecovery, proposal, next};
  };

  if (config.mode == ShieldMode::kOff) return pick_learner();

  const bool in_trigger = classify(s, set) != Classification::kSafe;
  if (in_trigger) return pick_recovery();
  if (sw.prev_source != PolicySource::kRecovery) return pick_learner();

  // Previous action came from recovery: hand back only when certified.
  switch (config.mode) {
    case ShieldMode::kNaive:
      return pick_learner();
    case ShieldMode::kReachability:
      if (reachability_check(model, s, learner_mean, config.horizon_w, set))
        return pick_learner();
      return pick_recovery();
    case ShieldMode::kPlanning: {
      if (sw.plan_countdown > 0) {
        auto out = pick_recovery();
        out.next.plan_countdown = sw.plan_countdown - 1;
        return out;
      }
      if (sw.plan_countdown == 0) return pick_learner();
      const auto prefix = reachability_plan(model, s, recovery, learner_mean,
                                            std::max(config.horizon_w, 1), set);
      if (!prefix.has_value()) return pick_recovery();
      if (*prefix == 0) return pick_learner();
      auto out = pick_recovery();
      out.next.plan_countdown = *prefix - 1;  // commit to p recovery steps
      return out;
    }
    default:
      return pick_learner();
  }
}

}  // namespace saferl::shield
