#include "saferl/recovery.hpp"

#include <iostream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace saferl::recovery {

RecoveryController::RecoveryController(Mat gain, Vec12 setpoint,
                                       double action_bound)
    : gain_(std::move(gain)), setpoint_(std::move(setpoint)), bound_(action_bound) {
  if (gain_.cols() != CdmState::kDim)
    throw std::invalid_argument("RecoveryController: gain must have 12 columns");
  if (bound_ <= 0.0)
    throw std::invalid_argument("RecoveryController: action bound <= 0");
}

ControlAction RecoveryController::act(const CdmState& s) const {
  const Vec u = -gain_ * (s.vector() - setpoint_);
  return ControlAction(u, bound_);
}

Vec12 balance_setpoint(double target_height) {
  Vec12 sp = Vec12::Zero();
  sp[2] = target_height;
  return sp;
}

Vec default_state_weights() {
  Vec q(CdmState::kDim);
  q << 1, 1, 100, 10, 10, 10, 10, 10, 10, 10, 10, 10;
  return q;
}

RecoveryController synthesize(const LinearDynamics& model,
                              const Vec& state_weights,
                              const Vec& action_weights, const Vec12& setpoint,
                              double action_bound) {
  if (model.state_dim() != CdmState::kDim)
    throw std::invalid_argument("synthesize: model is not CDM-shaped");
  if (state_weights.size() != CdmState::kDim)
    throw std::invalid_argument("synthesize: state_weights must have 12 entries");
  if (action_weights.size() != model.m())
    throw std::invalid_argument("synthesize: action_weights length != m");
  if (state_weights.minCoeff() < 0.0 || action_weights.minCoeff() <= 0.0)
    throw std::invalid_argument("synthesize: need Q >= 0 and R > 0");

  const Mat Q = state_weights.asDiagonal();
  const Mat R = action_weights.asDiagonal();
  const DareSolution sol = solve_dare(model.A_core(), model.B_core(), Q, R,
                                      1e-9, 10000, "recovery model");
  return RecoveryController(sol.gain, setpoint, action_bound);
}

double closed_loop_spectral_radius(const LinearDynamics& model,
                                   const RecoveryController& ctrl) {
  return spectral_radius(model.A_core() - model.B_core() * ctrl.gain());
}

namespace {

using shield::Classification;
using shield::SafetyTriggerSet;

// Draw one state from the trigger set: pick one condition, violate it by up
// to 20% of the threshold, keep everything else inside the safe box.
CdmState sample_trigger_state(const SafetyTriggerSet& set, Rng& rng) {
  CdmState s;
  s.x = rng.uniform(-0.5, 0.5);
  s.y = rng.uniform(-0.5, 0.5);
  s.z = rng.uniform(set.z_min * 1.02, set.z_max * 0.98);
  s.xdot = rng.uniform(-0.25, 0.25);
  s.ydot = rng.uniform(-0.9, 0.9) * set.ydot_max;
  s.zdot = rng.uniform(-0.25, 0.25);
  s.roll = rng.uniform(-0.9, 0.9) * set.roll_max;
  s.pitch = rng.uniform(-0.9, 0.9) * set.pitch_max;
  s.yaw = rng.uniform(-0.5, 0.5);
  s.rolldot = rng.uniform(-0.9, 0.9) * set.rolldot_max;
  s.pitchdot = rng.uniform(-0.25, 0.25);
  s.yawdot = rng.uniform(-0.25, 0.25);

  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const double beyond = rng.uniform(1e-6, 0.2);
  switch (rng.uniform_int(0, 5)) {
    case 0:  // low height, staying above the failure band
      s.z = std::max(set.failure_z * 1.05, set.z_min * (1.0 - beyond));
      break;
    case 1:
      s.z = set.z_max * (1.0 + beyond);
      break;
    case 2:
      s.roll = sign * set.roll_max * (1.0 + beyond);
      break;
    case 3:
      s.pitch = sign * set.pitch_max * (1.0 + beyond);
      break;
    case 4:
      s.ydot = sign * set.ydot_max * (1.0 + beyond);
      break;
    default:
      s.rolldot = sign * set.rolldot_max * (1.0 + beyond);
      break;
  }
  return s;
}

}  // namespace

double verify_viability(const RecoveryController& ctrl,
                        const LinearDynamics& true_dyn,
                        const shield::SafetyTriggerSet& set, int n_samples,
                        double horizon_s, Rng& rng) {
  if (n_samples < 1)
    throw std::invalid_argument("verify_viability: n_samples < 1");
  set.validate();
  const int steps = std::max(1, static_cast<int>(horizon_s / true_dyn.dt()));

  int valid = 0;
  int recovered = 0;
  for (int i = 0; i < n_samples; ++i) {
    CdmState s;
    bool found = false;
    for (int attempt = 0; attempt < 64 && !found; ++attempt) {
      s = sample_trigger_state(set, rng);
      found = shield::classify(s, set) == Classification::kTrigger;
    }
    if (!found) continue;
    ++valid;

    bool reached_safe = false;
    bool failed = false;
    for (int t = 0; t < steps && !failed; ++t) {
      s = step(true_dyn, s, ctrl.act(s));
      const Classification c = shield::classify(s, set);
      if (c == Classification::kFailure) failed = true;
      if (c == Classification::kSafe) reached_safe = true;
    }
    if (reached_safe && !failed) ++recovered;
  }

  if (valid == 0) {
    std::cerr << "verify_viability: no sampleable trigger states for this "
                 "set; check is vacuous\n";
    return 1.0;
  }
  return static_cast<double>(recovered) / static_cast<double>(valid);
}

nlohmann::json controller_to_json(const RecoveryController& ctrl) {
  nlohmann::json j;
  j["m"] = ctrl.action_dim();
  j["n"] = CdmState::kDim;
  std::vector<double> gain;
  gain.reserve(static_cast<std::size_t>(ctrl.action_dim()) * CdmState::kDim);
  for (int r = 0; r < ctrl.action_dim(); ++r)
    for (int c = 0; c < CdmState::kDim; ++c) gain.push_back(ctrl.gain()(r, c));
  j["gain"] = gain;
  std::vector<double> sp(CdmState::kDim);
  for (int i = 0; i < CdmState::kDim; ++i) sp[static_cast<std::size_t>(i)] = ctrl.setpoint()[i];
  j["setpoint"] = sp;
  j["action_bound"] = ctrl.action_bound();
  return j;
}

RecoveryController controller_from_json(const nlohmann::json& j) {
  const int m = j.at("m").get<int>();
  const auto gain = j.at("gain").get<std::vector<double>>();
  const auto sp = j.at("setpoint").get<std::vector<double>>();
  if (gain.size() != static_cast<std::size_t>(m) * CdmState::kDim ||
      sp.size() != CdmState::kDim)
    throw std::invalid_argument("controller_from_json: array size mismatch");
  Mat K(m, CdmState::kDim);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < CdmState::kDim; ++c)
      K(r, c) = gain[static_cast<std::size_t>(r) * CdmState::kDim + c];
  Vec12 setpoint;
  for (int i = 0; i < CdmState::kDim; ++i) setpoint[i] = sp[static_cast<std::size_t>(i)];
  return RecoveryController(K, setpoint, j.at("action_bound").get<double>());
}

}  // namespace saferl::recovery
