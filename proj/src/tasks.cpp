#include "saferl/tasks.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace saferl::tasks {

const char* to_string(TaskName name) {
  switch (name) {
    case TaskName::kEfficientGait:
      return "efficient_gait";
    case TaskName::kCatwalk:
      return "catwalk";
    case TaskName::kTwoLegBalance:
      return "two_leg_balance";
    default:
      return "pacing";
  }
}

TaskName task_name_from_string(const std::string& s) {
  if (s == "efficient_gait") return TaskName::kEfficientGait;
  if (s == "catwalk") return TaskName::kCatwalk;
  if (s == "two_leg_balance") return TaskName::kTwoLegBalance;
  if (s == "pacing") return TaskName::kPacing;
  throw std::invalid_argument("unknown task name: " + s);
}

namespace {

constexpr double kPlacementRange = 0.25;  // m, raw candidate magnitude
constexpr double kWidthSharpness = 20.0;

// (1/beta) log(1 + exp(beta x)): smooth, positive, ~max(0, x) for large beta.
double sharp_softplus(double x) {
  const double bx = kWidthSharpness * x;
  if (bx > 30.0) return x;
  return std::log1p(std::exp(bx)) / kWidthSharpness;
}

}  // namespace

CatwalkAction CatwalkAction::from_raw(const Eigen::Vector4d& raw,
                                      double bound) {
  if (bound <= 0.0) throw std::invalid_argument("CatwalkAction: bound <= 0");
  const Eigen::Vector4d cand = (raw / bound).cwiseMax(-1.0).cwiseMin(1.0) *
                               kPlacementRange;  // FR, FL, RR, RL
  CatwalkAction out;
  const double center_f = 0.5 * (cand[0] + cand[1]);
  const double width_f = sharp_softplus(cand[1] - cand[0]);
  out.p_fl_y = center_f + 0.5 * width_f;
  out.p_fr_y = center_f - 0.5 * width_f;
  const double center_r = 0.5 * (cand[2] + cand[3]);
  const double width_r = sharp_softplus(cand[3] - cand[2]);
  out.p_rl_y = center_r + 0.5 * width_r;
  out.p_rr_y = center_r - 0.5 * width_r;
  return out;
}

void TaskSpec::validate() const {
  if (survival_bonus <= 0.0)
    throw std::invalid_argument("TaskSpec: survival_bonus must be > 0");
  if (episode_length < 1)
    throw std::invalid_argument("TaskSpec: episode_length < 1");
  if (reward_scale <= 0.0)
    throw std::invalid_argument("TaskSpec: reward_scale <= 0");
  if (action_bound <= 0.0)
    throw std::invalid_argument("TaskSpec: action_bound <= 0");
  if (name == TaskName::kCatwalk && action_dim < 10)
    throw std::invalid_argument("TaskSpec: catwalk needs 6+4 action dims");
  if (action_dim < 6) throw std::invalid_argument("TaskSpec: action_dim < 6");
  if (energy_weight < 0.0 || catwalk_kappa < 0.0)
    throw std::invalid_argument("TaskSpec: negative weight");
  trigger_set_by_name(trigger_set);  // throws on unknown preset
}

double reward(const TaskSpec& task, const CdmState& s, const ControlAction& a) {
  const double e = task.survival_bonus;
  switch (task.name) {
    case TaskName::kEfficientGait:
      return e - task.energy_weight * a.values().squaredNorm();
    case TaskName::kCatwalk: {
      const auto placements = CatwalkAction::from_raw(
          a.values().tail<4>(), a.bound());
      const double df = placements.p_fr_y - placements.p_fl_y;
      const double dr = placements.p_rr_y - placements.p_rl_y;
      return e - df * df - dr * dr;
    }
    case TaskName::kTwoLegBalance: {
      const double dz = s.z - task.target_height;
      return e - dz * dz;
    }
    default: {  // pacing
      const Eigen::Vector3d v(s.xdot, s.ydot, s.zdot);
      return e - (v - task.target_velocity).squaredNorm();
    }
  }
}

double cost(const CdmState& s, double failure_z) {
  return s.z < failure_z ? 1.0 : 0.0;
}

StepResult env_step(const TaskSpec& task, const LinearDynamics& dyn_true,
                    const shield::SafetyTriggerSet& set, const CdmState& s,
                    const ControlAction& a, Rng& rng) {
  CdmState next = step(dyn_true, s, a);
  if (task.noise.enabled) {
    task.noise.validate(dyn_true.state_dim());
    Vec12 v = next.vector();
    for (int i = 0; i < CdmState::kDim; ++i) {
      double sigma = task.noise.sigma[i];
      if (sigma <= 0.0) continue;
      if (task.name == TaskName::kCatwalk && i == 4) {  // ydot channel
        const auto placements =
            CatwalkAction::from_raw(a.values().tail<4>(), a.bound());
        sigma *= 1.0 + task.catwalk_kappa / (placements.stance_width() + 0.01);
      }
      v[i] += sigma * rng.normal();
    }
    next = CdmState::from_vector(v);
  }
  StepResult out;
  out.next = next;
  out.reward = task.reward_scale * reward(task, s, a);
  out.cost = cost(next, set.failure_z);
  out.classification = shield::classify(next, set);
  return out;
}

StepResult env_step(const TaskSpec& task, const LinearDynamics& dyn_true,
                    const CdmState& s, const ControlAction& a, Rng& rng) {
  return env_step(task, dyn_true, trigger_set_by_name(task.trigger_set), s, a,
                  rng);
}

Environment::Environment(TaskSpec task, LinearDynamics dyn_true)
    : task_(std::move(task)),
      dyn_(std::move(dyn_true)),
      set_(trigger_set_by_name(task_.trigger_set)) {
  task_.validate();
  if (dyn_.m() != task_.action_dim)
    throw std::invalid_argument("Environment: dynamics m != task action_dim");
}

CdmState Environment::nominal_start() const {
  CdmState s;
  const bool target_inside =
      task_.target_height > set_.z_min && task_.target_height < set_.z_max;
  s.z = target_inside ? task_.target_height : 0.5 * (set_.z_min + set_.z_max);
  return s;
}

CdmState Environment::reset(Rng& rng) const {
  Vec12 v = nominal_start().vector();
  if (task_.start_jitter > 0.0) {
    v += task_.start_jitter * rng.normal_vector(CdmState::kDim);
  }
  return CdmState::from_vector(v);
}

namespace {

NoiseModel default_task_noise() {
  NoiseModel noise = NoiseModel::disabled(CdmState::kDim);
  noise.enabled = true;
  // Velocity-channel process noise only; positions integrate it.
  noise.sigma[3] = 0.01;   // xdot
  noise.sigma[4] = 0.02;   // ydot
  noise.sigma[5] = 0.02;   // zdot
  noise.sigma[9] = 0.02;   // rolldot
  noise.sigma[10] = 0.01;  // pitchdot
  noise.sigma[11] = 0.01;  // yawdot
  return noise;
}

}  // namespace

TaskSpec task_preset(TaskName name) {
  TaskSpec task;
  task.name = name;
  task.noise = default_task_noise();
  task.episode_length = 200;
  task.reward_scale = 1.0 / task.episode_length;
  switch (name) {
    case TaskName::kCatwalk:
      task.action_dim = 10;
      break;
    case TaskName::kPacing:
      task.target_velocity = Eigen::Vector3d(0.3, 0.0, 0.0);
      break;
    default:
      break;
  }
  task.validate();
  return task;
}

LinearDynamics default_laikago_dynamics(int extra_action_dims) {
  return build_cdm(24.0, Eigen::Vector3d(1.0, 1.3, 1.2), 0.016,
                   extra_action_dims);
}

LinearDynamics default_a1_dynamics(int extra_action_dims) {
  return build_cdm(12.7, Eigen::Vector3d(0.4, 0.6, 0.5), 0.016,
                   extra_action_dims);
}

nlohmann::json task_to_json(const TaskSpec& task) {
  nlohmann::json j;
  j["name"] = to_string(task.name);
  j["survival_bonus"] = task.survival_bonus;
  j["target_velocity"] = {task.target_velocity[0], task.target_velocity[1],
                          task.target_velocity[2]};
  j["target_height"] = task.target_height;
  j["energy_weight"] = task.energy_weight;
  j["catwalk_kappa"] = task.catwalk_kappa;
  j["episode_length"] = task.episode_length;
  j["trigger_set"] = task.trigger_set;
  j["reward_scale"] = task.reward_scale;
  j["action_bound"] = task.action_bound;
  j["action_dim"] = task.action_dim;
  j["start_jitter"] = task.start_jitter;
  j["noise_enabled"] = task.noise.enabled;
  std::vector<double> sigma(CdmState::kDim);
  for (int i = 0; i < CdmState::kDim; ++i) sigma[static_cast<std::size_t>(i)] = task.noise.sigma[i];
  j["noise_sigma"] = sigma;
  return j;
}

TaskSpec task_from_json(const nlohmann::json& j) {
  TaskSpec task = task_preset(task_name_from_string(j.at("name").get<std::string>()));
  if (j.contains("survival_bonus")) task.survival_bonus = j["survival_bonus"];
  if (j.contains("target_velocity")) {
    const auto v = j["target_velocity"].get<std::vector<double>>();
    if (v.size() != 3)
      throw std::invalid_argument("task_from_json: target_velocity needs 3 entries");
    task.target_velocity = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  if (j.contains("target_height")) task.target_height = j["target_height"];
  if (j.contains("energy_weight")) task.energy_weight = j["energy_weight"];
  if (j.contains("catwalk_kappa")) task.catwalk_kappa = j["catwalk_kappa"];
  if (j.contains("episode_length")) {
    task.episode_length = j["episode_length"];
    task.reward_scale = 1.0 / std::max(1, task.episode_length);
  }
  if (j.contains("reward_scale")) task.reward_scale = j["reward_scale"];
  if (j.contains("trigger_set")) task.trigger_set = j["trigger_set"];
  if (j.contains("action_bound")) task.action_bound = j["action_bound"];
  if (j.contains("action_dim")) task.action_dim = j["action_dim"];
  if (j.contains("start_jitter")) task.start_jitter = j["start_jitter"];
  if (j.contains("noise_enabled")) task.noise.enabled = j["noise_enabled"];
  if (j.contains("noise_sigma")) {
    const auto sigma = j["noise_sigma"].get<std::vector<double>>();
    if (sigma.size() != CdmState::kDim)
      throw std::invalid_argument("task_from_json: noise_sigma needs 12 entries");
    for (int i = 0; i < CdmState::kDim; ++i) task.noise.sigma[i] = sigma[static_cast<std::size_t>(i)];
  }
  task.validate();
  return task;
}

}  // namespace saferl::tasks
