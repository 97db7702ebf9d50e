#ifndef SAFERL_LEARNER_HPP
#define SAFERL_LEARNER_HPP

#include "saferl/recovery.hpp"
#include "saferl/tasks.hpp"

namespace saferl::learner {

/// Two-hidden-layer tanh network with a Gaussian action head. The network
/// outputs a pre-squash mean h(s); sampled actions are
/// a = bound * tanh(h(s) + std .* n). The log-std vector is state-independent
/// and clamped to [-5, 1]. Log-densities and their gradients are taken in the
/// pre-squash parameterization, whose parameter gradient equals the squashed
/// action's exactly (the tanh Jacobian does not depend on the parameters).
class MlpPolicy {
 public:
  MlpPolicy(int action_dim, double action_bound, int hidden = 32);

  /// Small random init; the output layer is scaled down so initial mean
  /// rollouts stay near zero and the shield can hand control back.
  static MlpPolicy random_init(int action_dim, double action_bound, Rng& rng,
                               int hidden = 32, double output_scale = 0.01);

  int state_dim() const { return CdmState::kDim; }
  int action_dim() const { return m_; }
  int hidden() const { return hidden_; }
  double action_bound() const { return bound_; }
  int param_count() const;

  Vec params() const;
  void set_params(const Vec& theta);

  /// Deterministic squashed mean; the action used in shield rollouts.
  ControlAction mean_action(const CdmState& s) const;
  /// Sampled action: mean + std * normal in pre-squash space, then squashed.
  ControlAction act(const CdmState& s, Rng& rng) const;

  double log_prob(const CdmState& s, const ControlAction& a) const;
  /// Analytic gradient of log_prob w.r.t. the flat parameter vector.
  Vec log_prob_grad(const CdmState& s, const ControlAction& a) const;

  shield::DeterministicPolicy mean_policy() const {
    return [this](const CdmState& s) { return mean_action(s); };
  }

  const Vec& log_std() const { return log_std_; }
  void clamp_log_std();

  nlohmann::json to_json() const;
  static MlpPolicy from_json(const nlohmann::json& j);

  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 1.0;

 private:
  struct Forward {
    Vec h1, h2, out;
  };
  Forward forward(const Vec12& s) const;
  Vec presquash(const ControlAction& a) const;

  int m_;
  int hidden_;
  double bound_;
  Mat W1_, W2_, W3_;
  Vec b1_, b2_, b3_;
  Vec log_std_;
};

enum class PenaltyMode { kSubtractOne, kTerminateEpisode };

struct TrainConfig {
  double learning_rate = 0.02;
  int updates = 30;                 // K
  int steps_per_trajectory = 200;   // W
  int trajectories_per_update = 10;
  double gamma = 0.99;
  std::uint64_t seed = 1;
  PenaltyMode penalty_mode = PenaltyMode::kSubtractOne;

  void validate() const;
};

/// REINFORCE with per-episode discounted reward-to-go and a mean baseline,
/// computed on the stored penalized rewards and learner proposals. The
/// gradient norm is clipped at 10. Throws on an empty buffer.
struct UpdateInfo {
  double grad_norm = 0.0;     // before clipping
  double baseline = 0.0;
  std::size_t steps = 0;
};
UpdateInfo policy_update(MlpPolicy& policy, const ReplayBuffer& buffer,
                         double gamma, double learning_rate);

/// Per-update training metrics (rewards reported un-penalized).
struct UpdateMetrics {
  int k = 0;
  double episodic_reward = 0.0;  // mean raw episode return
  double j_cost = 0.0;           // mean discounted episode cost
  int falls = 0;
  int recovery_steps = 0;
  double recovery_fraction = 0.0;
  int trigger_events = 0;  // switches into recovery
  int steps = 0;
};

/// The shield the training loop runs under: the approximate model plus the
/// switching configuration.
struct ShieldSetup {
  LinearDynamics model;
  shield::ShieldConfig config;
};

/// The full training loop: K updates of trajectories_per_update trajectories
/// of W interactions each, with shield-mediated action selection, the r - z
/// stored reward, and one policy update per iteration. A Failure step ends
/// the current episode (a fall) and the environment resets; in
/// kTerminateEpisode mode a recovery trigger ends the episode too.
std::vector<UpdateMetrics> run_training(const tasks::Environment& env,
                                        const ShieldSetup& shield_setup,
                                        const recovery::RecoveryController& rec,
                                        MlpPolicy& policy,
                                        const TrainConfig& config);

}  // namespace saferl::learner

#endif  // SAFERL_LEARNER_HPP
