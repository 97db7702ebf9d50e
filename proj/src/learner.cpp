#include "saferl/learner.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace saferl::learner {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

double atanh_clamped(double r) {
  const double c = std::clamp(r, -1.0 + 1e-12, 1.0 - 1e-12);
  return std::atanh(c);
}

}  // namespace

MlpPolicy::MlpPolicy(int action_dim, double action_bound, int hidden)
    : m_(action_dim), hidden_(hidden), bound_(action_bound) {
  if (m_ < 1 || hidden_ < 1)
    throw std::invalid_argument("MlpPolicy: bad dimensions");
  if (bound_ <= 0.0) throw std::invalid_argument("MlpPolicy: bound <= 0");
  W1_ = Mat::Zero(hidden_, state_dim());
  W2_ = Mat::Zero(hidden_, hidden_);
  W3_ = Mat::Zero(m_, hidden_);
  b1_ = Vec::Zero(hidden_);
  b2_ = Vec::Zero(hidden_);
  b3_ = Vec::Zero(m_);
  log_std_ = Vec::Constant(m_, -1.0);
}

MlpPolicy MlpPolicy::random_init(int action_dim, double action_bound, Rng& rng,
                                 int hidden, double output_scale) {
  MlpPolicy p(action_dim, action_bound, hidden);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(p.state_dim()));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  p.W1_ = s1 * rng.normal_matrix(hidden, p.state_dim());
  p.W2_ = s2 * rng.normal_matrix(hidden, hidden);
  p.W3_ = output_scale * s2 * rng.normal_matrix(action_dim, hidden);
  return p;
}

int MlpPolicy::param_count() const {
  return hidden_ * state_dim() + hidden_ + hidden_ * hidden_ + hidden_ +
         m_ * hidden_ + m_ + m_;
}

Vec MlpPolicy::params() const {
  Vec theta(param_count());
  Eigen::Index at = 0;
  auto put_mat = [&](const Mat& M) {
    theta.segment(at, M.size()) = Eigen::Map<const Vec>(M.data(), M.size());
    at += M.size();
  };
  auto put_vec = [&](const Vec& v) {
    theta.segment(at, v.size()) = v;
    at += v.size();
  };
  put_mat(W1_);
  put_vec(b1_);
  put_mat(W2_);
  put_vec(b2_);
  put_mat(W3_);
  put_vec(b3_);
  put_vec(log_std_);
  return theta;
}

void MlpPolicy::set_params(const Vec& theta) {
  if (theta.size() != param_count())
    throw std::invalid_argument("MlpPolicy::set_params: wrong length");
  Eigen::Index at = 0;
  auto take_mat = [&](Mat& M) {
    Eigen::Map<Vec>(M.data(), M.size()) = theta.segment(at, M.size());
    at += M.size();
  };
  auto take_vec = [&](Vec& v) {
    v = theta.segment(at, v.size());
    at += v.size();
  };
  take_mat(W1_);
  take_vec(b1_);
  take_mat(W2_);
  take_vec(b2_);
  take_mat(W3_);
  take_vec(b3_);
  take_vec(log_std_);
  clamp_log_std();
}

void MlpPolicy::clamp_log_std() {
  log_std_ = log_std_.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

MlpPolicy::Forward MlpPolicy::forward(const Vec12& s) const {
  Forward f;
  f.h1 = (W1_ * s + b1_).array().tanh();
  f.h2 = (W2_ * f.h1 + b2_).array().tanh();
  f.out = W3_ * f.h2 + b3_;
  return f;
}

ControlAction MlpPolicy::mean_action(const CdmState& s) const {
  const Forward f = forward(s.vector());
  return ControlAction(bound_ * f.out.array().tanh().matrix(), bound_);
}

ControlAction MlpPolicy::act(const CdmState& s, Rng& rng) const {
  const Forward f = forward(s.vector());
  Vec xi = f.out;
  for (int i = 0; i < m_; ++i)
    xi[i] += std::exp(log_std_[i]) * rng.normal();
  return ControlAction(bound_ * xi.array().tanh().matrix(), bound_);
}

Vec MlpPolicy::presquash(const ControlAction& a) const {
  if (a.dim() != m_)
    throw std::invalid_argument("MlpPolicy: action dimension mismatch");
  Vec xi(m_);
  for (int i = 0; i < m_; ++i) xi[i] = atanh_clamped(a[i] / bound_);
  return xi;
}

double MlpPolicy::log_prob(const CdmState& s, const ControlAction& a) const {
  const Forward f = forward(s.vector());
  const Vec xi = presquash(a);
  double lp = 0.0;
  for (int i = 0; i < m_; ++i) {
    const double sigma = std::exp(log_std_[i]);
    const double d = (xi[i] - f.out[i]) / sigma;
    lp += -log_std_[i] - kHalfLog2Pi - 0.5 * d * d;
  }
  return lp;
}

Vec MlpPolicy::log_prob_grad(const CdmState& s, const ControlAction& a) const {
  const Vec12 sv = s.vector();
  const Forward f = forward(sv);
  const Vec xi = presquash(a);

  // d logp / d out_i = (xi_i - out_i) / sigma_i^2
  Vec d_out(m_);
  Vec d_log_std(m_);
  for (int i = 0; i < m_; ++i) {
    const double sigma = std::exp(log_std_[i]);
    const double z = (xi[i] - f.out[i]) / sigma;
    d_out[i] = z / sigma;
    d_log_std[i] = z * z - 1.0;
  }

  const Mat dW3 = d_out * f.h2.transpose();
  const Vec d_a2 = (W3_.transpose() * d_out).array() *
                   (1.0 - f.h2.array().square());
  const Mat dW2 = d_a2 * f.h1.transpose();
  const Vec d_a1 = (W2_.transpose() * d_a2).array() *
                   (1.0 - f.h1.array().square());
  const Mat dW1 = d_a1 * sv.transpose();

  Vec grad(param_count());
  Eigen::Index at = 0;
  auto put_mat = [&](const Mat& M) {
    grad.segment(at, M.size()) = Eigen::Map<const Vec>(M.data(), M.size());
    at += M.size();
  };
  auto put_vec = [&](const Vec& v) {
    grad.segment(at, v.size()) = v;
    at += v.size();
  };
  put_mat(dW1);
  put_vec(d_a1);
  put_mat(dW2);
  put_vec(d_a2);
  put_mat(dW3);
  put_vec(d_out);
  put_vec(d_log_std);
  return grad;
}

nlohmann::json MlpPolicy::to_json() const {
  nlohmann::json j;
  j["action_dim"] = m_;
  j["hidden"] = hidden_;
  j["action_bound"] = bound_;
  const Vec theta = params();
  j["params"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  return j;
}

MlpPolicy MlpPolicy::from_json(const nlohmann::json& j) {
  MlpPolicy p(j.at("action_dim").get<int>(), j.at("action_bound").get<double>(),
              j.at("hidden").get<int>());
  const auto raw = j.at("params").get<std::vector<double>>();
  if (raw.size() != static_cast<std::size_t>(p.param_count()))
    throw std::invalid_argument("MlpPolicy::from_json: wrong parameter count");
  p.set_params(Eigen::Map<const Vec>(raw.data(), static_cast<Eigen::Index>(raw.size())));
  return p;
}

void TrainConfig::validate() const {
  if (learning_rate < 0.0) throw std::invalid_argument("TrainConfig: lr < 0");
  if (updates < 1 || steps_per_trajectory < 0 || trajectories_per_update < 1)
    throw std::invalid_argument("TrainConfig: non-positive counts");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("TrainConfig: gamma must be in (0,1)");
}

UpdateInfo policy_update(MlpPolicy& policy, const ReplayBuffer& buffer,
                         double gamma, double learning_rate) {
  if (buffer.empty()) throw std::invalid_argument("policy_update: empty buffer");

  // Discounted reward-to-go per episode, mean baseline across the batch.
  std::vector<std::vector<double>> returns;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& episode : buffer.episodes()) {
    std::vector<double> g(episode.size(), 0.0);
    double acc = 0.0;
    for (std::size_t t = episode.size(); t-- > 0;) {
      acc = episode[t].penalized_reward + gamma * acc;
      g[t] = acc;
      sum += acc;
    }
    count += episode.size();
    returns.push_back(std::move(g));
  }
  const double baseline = sum / static_cast<double>(count);

  Vec grad = Vec::Zero(policy.param_count());
  std::size_t ep_idx = 0;
  for (const auto& episode : buffer.episodes()) {
    const auto& g = returns[ep_idx++];
    for (std::size_t t = 0; t < episode.size(); ++t) {
      const double advantage = g[t] - baseline;
      if (advantage != 0.0) {
        grad += advantage * policy.log_prob_grad(episode[t].state,
                                                 episode[t].learner_action);
      }
    }
  }
  grad /= static_cast<double>(count);

  UpdateInfo info;
  info.grad_norm = grad.norm();
  info.baseline = baseline;
  info.steps = count;

  constexpr double kGradClip = 10.0;
  if (info.grad_norm > kGradClip) grad *= kGradClip / info.grad_norm;
  if (learning_rate != 0.0 && info.grad_norm > 0.0) {
    policy.set_params(policy.params() + learning_rate * grad);
  }
  return info;
}

std::vector<UpdateMetrics> run_training(const tasks::Environment& env,
                                        const ShieldSetup& shield_setup,
                                        const recovery::RecoveryController& rec,
                                        MlpPolicy& policy,
                                        const TrainConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const auto recovery_policy = rec.as_policy();
  const auto learner_mean = policy.mean_policy();
  const auto learner_act = [&policy, &rng](const CdmState& s) {
    return policy.act(s, rng);
  };

  std::vector<UpdateMetrics> all_metrics;
  all_metrics.reserve(static_cast<std::size_t>(config.updates));

  for (int k = 0; k < config.updates; ++k) {
    ReplayBuffer buffer;
    UpdateMetrics metrics;
    metrics.k = k;
    double episode_reward_sum = 0.0;
    double episode_jc_sum = 0.0;
    int episodes = 0;

    for (int traj = 0; traj < config.trajectories_per_update; ++traj) {
      CdmState s = env.reset(rng);
      shield::SwitchState sw = shield::SwitchState::initial();
      buffer.begin_episode();
      double raw_return = 0.0;
      std::vector<std::pair<double, double>> reward_cost;
      reward_cost.reserve(static_cast<std::size_t>(config.steps_per_trajectory));

      auto close_episode = [&]() {
        const auto jc = discounted_return(reward_cost, config.gamma).j_cost;
        episode_reward_sum += raw_return;
        episode_jc_sum += jc;
        ++episodes;
        raw_return = 0.0;
        reward_cost.clear();
      };

      for (int t = 0; t < config.steps_per_trajectory; ++t) {
        const auto sel = shield::select_action(
            sw, s, learner_act, learner_mean, recovery_policy,
            shield_setup.model, env.trigger_set(), shield_setup.config);
        const bool used_recovery = sel.source == PolicySource::kRecovery;
        if (used_recovery) {
          ++metrics.recovery_steps;
          if (sw.prev_source != PolicySource::kRecovery) ++metrics.trigger_events;
        }
        sw = sel.next;

        const auto result = env.step(s, sel.executed, rng);
        const double z_penalty = used_recovery ? 1.0 : 0.0;
        buffer.push(TransitionRecord{s, sel.learner_proposal,
                                     result.reward - z_penalty, sel.source,
                                     result.cost});
        raw_return += result.reward;
        reward_cost.emplace_back(result.reward, result.cost);
        ++metrics.steps;
        s = result.next;

        const bool fell =
            result.classification == shield::Classification::kFailure;
        if (fell) ++metrics.falls;
        const bool terminate =
            fell || (config.penalty_mode == PenaltyMode::kTerminateEpisode &&
                     used_recovery);
        if (terminate && t + 1 < config.steps_per_trajectory) {
          close_episode();
          s = env.reset(rng);
          sw = shield::SwitchState::initial();
          buffer.begin_episode();
        }
      }
      if (!reward_cost.empty()) close_episode();
    }

    metrics.recovery_fraction =
        metrics.steps > 0
            ? static_cast<double>(metrics.recovery_steps) / metrics.steps
            : 0.0;
    metrics.episodic_reward = episodes > 0 ? episode_reward_sum / episodes : 0.0;
    metrics.j_cost = episodes > 0 ? episode_jc_sum / episodes : 0.0;

    if (!buffer.empty() && config.learning_rate > 0.0) {
      policy_update(policy, buffer, config.gamma, config.learning_rate);
    }
    all_metrics.push_back(metrics);
  }
  return all_metrics;
}

}  // namespace saferl::learner
