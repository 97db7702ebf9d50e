#ifndef SAFERL_STATESPACE_HPP
#define SAFERL_STATESPACE_HPP

#include <cstddef>
#include <deque>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "saferl/linalg.hpp"

namespace saferl {

using Vec12 = Eigen::Matrix<double, 12, 1>;

/// Centroidal robot state. Component order is fixed and is the one used by
/// every vector view, serialization and dynamics matrix in the project:
/// [x, y, z, xdot, ydot, zdot, roll, pitch, yaw, rolldot, pitchdot, yawdot].
struct CdmState {
  double x = 0, y = 0, z = 0;
  double xdot = 0, ydot = 0, zdot = 0;
  double roll = 0, pitch = 0, yaw = 0;
  double rolldot = 0, pitchdot = 0, yawdot = 0;

  static constexpr int kDim = 12;

  Vec12 vector() const {
    Vec12 v;
    v << x, y, z, xdot, ydot, zdot, roll, pitch, yaw, rolldot, pitchdot,
        yawdot;
    return v;
  }

  static CdmState from_vector(const Eigen::Ref<const Vec12>& v) {
    CdmState s;
    s.x = v[0];
    s.y = v[1];
    s.z = v[2];
    s.xdot = v[3];
    s.ydot = v[4];
    s.zdot = v[5];
    s.roll = v[6];
    s.pitch = v[7];
    s.yaw = v[8];
    s.rolldot = v[9];
    s.pitchdot = v[10];
    s.yawdot = v[11];
    return s;
  }

  bool is_finite() const { return vector().allFinite(); }
};

/// Bounded control vector. Construction clips every component into
/// [-bound, bound], so the box invariant holds by construction.
class ControlAction {
 public:
  ControlAction(Vec u, double bound) : u_(std::move(u)), bound_(bound) {
    if (bound_ <= 0.0) throw std::invalid_argument("ControlAction: bound <= 0");
    u_ = u_.cwiseMax(-bound_).cwiseMin(bound_);
  }

  static ControlAction zero(int dim, double bound) {
    return ControlAction(Vec::Zero(dim), bound);
  }

  const Vec& values() const { return u_; }
  double operator[](Eigen::Index i) const { return u_[i]; }
  int dim() const { return static_cast<int>(u_.size()); }
  double bound() const { return bound_; }
  double norm() const { return u_.norm(); }

  /// diam(A) for the box: 2 * bound * sqrt(m).
  static double set_diameter(double bound, int m) {
    return 2.0 * bound * std::sqrt(static_cast<double>(m));
  }

 private:
  Vec u_;
  double bound_;
};

enum class PolicySource { kLearner, kRecovery };

inline const char* to_string(PolicySource s) {
  return s == PolicySource::kLearner ? "learner" : "recovery";
}

/// One stored interaction. The action is always the learner's proposal, even
/// on steps where the recovery policy acted; penalized_reward is r - z with
/// z = 1 on recovery steps and 0 otherwise.
struct TransitionRecord {
  CdmState state;
  ControlAction learner_action;
  double penalized_reward = 0.0;
  PolicySource policy_tag = PolicySource::kLearner;
  double cost = 0.0;
};

/// Episode-structured trajectory store. Single writer; iteration order is
/// insertion order and episode boundaries are preserved. When capacity is
/// exceeded whole oldest episodes are dropped.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1u << 20) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity 0");
  }

  void begin_episode() {
    if (episodes_.empty() || !episodes_.back().empty()) {
      episodes_.emplace_back();
    }
  }

  void push(TransitionRecord rec) {
    if (episodes_.empty()) episodes_.emplace_back();
    episodes_.back().push_back(std::move(rec));
    ++size_;
    while (size_ > capacity_ && episodes_.size() > 1) {
      size_ -= episodes_.front().size();
      episodes_.pop_front();
    }
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::size_t num_episodes() const {
    return episodes_.size() -
           ((!episodes_.empty() && episodes_.back().empty()) ? 1 : 0);
  }

  const std::deque<std::vector<TransitionRecord>>& episodes() const {
    return episodes_;
  }

  void clear() {
    episodes_.clear();
    size_ = 0;
  }

 private:
  std::deque<std::vector<TransitionRecord>> episodes_;
  std::size_t capacity_;
  std::size_t size_ = 0;
};

/// CMDP problem parameters: discount, cost budget h, episode length W and
/// number of policy updates K.
struct CmdpSpec {
  double gamma = 0.99;
  double cost_threshold = 1.0;
  int episode_length = 200;
  int num_updates = 30;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0))
      throw std::invalid_argument("CmdpSpec: gamma must be in (0,1)");
    if (cost_threshold < 0.0)
      throw std::invalid_argument("CmdpSpec: cost_threshold < 0");
    if (episode_length < 1)
      throw std::invalid_argument("CmdpSpec: episode_length < 1");
    if (num_updates < 1) throw std::invalid_argument("CmdpSpec: num_updates < 1");
  }
};

struct DiscountedReturn {
  double j_reward = 0.0;
  double j_cost = 0.0;
};

/// J_R = sum_t gamma^t r_t and J_C = sum_t gamma^t c_t over one trajectory,
/// t starting at 0. Empty trajectories return zeros.
DiscountedReturn discounted_return(
    std::span<const std::pair<double, double>> reward_cost, double gamma);

/// Trajectory CSV: one row per step with the 12 state fields, the m action
/// fields, reward, cost and policy tag. Header included.
void write_trajectory_csv(std::ostream& os,
                          std::span<const TransitionRecord> trajectory);

}  // namespace saferl

#endif  // SAFERL_STATESPACE_HPP
