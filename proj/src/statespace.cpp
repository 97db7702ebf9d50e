#include "saferl/statespace.hpp"

#include <cstdio>
#include <stdexcept>

namespace saferl {

DiscountedReturn discounted_return(
    std::span<const std::pair<double, double>> reward_cost, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("discounted_return: gamma must be in (0,1)");
  DiscountedReturn out;
  double discount = 1.0;
  for (const auto& [r, c] : reward_cost) {
    if (!std::isfinite(r) || !std::isfinite(c))
      throw std::invalid_argument("discounted_return: non-finite entry");
    out.j_reward += discount * r;
    out.j_cost += discount * c;
    discount *= gamma;
  }
  return out;
}

namespace {

void put_double(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& os,
                          std::span<const TransitionRecord> trajectory) {
  static const char* kStateNames[] = {"x",    "y",       "z",        "xdot",
                                      "ydot", "zdot",    "roll",     "pitch",
                                      "yaw",  "rolldot", "pitchdot", "yawdot"};
  const int m = trajectory.empty() ? 0 : trajectory.front().learner_action.dim();
  for (int i = 0; i < CdmState::kDim; ++i) {
    if (i) os << ',';
    os << kStateNames[i];
  }
  for (int j = 0; j < m; ++j) os << ",u" << j;
  os << ",reward,cost,policy_tag\n";
  for (const TransitionRecord& rec : trajectory) {
    const Vec12 s = rec.state.vector();
    for (int i = 0; i < CdmState::kDim; ++i) {
      if (i) os << ',';
      put_double(os, s[i]);
    }
    for (int j = 0; j < rec.learner_action.dim(); ++j) {
      os << ',';
      put_double(os, rec.learner_action[j]);
    }
    os << ',';
    put_double(os, rec.penalized_reward);
    os << ',';
    put_double(os, rec.cost);
    os << ',' << to_string(rec.policy_tag) << '\n';
  }
}

}  // namespace saferl
