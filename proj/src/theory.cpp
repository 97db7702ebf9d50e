#include "saferl/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace saferl::theory {

void HolderParams::validate() const {
  if (G <= 0.0) throw std::invalid_argument("HolderParams: G <= 0");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("HolderParams: alpha must be in (0, 1]");
}

void LinSystem::validate() const {
  if (A.rows() != A.cols()) throw std::invalid_argument("LinSystem: A not square");
  if (B.rows() != A.rows()) throw std::invalid_argument("LinSystem: B rows != n");
}

double performance_bound(double cost_offline, const Mat& A, const Mat& A_hat,
                         const Mat& B, const Mat& B_hat,
                         const HolderParams& params, int W, double a_max,
                         const Vec& s1) {
  params.validate();
  if (A.rows() != A_hat.rows() || A.cols() != A_hat.cols() ||
      B.rows() != B_hat.rows() || B.cols() != B_hat.cols())
    throw std::invalid_argument("performance_bound: shape mismatch");
  if (W < 0) throw std::invalid_argument("performance_bound: W < 0");
  if (a_max < 0.0) throw std::invalid_argument("performance_bound: a_max < 0");

  const double s_dA = spectral_norm(A - A_hat);
  const double s_dB = spectral_norm(B - B_hat);
  const double alpha = params.alpha;
  const double inner = std::pow(s_dB, alpha) * std::pow(a_max, alpha) *
                           (2.0 / (alpha + 2.0)) +
                       std::pow(s1.norm(), alpha);
  return cost_offline + std::pow(2.0, 0.5 * alpha + 1.0) * params.G * W *
                            std::pow(s_dA, alpha) * inner;
}

Vec boxed_least_squares(const Mat& B, const Vec& target, double bound) {
  if (B.rows() != target.size())
    throw std::invalid_argument("boxed_least_squares: shape mismatch");
  if (bound <= 0.0) throw std::invalid_argument("boxed_least_squares: bound <= 0");
  const Eigen::Index m = B.cols();
  if (m == 0) return Vec(0);

  // Minimum-norm least squares, clipped into the box.
  Vec a = B.completeOrthogonalDecomposition().solve(target);
  a = a.cwiseMax(-bound).cwiseMin(bound);

  // Exact cyclic coordinate descent on ||B a - target||^2; each coordinate
  // update is the clamped 1-d minimizer, so the sweep limit is only a guard.
  const Vec col_sq = B.colwise().squaredNorm();
  Vec residual = B * a - target;
  const int max_sweeps = 200;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (col_sq[j] <= 0.0) continue;  // dead column keeps min-norm value
      const double step = B.col(j).dot(residual) / col_sq[j];
      const double next = std::clamp(a[j] - step, -bound, bound);
      const double change = next - a[j];
      if (change != 0.0) {
        residual += change * B.col(j);
        a[j] = next;
        max_change = std::max(max_change, std::abs(change));
      }
    }
    if (max_change < 1e-13) break;
  }
  return a;
}

TrackingResult tracking_oracle(const LinSystem& plan, const LinSystem& truth,
                               const Vec& s1, const std::vector<Vec>& targets,
                               double action_bound) {
  plan.validate();
  truth.validate();
  if (plan.n() != truth.n() || plan.m() != truth.m())
    throw std::invalid_argument("tracking_oracle: plan/truth shape mismatch");
  if (s1.size() != truth.n())
    throw std::invalid_argument("tracking_oracle: s1 dimension mismatch");

  TrackingResult out;
  out.states.reserve(targets.size() + 1);
  out.actions.reserve(targets.size());
  Vec x = s1;
  out.states.push_back(x);
  for (const Vec& y_next : targets) {
    if (y_next.size() != truth.n())
      throw std::invalid_argument("tracking_oracle: target dimension mismatch");
    const Vec a =
        boxed_least_squares(plan.B, y_next - plan.A * x, action_bound);
    x = truth.A * x + truth.B * a;
    out.cost += (x - y_next).norm();
    out.actions.push_back(a);
    out.states.push_back(x);
  }
  return out;
}

namespace {

double max_action_norm(const TrackingResult& r) {
  double a_max = 0.0;
  for (const Vec& a : r.actions) a_max = std::max(a_max, a.norm());
  return a_max;
}

RegretReport make_report(const LinSystem& T, const LinSystem& T_hat,
                         const Vec& s1, const TrackingResult& online,
                         const TrackingResult& offline) {
  RegretReport rep;
  rep.cost_online = online.cost;
  rep.cost_offline = offline.cost;
  rep.sigma1_dA = spectral_norm(T.A - T_hat.A);
  rep.sigma1_dB = spectral_norm(T.B - T_hat.B);
  rep.a_max = std::max(max_action_norm(online), max_action_norm(offline));
  rep.s1_norm = s1.norm();
  rep.W = static_cast<int>(online.actions.size());
  rep.G = std::max(spectral_norm(T.B), spectral_norm(T_hat.B));
  rep.alpha = 1.0;
  rep.bound_value =
      performance_bound(offline.cost, T.A, T_hat.A, T.B, T_hat.B,
                        HolderParams{rep.G, rep.alpha}, rep.W, rep.a_max, s1);
  rep.bound_violated = rep.cost_online > rep.bound_value;
  return rep;
}

}  // namespace

RegretReport regret_experiment(const LinSystem& T, const LinSystem& T_hat,
                               const Vec& s1, const std::vector<Vec>& targets,
                               double action_bound) {
  const TrackingResult offline = tracking_oracle(T, T, s1, targets, action_bound);
  const TrackingResult online =
      tracking_oracle(T_hat, T, s1, targets, action_bound);
  return make_report(T, T_hat, s1, online, offline);
}

RegretReport regret_experiment_shielded(const LinSystem& T,
                                        const LinSystem& T_hat, const Vec& s1,
                                        const std::vector<Vec>& targets,
                                        double action_bound,
                                        const ShieldedTrackingConfig& cfg) {
  if (T.n() != CdmState::kDim || cfg.recovery == nullptr)
    throw std::invalid_argument(
        "regret_experiment_shielded: needs a CDM-shaped system and a recovery "
        "controller");
  const TrackingResult offline = tracking_oracle(T, T, s1, targets, action_bound);

  // Online pass with the switching controller wrapped around the tracker.
  TrackingResult online;
  Vec x = s1;
  online.states.push_back(x);
  shield::SwitchState sw = shield::SwitchState::initial();
  for (const Vec& y_next : targets) {
    const auto tracker = [&](const CdmState&) {
      return ControlAction(
          boxed_least_squares(T_hat.B, y_next - T_hat.A * x, action_bound),
          action_bound);
    };
    const auto sel = shield::select_action(
        sw, CdmState::from_vector(x), tracker, tracker,
        cfg.recovery->as_policy(), cfg.model, cfg.set, cfg.shield);
    sw = sel.next;
    x = T.A * x + T.B * sel.executed.values();
    online.cost += (x - y_next).norm();
    online.actions.push_back(sel.executed.values());
    online.states.push_back(x);
  }
  return make_report(T, T_hat, s1, online, offline);
}

RandomTrackingProblem random_tracking_problem(const RandomSystemConfig& cfg,
                                              Rng& rng) {
  const int n = rng.uniform_int(cfg.min_state_dim, cfg.max_state_dim);
  const int m = rng.uniform_int(cfg.min_action_dim, cfg.max_action_dim);
  const int W = rng.uniform_int(cfg.min_horizon, cfg.max_horizon);

  auto scaled_to = [&](Mat M, double sigma) {
    const double s = spectral_norm(M);
    if (s > 0.0) M *= sigma / s;
    return M;
  };

  RandomTrackingProblem prob;
  prob.truth.A = scaled_to(rng.normal_matrix(n, n),
                           rng.uniform(cfg.a_sigma_min, cfg.a_sigma_max));
  prob.truth.B = scaled_to(rng.normal_matrix(n, m),
                           rng.uniform(cfg.b_sigma_min, cfg.b_sigma_max));

  // Model error: dB subordinate to dA so the bound's error terms dominate
  // the realized mismatch.
  const double eps_a = rng.uniform(0.0, cfg.error_scale_max);
  const double eps_b = eps_a * rng.uniform(0.0, 1.0);
  prob.approx.A = prob.truth.A + scaled_to(rng.normal_matrix(n, n), eps_a);
  prob.approx.B = prob.truth.B + scaled_to(rng.normal_matrix(n, m), eps_b);

  Vec s1 = rng.normal_vector(n);
  s1 *= rng.uniform(cfg.s1_norm_min, cfg.s1_norm_max) / s1.norm();
  prob.s1 = s1;
  prob.action_bound = cfg.action_bound;

  // Feasible reference: roll the true system under small reference actions,
  // so the offline algorithm can track exactly.
  Vec y = s1;
  prob.targets.reserve(static_cast<std::size_t>(W));
  for (int t = 0; t < W; ++t) {
    const Vec u = cfg.target_action_frac * cfg.action_bound *
                  rng.uniform_vector(m, -1.0, 1.0);
    y = prob.truth.A * y + prob.truth.B * u;
    prob.targets.push_back(y);
  }
  return prob;
}

BatchResult regret_batch(const RandomSystemConfig& cfg, int count,
                         std::uint64_t seed) {
  BatchResult out;
  out.reports.reserve(static_cast<std::size_t>(count));
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const RandomTrackingProblem prob = random_tracking_problem(cfg, rng);
    const RegretReport rep = regret_experiment(
        prob.truth, prob.approx, prob.s1, prob.targets, prob.action_bound);
    if (rep.bound_violated) ++out.violations;
    out.reports.push_back(rep);
  }
  return out;
}

}  // namespace saferl::theory
