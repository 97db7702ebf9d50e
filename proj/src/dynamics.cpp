#include "saferl/dynamics.hpp"

#include <nlohmann/json.hpp>
#include <stdexcept>

namespace saferl {

LinearDynamics::LinearDynamics(Mat A, Mat B, double dt)
    : A_(std::move(A)), B_(std::move(B)), dt_(dt) {
  const Eigen::Index n = A_.rows();
  if (n < 2 || A_.cols() != n)
    throw std::invalid_argument("LinearDynamics: A must be square, n >= 2");
  if (B_.rows() != n)
    throw std::invalid_argument("LinearDynamics: B row count != n");
  if (dt_ <= 0.0) throw std::invalid_argument("LinearDynamics: dt <= 0");
  // Augmentation row of A is [0...0, 1]; B's augmentation row is zero.
  if (A_.row(n - 1).head(n - 1).cwiseAbs().maxCoeff() != 0.0 ||
      A_(n - 1, n - 1) != 1.0 ||
      (B_.cols() > 0 && B_.row(n - 1).cwiseAbs().maxCoeff() != 0.0)) {
    throw std::invalid_argument("LinearDynamics: bad augmentation row");
  }
}

LinearDynamics LinearDynamics::from_parts(const Mat& A_core, const Mat& B_core,
                                          const Vec& bias, double dt) {
  const Eigen::Index d = A_core.rows();
  if (A_core.cols() != d || B_core.rows() != d || bias.size() != d)
    throw std::invalid_argument("LinearDynamics::from_parts: dimension mismatch");
  Mat A = Mat::Zero(d + 1, d + 1);
  A.topLeftCorner(d, d) = A_core;
  A.topRightCorner(d, 1) = bias;
  A(d, d) = 1.0;
  Mat B = Mat::Zero(d + 1, B_core.cols());
  B.topRows(d) = B_core;
  return LinearDynamics(std::move(A), std::move(B), dt);
}

Vec LinearDynamics::step_vector(const Eigen::Ref<const Vec>& s,
                                const Eigen::Ref<const Vec>& u) const {
  if (s.size() != state_dim() || u.size() != m())
    throw std::invalid_argument("LinearDynamics::step_vector: dimension mismatch");
  Vec s_aug(n());
  s_aug << s, 1.0;
  const Vec next = A_ * s_aug + B_ * u;
  return next.head(state_dim());
}

void NoiseModel::validate(int state_dim) const {
  if (sigma.size() != state_dim)
    throw std::invalid_argument("NoiseModel: sigma length != state dim");
  if (sigma.minCoeff() < 0.0)
    throw std::invalid_argument("NoiseModel: negative sigma");
}

namespace {

constexpr int kCdmDim = 12;

// State component indices in the fixed ordering.
enum : int { kX, kY, kZ, kXd, kYd, kZd, kRoll, kPitch, kYaw, kRd, kPd, kYd2 };

}  // namespace

LinearDynamics build_cdm(double mass_kg, const Eigen::Vector3d& inertia_diag,
                         double dt) {
  return build_cdm(mass_kg, inertia_diag, dt, 0);
}

LinearDynamics build_cdm(double mass_kg, const Eigen::Vector3d& inertia_diag,
                         double dt, int extra_action_dims) {
  if (mass_kg <= 0.0) throw std::invalid_argument("build_cdm: mass <= 0");
  if (inertia_diag.minCoeff() <= 0.0)
    throw std::invalid_argument("build_cdm: inertia component <= 0");
  if (dt <= 0.0) throw std::invalid_argument("build_cdm: dt <= 0");
  if (extra_action_dims < 0)
    throw std::invalid_argument("build_cdm: extra_action_dims < 0");

  Mat A = Mat::Identity(kCdmDim, kCdmDim);
  A(kX, kXd) = dt;
  A(kY, kYd) = dt;
  A(kZ, kZd) = dt;
  A(kRoll, kRd) = dt;
  A(kPitch, kPd) = dt;
  A(kYaw, kYd2) = dt;

  Mat B = Mat::Zero(kCdmDim, 6 + extra_action_dims);
  B(kXd, 0) = dt / mass_kg;
  B(kYd, 1) = dt / mass_kg;
  B(kZd, 2) = dt / mass_kg;
  B(kRd, 3) = dt / inertia_diag[0];
  B(kPd, 4) = dt / inertia_diag[1];
  B(kYd2, 5) = dt / inertia_diag[2];

  return LinearDynamics::from_parts(A, B, Vec::Zero(kCdmDim), dt);
}

CdmState step(const LinearDynamics& dyn, const CdmState& s,
              const ControlAction& a) {
  if (dyn.state_dim() != CdmState::kDim)
    throw std::invalid_argument("step: dynamics are not CDM-shaped");
  return CdmState::from_vector(dyn.step_vector(s.vector(), a.values()));
}

CdmState step(const LinearDynamics& dyn, const CdmState& s,
              const ControlAction& a, const NoiseModel& noise, Rng& rng) {
  CdmState next = step(dyn, s, a);
  if (noise.enabled) {
    noise.validate(dyn.state_dim());
    Vec12 v = next.vector();
    for (int i = 0; i < CdmState::kDim; ++i) {
      if (noise.sigma[i] > 0.0) v[i] += noise.sigma[i] * rng.normal();
    }
    next = CdmState::from_vector(v);
  }
  return next;
}

std::vector<CdmState> rollout(const LinearDynamics& dyn, const CdmState& s0,
                              std::span<const ControlAction> actions) {
  std::vector<CdmState> states;
  states.reserve(actions.size());
  CdmState s = s0;
  for (const ControlAction& a : actions) {
    s = step(dyn, s, a);
    states.push_back(s);
  }
  return states;
}

std::pair<LinearDynamics, double> perturb(const LinearDynamics& dyn,
                                          const ModelError& err, Rng& rng) {
  if (err.delta_A_scale < 0.0 || err.delta_B_scale < 0.0)
    throw std::invalid_argument("perturb: negative scale");
  const int d = dyn.state_dim();
  const int m = dyn.m();

  Mat A = dyn.A();
  Mat B = dyn.B();
  double eps_A = 0.0, eps_B = 0.0;

  if (err.delta_A_scale > 0.0) {
    Mat dA = rng.normal_matrix(d, d);
    dA *= err.delta_A_scale / spectral_norm(dA);
    A.topLeftCorner(d, d) += dA;
    eps_A = spectral_norm(dA);
  }
  if (err.delta_B_scale > 0.0 && m > 0) {
    Mat dB = rng.normal_matrix(d, m);
    dB *= err.delta_B_scale / spectral_norm(dB);
    B.topRows(d) += dB;
    eps_B = spectral_norm(dB);
  }
  return {LinearDynamics(std::move(A), std::move(B), dyn.dt()),
          std::max(eps_A, eps_B)};
}

nlohmann::json dynamics_to_json(const LinearDynamics& dyn) {
  nlohmann::json j;
  j["n"] = dyn.n();
  j["m"] = dyn.m();
  j["dt"] = dyn.dt();
  std::vector<double> a, b;
  a.reserve(static_cast<std::size_t>(dyn.n()) * dyn.n());
  for (int r = 0; r < dyn.n(); ++r)
    for (int c = 0; c < dyn.n(); ++c) a.push_back(dyn.A()(r, c));
  b.reserve(static_cast<std::size_t>(dyn.n()) * dyn.m());
  for (int r = 0; r < dyn.n(); ++r)
    for (int c = 0; c < dyn.m(); ++c) b.push_back(dyn.B()(r, c));
  j["A"] = a;
  j["B"] = b;
  std::vector<double> bias(static_cast<std::size_t>(dyn.n()), 0.0);
  const Vec ab = dyn.affine_bias();
  for (int i = 0; i < dyn.state_dim(); ++i) bias[static_cast<std::size_t>(i)] = ab[i];
  j["affine_bias"] = bias;
  return j;
}

LinearDynamics dynamics_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  const int m = j.at("m").get<int>();
  const double dt = j.at("dt").get<double>();
  const auto a = j.at("A").get<std::vector<double>>();
  const auto b = j.at("B").get<std::vector<double>>();
  if (a.size() != static_cast<std::size_t>(n) * n ||
      b.size() != static_cast<std::size_t>(n) * m)
    throw std::invalid_argument("dynamics_from_json: array size mismatch");
  Mat A(n, n), B(n, m);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) A(r, c) = a[static_cast<std::size_t>(r) * n + c];
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < m; ++c) B(r, c) = b[static_cast<std::size_t>(r) * m + c];
  LinearDynamics dyn(std::move(A), std::move(B), dt);
  if (j.contains("affine_bias")) {
    const auto bias = j.at("affine_bias").get<std::vector<double>>();
    if (bias.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("dynamics_from_json: affine_bias length");
    for (int i = 0; i < n - 1; ++i) {
      if (bias[static_cast<std::size_t>(i)] != dyn.affine_bias()[i])
        throw std::invalid_argument(
            "dynamics_from_json: affine_bias disagrees with A's last column");
    }
  }
  return dyn;
}

}  // namespace saferl
