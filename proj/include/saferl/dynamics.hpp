#ifndef SAFERL_DYNAMICS_HPP
#define SAFERL_DYNAMICS_HPP

#include <nlohmann/json_fwd.hpp>
#include <utility>
#include <vector>

#include "saferl/rng.hpp"
#include "saferl/statespace.hpp"

namespace saferl {

/// Discrete-time linear dynamics s' = A s + B a on an augmented state whose
/// last coordinate is the constant 1. The augmentation carries any affine
/// offset (gravity, equilibrium shift) in A's last column, so the map stays
/// strictly linear. The augmentation coordinate is excluded from state norms
/// and safety checks; its A row is [0...0, 1] and its B row is zero.
class LinearDynamics {
 public:
  /// A: n x n augmented matrix, B: n x m. Validates the augmentation row.
  LinearDynamics(Mat A, Mat B, double dt);

  /// Assemble from the de-augmented pieces. bias has length n-1 and lands in
  /// A's last column.
  static LinearDynamics from_parts(const Mat& A_core, const Mat& B_core,
                                   const Vec& bias, double dt);

  int n() const { return static_cast<int>(A_.rows()); }
  int m() const { return static_cast<int>(B_.cols()); }
  int state_dim() const { return n() - 1; }
  double dt() const { return dt_; }

  const Mat& A() const { return A_; }
  const Mat& B() const { return B_; }
  Mat A_core() const { return A_.topLeftCorner(state_dim(), state_dim()); }
  Mat B_core() const { return B_.topRows(state_dim()); }
  Vec affine_bias() const { return A_.topRightCorner(state_dim(), 1); }

  /// De-augmented step on plain vectors: returns the first n-1 components of
  /// A [s; 1] + B u.
  Vec step_vector(const Eigen::Ref<const Vec>& s,
                  const Eigen::Ref<const Vec>& u) const;

 private:
  Mat A_;
  Mat B_;
  double dt_;
};

/// Zero-mean Gaussian per-component process noise on the de-augmented state;
/// stands in for unmodeled effects of the true plant.
struct NoiseModel {
  Vec sigma;  // length state_dim, componentwise >= 0
  bool enabled = false;

  static NoiseModel disabled(int state_dim) {
    return NoiseModel{Vec::Zero(state_dim), false};
  }
  void validate(int state_dim) const;
};

/// Random perturbation magnitudes for building an approximate model, plus
/// the realized mismatch bound epsilon >= max(sigma1(A-Ahat), sigma1(B-Bhat)).
struct ModelError {
  double delta_A_scale = 0.0;
  double delta_B_scale = 0.0;
  double epsilon = 0.0;
};

/// Centroidal-dynamics model: forward-Euler double integrators per axis with
/// control entering the velocity rows scaled by 1/mass (translation) and
/// 1/inertia (rotation). n = 13 (12 CDM components + augmentation), m = 6.
/// The affine bias is zero: actions are deviations from the gravity-
/// compensating nominal input, so rest is an equilibrium.
LinearDynamics build_cdm(double mass_kg, const Eigen::Vector3d& inertia_diag,
                         double dt);

/// Same CDM with extra zero B columns appended (task channels that do not
/// drive the linear model, e.g. foot placements).
LinearDynamics build_cdm(double mass_kg, const Eigen::Vector3d& inertia_diag,
                         double dt, int extra_action_dims);

/// One dynamics step. Deterministic unless a noise model is supplied and
/// enabled.
CdmState step(const LinearDynamics& dyn, const CdmState& s,
              const ControlAction& a);
CdmState step(const LinearDynamics& dyn, const CdmState& s,
              const ControlAction& a, const NoiseModel& noise, Rng& rng);

/// States s_1..s_len visited by applying the action list in order. Always
/// noise-free: safety-check rollouts are deterministic predictions.
std::vector<CdmState> rollout(const LinearDynamics& dyn, const CdmState& s0,
                              std::span<const ControlAction> actions);

/// Ahat = A + dA, Bhat = B + dB with dA, dB random of exactly the requested
/// spectral scale. Augmentation row and affine column are untouched. Returns
/// the perturbed model and realized_eps = max(sigma1(dA), sigma1(dB)).
std::pair<LinearDynamics, double> perturb(const LinearDynamics& dyn,
                                          const ModelError& err, Rng& rng);

/// JSON document {n, m, dt, A (row-major), B (row-major), affine_bias}.
nlohmann::json dynamics_to_json(const LinearDynamics& dyn);
LinearDynamics dynamics_from_json(const nlohmann::json& j);

}  // namespace saferl

#endif  // SAFERL_DYNAMICS_HPP
