#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <vector>

#include "mgc/liegroup.hpp"

// Spatial inertia of a rigid body, its image on the manifold of symmetric
// positive definite 4x4 matrices, the affine-invariant metric and log-det
// Bregman divergence on that manifold, the symmetric regressor that turns
// inertial power terms into a trace pairing, and the drift-free adaptation
// step that integrates the estimate flow without leaving the manifold.

namespace mgc {

/// Body-frame spatial inertia: mass, first moment h = m * com, and the
/// rotational inertia about the body-frame origin.
struct SpatialInertia {
  double mass = 0.0;
  Vec3 first_moment = Vec3::Zero();
  Mat3 rotational_inertia = Mat3::Zero();

  /// 6x6 form [[I_A, hat3(h)], [hat3(h)^T, m*I]], acting on (angular; linear).
  Mat6 matrix() const {
    Mat6 M = Mat6::Zero();
    const Mat3 H = hat3(first_moment);
    M.topLeftCorner<3, 3>() = rotational_inertia;
    M.topRightCorner<3, 3>() = H;
    M.bottomLeftCorner<3, 3>() = H.transpose();
    M.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
    return M;
  }

  /// Builds from center-of-mass parameters; the rotational inertia is
  /// translated to the body-frame origin.
  static SpatialInertia from_com(double mass, const Vec3& com, const Mat3& inertia_about_com) {
    const Mat3 C = hat3(com);
    return {mass, mass * com, inertia_about_com - mass * C * C};
  }

  Vec3 com() const { return first_moment / mass; }
};

/// Point on the SPD manifold encoding (mass, first moment, rotational
/// inertia): [[Sigma, h], [h^T, m]] with Sigma = trace(I_A)/2 * I - I_A.
/// Positive definiteness is exactly physical consistency of the parameters.
class PseudoInertia {
 public:
  /// Validates symmetry (to 1e-12, relative) and positive definiteness.
  explicit PseudoInertia(const Mat4& L) {
    const double scale = std::max(1.0, L.cwiseAbs().maxCoeff());
    if ((L - L.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw ValidationError("PseudoInertia: matrix is not symmetric");
    L_ = 0.5 * (L + L.transpose());
    Eigen::SelfAdjointEigenSolver<Mat4> es(L_, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0))
      throw ValidationError("PseudoInertia: matrix is not positive definite");
  }

  const Mat4& matrix() const { return L_; }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Mat4> es(L_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  Mat4 L_;
};

/// Linear extension of the pseudo-inertia -> spatial-inertia map to all
/// symmetric 4x4 matrices (no definiteness requirements).
inline Mat6 spatial_matrix_from_sym4(const Mat4& E) {
  const Mat3 sigma = E.topLeftCorner<3, 3>();
  const Vec3 h = E.topRightCorner<3, 1>();
  const double m = E(3, 3);
  Mat6 M = Mat6::Zero();
  const Mat3 H = hat3(h);
  M.topLeftCorner<3, 3>() = sigma.trace() * Mat3::Identity() - sigma;
  M.topRightCorner<3, 3>() = H;
  M.bottomLeftCorner<3, 3>() = H.transpose();
  M.bottomRightCorner<3, 3>() = m * Mat3::Identity();
  return M;
}

inline PseudoInertia to_pseudo(const SpatialInertia& M) {
  if (!(M.mass > 0.0)) throw ValidationError("to_pseudo: mass must be positive");
  Mat4 L = Mat4::Zero();
  const Mat3& I_A = M.rotational_inertia;
  L.topLeftCorner<3, 3>() = 0.5 * I_A.trace() * Mat3::Identity() - I_A;
  L.topRightCorner<3, 1>() = M.first_moment;
  L.bottomLeftCorner<1, 3>() = M.first_moment.transpose();
  L(3, 3) = M.mass;
  try {
    return PseudoInertia(L);
  } catch (const ValidationError&) {
    throw ValidationError("to_pseudo: spatial inertia is not physically consistent (pseudo-inertia not SPD)");
  }
}

inline SpatialInertia from_pseudo(const PseudoInertia& L) {
  const Mat4& P = L.matrix();
  const Mat3 sigma = P.topLeftCorner<3, 3>();
  return {P(3, 3), P.topRightCorner<3, 1>(),
          sigma.trace() * Mat3::Identity() - sigma};
}

/// Whether the parameters map to an SPD pseudo-inertia.
inline bool is_physically_consistent(const SpatialInertia& M) {
  if (!(M.mass > 0.0)) return false;
  try {
    to_pseudo(M);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

/// Affine-invariant Riemannian metric on the SPD manifold:
/// <X, Y>_L = trace(L^-1 X L^-1 Y) / 2.
inline double metric_inner(const PseudoInertia& L, const Mat4& X, const Mat4& Y) {
  Eigen::LLT<Mat4> llt(L.matrix());
  const Mat4 A = llt.solve(X);
  const Mat4 B = llt.solve(Y);
  return 0.5 * (A * B).trace();
}

inline double metric_norm_sq(const PseudoInertia& L, const Mat4& X) {
  return metric_inner(L, X, X);
}

namespace detail {
inline double logdet_spd(const Mat4& L) {
  Eigen::LLT<Mat4> llt(L);
  return 2.0 * Mat4(llt.matrixL()).diagonal().array().log().sum();
}
}  // namespace detail

/// Log-det Bregman divergence, scaled by the adaptation gain:
/// gamma * (log(|Lhat|/|L|) + trace(Lhat^-1 L) - 4).
/// Equals gamma * sum_j(-log l_j + l_j - 1) over the eigenvalues l_j of
/// Lhat^-1 L; nonnegative, zero iff L = Lhat.
inline double bregman_divergence(const PseudoInertia& L, const PseudoInertia& Lhat,
                                 double gamma = 1.0) {
  Eigen::LLT<Mat4> llt(Lhat.matrix());
  const double tr = llt.solve(L.matrix()).trace();
  return gamma * (detail::logdet_spd(Lhat.matrix()) - detail::logdet_spd(L.matrix()) + tr - 4.0);
}

/// Eigenvalues of den^-1 * num (all positive), ascending.
inline Vec4 relative_eigenvalues(const PseudoInertia& num, const PseudoInertia& den) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat4> es(num.matrix(), den.matrix(),
                                                    Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  return es.eigenvalues();
}

/// Geodesic distance of the affine-invariant metric:
/// || log(L^-1/2 Lhat L^-1/2) ||_F = sqrt(sum_j log^2 l_j).
inline double geodesic_distance(const PseudoInertia& L, const PseudoInertia& Lhat) {
  const Vec4 lam = relative_eigenvalues(Lhat, L);
  return std::sqrt(lam.array().log().square().sum());
}

/// Unique symmetric 4x4 matrix R with
///   v_err . (M a_ref - coad(v_body, M v_ref)) = trace(L R)
/// for every symmetric L with M = spatial_matrix_from_sym4(L).  Built by
/// evaluating the left side on the canonical symmetric basis.
using SymmetricRegressor = Mat4;

inline SymmetricRegressor regressor(const Twist& v_err, const Twist& v_ref, const Twist& a_ref,
                                    const Twist& v_body) {
  const auto value = [&](const Mat4& E) {
    const Mat6 M = spatial_matrix_from_sym4(E);
    return v_err.dot(M * a_ref - coad(v_body, M * v_ref));
  };
  Mat4 out = Mat4::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      Mat4 E = Mat4::Zero();
      E(i, j) = 1.0;
      E(j, i) = 1.0;
      const double s = value(E);
      if (i == j) {
        out(i, i) = s;
      } else {
        // trace(E_ij L) picks up the (i,j) entry twice
        out(i, j) = 0.5 * s;
        out(j, i) = 0.5 * s;
      }
    }
  }
  return out;
}

/// Adaptation parameters: one global gain for the whole chain, a leakage
/// gain, and the per-body nominal estimates the leakage pulls toward.
struct AdaptationConfig {
  double gamma = 8.0e4;
  double sigma = 0.1;
  std::vector<PseudoInertia> nominal;
};

namespace detail {
inline Mat4 expm_sym4(const Mat4& S) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(S);
  return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}
}  // namespace detail

/// One integration step of the estimate flow
///   Lhat_dot = (1/gamma) Lhat R Lhat - sigma (Lhat - L0).
/// The Euler increment is retracted through the Cholesky-factored
/// exponential Lhat+ = G expm(G^-1 (dt Lhat_dot) G^-T) G^T with Lhat = G G^T,
/// which is first-order consistent with the raw Euler step and SPD for any
/// step size.
inline PseudoInertia adapt_step(const PseudoInertia& Lhat, const SymmetricRegressor& reg,
                                const AdaptationConfig& cfg, size_t body, double dt) {
  if (!(dt > 0.0)) throw ValidationError("adapt_step: dt must be positive");
  if (body >= cfg.nominal.size()) throw ValidationError("adapt_step: body index out of range");
  const Mat4& L = Lhat.matrix();
  Mat4 flow = (1.0 / cfg.gamma) * L * reg * L - cfg.sigma * (L - cfg.nominal[body].matrix());
  flow = 0.5 * (flow + flow.transpose());

  Eigen::LLT<Mat4> llt(L);
  const Mat4 G = llt.matrixL();
  Mat4 S = G.triangularView<Eigen::Lower>().solve(Mat4(dt * flow));
  S = G.triangularView<Eigen::Lower>().solve(Mat4(S.transpose())).transpose();
  S = 0.5 * (S + S.transpose());
  const Mat4 next = G * detail::expm_sym4(S) * G.transpose();
  return PseudoInertia(0.5 * (next + next.transpose()));
}

}  // namespace mgc
