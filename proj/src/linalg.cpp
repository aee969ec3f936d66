#include "spca/linalg.hpp"

namespace spca {

double curvature_gap(const SymMatrix& sigma, const UnitVector& theta1, double lambda1, double lambda2,
                     const UnitVector& theta) {
  if (sigma.dim() != theta1.dim() || sigma.dim() != theta.dim()) {
    throw DimensionMismatch("curvature_gap: dimension mismatch");
  }
  const Eigen::VectorXd& t1 = theta1.coords();
  const Eigen::VectorXd& t = theta.coords();
  const double residual = (sigma.matrix() * t1 - lambda1 * t1).norm();
  if (residual > 1e-8) {
    throw PreconditionError("curvature_gap: theta1 is not an eigenvector of sigma (residual " +
                            std::to_string(residual) + ")");
  }
  const double inner = t1.dot(sigma.matrix() * t1) - t.dot(sigma.matrix() * t);
  const double loss = projection_loss(theta, theta1);
  return inner - 0.5 * (lambda1 - lambda2) * loss * loss;
}

}  // namespace spca
