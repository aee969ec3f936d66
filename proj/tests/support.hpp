#pragma once

#include <random>

#include <Eigen/Dense>

#include "spca/linalg.hpp"

namespace testing_support {

inline Eigen::VectorXd gaussian_vector(std::mt19937_64& rng, Eigen::Index p) {
  std::normal_distribution<double> z;
  Eigen::VectorXd v(p);
  for (Eigen::Index i = 0; i < p; ++i) v(i) = z(rng);
  return v;
}

inline spca::UnitVector random_unit(std::mt19937_64& rng, Eigen::Index p) {
  return spca::UnitVector::normalized(gaussian_vector(rng, p));
}

inline Eigen::MatrixXd gaussian_matrix(std::mt19937_64& rng, Eigen::Index p) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = z(rng);
  return m;
}

inline spca::SymMatrix random_sym(std::mt19937_64& rng, Eigen::Index p) {
  const Eigen::MatrixXd a = gaussian_matrix(rng, p);
  return spca::SymMatrix(0.5 * (a + a.transpose()));
}

inline spca::SymMatrix random_psd(std::mt19937_64& rng, Eigen::Index p) {
  const Eigen::MatrixXd a = gaussian_matrix(rng, p);
  return spca::SymMatrix(a * a.transpose() / double(p));
}

}  // namespace testing_support
