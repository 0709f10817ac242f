#ifndef TABML_UNSUPERVISED_EIGEN_HPP_
#define TABML_UNSUPERVISED_EIGEN_HPP_

#include <cstddef>

#include "tabml/core/matrix.hpp"

namespace tabml::unsupervised {

struct SymmetricEigen {
  Vector values;   // descending
  Matrix vectors;  // column j pairs with values[j]; unit length
  std::size_t sweeps = 0;
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
// `tolerance` times the norm of the input. Each eigenvector is flipped so its
// largest-magnitude entry is positive (first such entry on ties).
SymmetricEigen JacobiEigen(const Matrix& a, double tolerance = 1e-12,
                           std::size_t max_sweeps = 100);

}  // namespace tabml::unsupervised

#endif  // TABML_UNSUPERVISED_EIGEN_HPP_
