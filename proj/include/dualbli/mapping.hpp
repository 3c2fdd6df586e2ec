#pragma once

#include <string>

#include "dualbli/types.hpp"

namespace dualbli {

// Square d x d map applied to row vectors: mapped = rows * weights.
class LinearMapping {
 public:
  LinearMapping() = default;
  explicit LinearMapping(Matrix weights);

  static LinearMapping identity(Eigen::Index dim);

  const Matrix& weights() const { return weights_; }
  Matrix& mutable_weights() { return weights_; }
  Eigen::Index dim() const { return weights_.rows(); }

  // ||W^T W - I||_F
  double orthogonality_error() const;

  friend bool operator==(const LinearMapping& a, const LinearMapping& b) {
    return a.weights_.rows() == b.weights_.rows() && a.weights_.cols() == b.weights_.cols() &&
           a.weights_ == b.weights_;
  }

 private:
  Matrix weights_;
};

Matrix apply(const LinearMapping& map, const Matrix& rows);

// W <- (1 + beta) W - beta (W W^T) W. Repeated application pulls W toward the
// nearest orthogonal matrix. beta must lie in (0, 0.1].
LinearMapping orthogonalize_step(const LinearMapping& map, double beta);
void orthogonalize_in_place(LinearMapping& map, double beta);

// Orthogonal W minimizing ||source W - target||_F: W = U V^T where
// U S V^T = svd(source^T target). Warns when the cross-covariance is rank deficient.
LinearMapping procrustes_solve(const Matrix& source_rows, const Matrix& target_rows);

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs of
// R's diagonal folded into Q.
Matrix random_orthogonal(Eigen::Index dim, Rng& rng);

// Text checkpoint: a line holding d, then d lines of d numbers (9 significant digits).
void save_mapping(const LinearMapping& map, const std::string& path);
LinearMapping load_mapping(const std::string& path);

}  // namespace dualbli
