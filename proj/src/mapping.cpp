#include "dualbli/mapping.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <fstream>

#include "dualbli/log.hpp"
#include "dualbli/text_matrix.hpp"

namespace dualbli {

LinearMapping::LinearMapping(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() != weights_.cols() || weights_.rows() == 0) {
    throw DataError("mapping must be a non-empty square matrix, got " + std::to_string(weights_.rows()) +
                    "x" + std::to_string(weights_.cols()));
  }
  if (!weights_.allFinite()) throw DataError("mapping has non-finite entries");
}

LinearMapping LinearMapping::identity(Eigen::Index dim) { return LinearMapping(Matrix::Identity(dim, dim)); }

double LinearMapping::orthogonality_error() const {
  const Matrix gram = weights_.transpose() * weights_;
  return (gram - Matrix::Identity(dim(), dim())).norm();
}

Matrix apply(const LinearMapping& map, const Matrix& rows) {
  if (rows.cols() != map.dim()) {
    throw DataError("cannot map rows of width " + std::to_string(rows.cols()) + " with a " +
                    std::to_string(map.dim()) + "-dimensional mapping");
  }
  return rows * map.weights();
}

void orthogonalize_in_place(LinearMapping& map, double beta) {
  if (!(beta > 0.0 && beta <= 0.1)) throw DataError("orthogonalization beta must lie in (0, 0.1]");
  Matrix& w = map.mutable_weights();
  const Matrix wwt = w * w.transpose();
  w = (1.0 + beta) * w - beta * (wwt * w);
}

LinearMapping orthogonalize_step(const LinearMapping& map, double beta) {
  LinearMapping out = map;
  orthogonalize_in_place(out, beta);
  return out;
}

LinearMapping procrustes_solve(const Matrix& source_rows, const Matrix& target_rows) {
  if (source_rows.rows() != target_rows.rows() || source_rows.cols() != target_rows.cols()) {
    throw DataError("procrustes needs paired rows of equal shape");
  }
  if (source_rows.rows() == 0) throw DataError("procrustes needs at least one pair");
  const Matrix cross = source_rows.transpose() * target_rows;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = 1e-10 * std::max(1.0, sv(0));
  if (sv(sv.size() - 1) <= tol) {
    warn("procrustes: rank-deficient cross-covariance (smallest singular value " +
         format_number(sv(sv.size() - 1), 3) + "); solution is not unique");
  }
  Matrix w = svd.matrixU() * svd.matrixV().transpose();
  return LinearMapping(std::move(w));
}

Matrix random_orthogonal(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

void save_mapping(const LinearMapping& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  const Matrix& w = map.weights();
  out << w.rows() << '\n';
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (j) out << ' ';
      out << format_number(w(i, j), 9);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw DataError("write failed for " + path);
}

LinearMapping load_mapping(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open mapping file " + path);
  std::string line;
  double dim_d = 0;
  if (!std::getline(in, line) || !parse_number(line, dim_d) || dim_d < 1 ||
      dim_d != static_cast<double>(static_cast<long>(dim_d))) {
    throw DataError(path + ":1: expected mapping dimension");
  }
  const auto dim = static_cast<Eigen::Index>(dim_d);
  Matrix w(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!std::getline(in, line)) throw DataError(path + ": truncated after row " + std::to_string(i));
    auto fields = split_fields(line);
    if (static_cast<Eigen::Index>(fields.size()) != dim) {
      throw DataError(path + ":" + std::to_string(i + 2) + ": expected " + std::to_string(dim) + " values");
    }
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (!parse_number(fields[j], w(i, j))) {
        throw DataError(path + ":" + std::to_string(i + 2) + ": bad value '" + std::string(fields[j]) + "'");
      }
    }
  }
  return LinearMapping(std::move(w));
}

}  // namespace dualbli
