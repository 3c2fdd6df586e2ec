#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "dualbli/types.hpp"

namespace dualbli {

inline constexpr std::size_t kDefaultCslsK = 10;

// Cross-domain similarity local scaling over two sets of unit rows:
//   csls(i, j) = 2 cos(i, j) - r_source[i] - r_target[j]
// where r_source[i] is the mean cosine of source row i to its k nearest target
// rows and r_target[j] the mean cosine of target row j to its k nearest source
// rows (k clamped to the opposing row count, k = 0 meaning plain cosine).
struct CslsIndex {
  Matrix mapped_source;
  Matrix target;
  std::size_t k = kDefaultCslsK;
  Vector r_source;
  Vector r_target;

  double cosine(std::size_t source_id, std::size_t target_id) const;
  double score(std::size_t source_id, std::size_t target_id) const;
};

// Rows must already be unit length (checked to 1e-6).
CslsIndex build_index(Matrix mapped_source, Matrix target, std::size_t k = kDefaultCslsK);

struct Translation {
  std::size_t target_id;
  double score;
};

// CSLS argmax over all target rows; ties go to the lowest target id.
std::vector<std::size_t> translate(const CslsIndex& index, const std::vector<std::size_t>& source_ids);
std::vector<Translation> translate_scored(const CslsIndex& index, const std::vector<std::size_t>& source_ids);

// Pairs (i, j), both below max_rank, that are each other's CSLS argmax when
// retrieval is restricted to the first max_rank rows of each side. Sorted by i.
std::vector<std::pair<std::size_t, std::size_t>> mutual_dictionary(const CslsIndex& index, std::size_t max_rank);

// Dot product with a fixed summation order, so equal rows give equal scores
// wherever they sit in a matrix.
double dot_fixed(const double* a, const double* b, Eigen::Index n);

}  // namespace dualbli
