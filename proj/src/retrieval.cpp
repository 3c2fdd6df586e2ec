#include "dualbli/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace dualbli {

double dot_fixed(const double* a, const double* b, Eigen::Index n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  Eigen::Index i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

double CslsIndex::cosine(std::size_t source_id, std::size_t target_id) const {
  return dot_fixed(mapped_source.row(static_cast<Eigen::Index>(source_id)).data(),
                   target.row(static_cast<Eigen::Index>(target_id)).data(), target.cols());
}

double CslsIndex::score(std::size_t source_id, std::size_t target_id) const {
  return 2.0 * cosine(source_id, target_id) - r_source(static_cast<Eigen::Index>(source_id)) -
         r_target(static_cast<Eigen::Index>(target_id));
}

namespace {

void check_unit_rows(const Matrix& rows, const char* what) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    if (std::abs(rows.row(i).norm() - 1.0) > 1e-6) {
      throw DataError(std::string(what) + " row " + std::to_string(i) + " is not unit length");
    }
  }
}

// Keeps the k largest values seen; mean() sums them in descending order so the
// result does not depend on insertion order.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

  void push(double v) {
    if (heap_.size() < k_) {
      heap_.push_back(v);
      std::push_heap(heap_.begin(), heap_.end(), std::greater<>());
    } else if (v > heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end(), std::greater<>());
      heap_.back() = v;
      std::push_heap(heap_.begin(), heap_.end(), std::greater<>());
    }
  }

  double mean() const {
    if (heap_.empty()) return 0.0;
    std::vector<double> sorted = heap_;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double s = 0.0;
    for (double v : sorted) s += v;
    return s / static_cast<double>(sorted.size());
  }

 private:
  std::size_t k_;
  std::vector<double> heap_;
};

}  // namespace

namespace {

// Rows per similarity block so one block holds about four million scores.
Eigen::Index block_rows(Eigen::Index other) {
  return std::max<Eigen::Index>(1, (Eigen::Index{1} << 22) / std::max<Eigen::Index>(1, other));
}

// Scores within this distance of the best are re-scored with dot_fixed so that
// exact ties resolve to the lowest id.
constexpr double kTieWindow = 1e-12;

}  // namespace

CslsIndex build_index(Matrix mapped_source, Matrix target, std::size_t k) {
  if (mapped_source.rows() == 0 || target.rows() == 0) throw DataError("CSLS index needs nonempty row sets");
  if (mapped_source.cols() != target.cols()) {
    throw DataError("CSLS index dimension mismatch: " + std::to_string(mapped_source.cols()) + " vs " +
                    std::to_string(target.cols()));
  }
  check_unit_rows(mapped_source, "mapped source");
  check_unit_rows(target, "target");

  CslsIndex index;
  index.mapped_source = std::move(mapped_source);
  index.target = std::move(target);
  index.k = k;
  const Eigen::Index n = index.mapped_source.rows();
  const Eigen::Index m = index.target.rows();
  index.r_source = Vector::Zero(n);
  index.r_target = Vector::Zero(m);
  if (k == 0) return index;

  const std::size_t k_src = std::min<std::size_t>(k, static_cast<std::size_t>(m));
  const std::size_t k_tgt = std::min<std::size_t>(k, static_cast<std::size_t>(n));
  std::vector<TopK> column_top(static_cast<std::size_t>(m), TopK(k_tgt));
  const Eigen::Index step = block_rows(m);
  Matrix sims;
  for (Eigen::Index begin = 0; begin < n; begin += step) {
    const Eigen::Index rows = std::min(step, n - begin);
    sims.noalias() = index.mapped_source.middleRows(begin, rows) * index.target.transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      TopK row_top(k_src);
      for (Eigen::Index j = 0; j < m; ++j) {
        const double c = sims(r, j);
        row_top.push(c);
        column_top[static_cast<std::size_t>(j)].push(c);
      }
      index.r_source(begin + r) = row_top.mean();
    }
  }
  for (Eigen::Index j = 0; j < m; ++j) index.r_target(j) = column_top[static_cast<std::size_t>(j)].mean();
  return index;
}

namespace {

// CSLS argmax of source row i over target rows [0, limit) given that row's
// cosines; near-ties are settled exactly, lowest id first.
Translation argmax_target(const CslsIndex& index, std::size_t i, const double* cosines, std::size_t limit) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < limit; ++j) {
    const double s = 2.0 * cosines[j] - index.r_target(static_cast<Eigen::Index>(j));
    if (s > best) best = s;
  }
  Translation out{0, -std::numeric_limits<double>::infinity()};
  for (std::size_t j = 0; j < limit; ++j) {
    const double s = 2.0 * cosines[j] - index.r_target(static_cast<Eigen::Index>(j));
    if (s < best - kTieWindow) continue;
    const double exact = index.score(i, j);
    if (exact > out.score) out = {j, exact};
  }
  return out;
}

// Same for target row j over source rows [0, limit).
std::size_t argmax_source(const CslsIndex& index, std::size_t j, const double* cosines, std::size_t limit) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < limit; ++i) {
    const double s = 2.0 * cosines[i] - index.r_source(static_cast<Eigen::Index>(i));
    if (s > best) best = s;
  }
  std::size_t best_id = 0;
  double best_exact = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < limit; ++i) {
    const double s = 2.0 * cosines[i] - index.r_source(static_cast<Eigen::Index>(i));
    if (s < best - kTieWindow) continue;
    const double exact = index.score(i, j);
    if (exact > best_exact) {
      best_exact = exact;
      best_id = i;
    }
  }
  return best_id;
}

// CSLS translations of the given source rows among the first `limit` targets.
std::vector<Translation> translate_prefix(const CslsIndex& index, const std::vector<std::size_t>& source_ids,
                                          std::size_t limit) {
  const auto n = static_cast<std::size_t>(index.mapped_source.rows());
  for (std::size_t id : source_ids) {
    if (id >= n) throw DataError("source id " + std::to_string(id) + " out of range");
  }
  const auto lim = static_cast<Eigen::Index>(limit);
  const auto targets = index.target.topRows(lim);
  const Eigen::Index step = block_rows(lim);
  std::vector<Translation> out;
  out.reserve(source_ids.size());
  Matrix queries, sims;
  for (std::size_t begin = 0; begin < source_ids.size(); begin += static_cast<std::size_t>(step)) {
    const std::size_t count = std::min(static_cast<std::size_t>(step), source_ids.size() - begin);
    queries.resize(static_cast<Eigen::Index>(count), index.mapped_source.cols());
    for (std::size_t q = 0; q < count; ++q) {
      queries.row(static_cast<Eigen::Index>(q)) =
          index.mapped_source.row(static_cast<Eigen::Index>(source_ids[begin + q]));
    }
    sims.noalias() = queries * targets.transpose();
    for (std::size_t q = 0; q < count; ++q) {
      out.push_back(argmax_target(index, source_ids[begin + q], sims.row(static_cast<Eigen::Index>(q)).data(), limit));
    }
  }
  return out;
}

}  // namespace

std::vector<Translation> translate_scored(const CslsIndex& index, const std::vector<std::size_t>& source_ids) {
  return translate_prefix(index, source_ids, static_cast<std::size_t>(index.target.rows()));
}

std::vector<std::size_t> translate(const CslsIndex& index, const std::vector<std::size_t>& source_ids) {
  std::vector<std::size_t> ids;
  ids.reserve(source_ids.size());
  for (const auto& t : translate_scored(index, source_ids)) ids.push_back(t.target_id);
  return ids;
}

std::vector<std::pair<std::size_t, std::size_t>> mutual_dictionary(const CslsIndex& index, std::size_t max_rank) {
  const std::size_t rank_src = std::min<std::size_t>(max_rank, static_cast<std::size_t>(index.mapped_source.rows()));
  const std::size_t rank_tgt = std::min<std::size_t>(max_rank, static_cast<std::size_t>(index.target.rows()));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (rank_src == 0 || rank_tgt == 0) return pairs;

  std::vector<std::size_t> backward(rank_tgt);
  const auto sources = index.mapped_source.topRows(static_cast<Eigen::Index>(rank_src));
  const Eigen::Index step = block_rows(static_cast<Eigen::Index>(rank_src));
  Matrix sims;
  for (std::size_t begin = 0; begin < rank_tgt; begin += static_cast<std::size_t>(step)) {
    const std::size_t count = std::min(static_cast<std::size_t>(step), rank_tgt - begin);
    sims.noalias() =
        index.target.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count)) * sources.transpose();
    for (std::size_t q = 0; q < count; ++q) {
      backward[begin + q] = argmax_source(index, begin + q, sims.row(static_cast<Eigen::Index>(q)).data(), rank_src);
    }
  }

  std::vector<std::size_t> ids(rank_src);
  for (std::size_t i = 0; i < rank_src; ++i) ids[i] = i;
  const auto forward = translate_prefix(index, ids, rank_tgt);
  for (std::size_t i = 0; i < rank_src; ++i) {
    if (backward[forward[i].target_id] == i) pairs.emplace_back(i, forward[i].target_id);
  }
  return pairs;
}

}  // namespace dualbli
