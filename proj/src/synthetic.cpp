#include "dualbli/synthetic.hpp"

#include <algorithm>
#include <numeric>

namespace dualbli {

namespace {
enum Stream : std::uint64_t { kRotation = 1, kSource = 2, kPermutation = 3, kNoise = 4 };
}

SyntheticPair generate(std::size_t n, Eigen::Index d, double noise_sigma, std::uint64_t seed) {
  if (n < 2) throw DataError("synthetic vocabulary size must be at least 2");
  if (d < 2) throw DataError("synthetic dimension must be at least 2");
  if (!(noise_sigma >= 0.0)) throw DataError("noise sigma must be nonnegative");

  Rng rotation_rng = derive_rng(seed, kRotation);
  Rng source_rng = derive_rng(seed, kSource);
  Rng perm_rng = derive_rng(seed, kPermutation);
  Rng noise_rng = derive_rng(seed, kNoise);

  Matrix q = random_orthogonal(d, rotation_rng);

  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix source(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < source.rows(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) source(i, j) = normal(source_rng);
  normalize_rows_in_place(source);

  std::vector<std::size_t> target_of(n);
  std::iota(target_of.begin(), target_of.end(), std::size_t{0});
  std::shuffle(target_of.begin(), target_of.end(), perm_rng);

  const Matrix rotated = source * q;
  Matrix target(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = target.row(static_cast<Eigen::Index>(target_of[i]));
    row = rotated.row(static_cast<Eigen::Index>(i));
    if (noise_sigma > 0.0) {
      for (Eigen::Index j = 0; j < d; ++j) row(j) += noise_sigma * normal(noise_rng);
    }
  }
  normalize_rows_in_place(target);

  std::vector<std::string> src_vocab(n), tgt_vocab(n);
  for (std::size_t i = 0; i < n; ++i) {
    src_vocab[i] = "s" + std::to_string(i);
    tgt_vocab[i] = "t" + std::to_string(i);
  }
  BilingualLexicon gold;
  for (std::size_t i = 0; i < n; ++i) gold.add(src_vocab[i], tgt_vocab[target_of[i]]);

  return SyntheticPair{EmbeddingSpace("src", std::move(src_vocab), std::move(source)),
                       EmbeddingSpace("tgt", std::move(tgt_vocab), std::move(target)),
                       std::move(gold),
                       LinearMapping(std::move(q)),
                       noise_sigma,
                       std::move(target_of)};
}

}  // namespace dualbli
