#pragma once

#include <cstdint>

#include "dualbli/embeddings.hpp"
#include "dualbli/lexicon.hpp"
#include "dualbli/mapping.hpp"

namespace dualbli {

// Two spaces related by a known rotation and permutation: the target vector of
// gold(s) is the normalized (source vector of s) * rotation + noise.
struct SyntheticPair {
  EmbeddingSpace source;
  EmbeddingSpace target;
  BilingualLexicon gold;
  LinearMapping rotation;
  double noise_sigma = 0.0;
  // target_of[i] is the target row holding the image of source row i.
  std::vector<std::size_t> target_of;
};

SyntheticPair generate(std::size_t n, Eigen::Index d, double noise_sigma, std::uint64_t seed);

}  // namespace dualbli
