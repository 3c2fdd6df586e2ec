#pragma once

#include <cstddef>

#include "dualbli/embeddings.hpp"
#include "dualbli/mapping.hpp"
#include "dualbli/retrieval.hpp"

namespace dualbli {

struct SelectionConfig {
  double lambda = 0.5;
  std::size_t eval_vocab = 10000;
  std::size_t k = kDefaultCslsK;
};

struct SelectionScore {
  double forward = 0.0;   // S(F, src, tgt)
  double backward = 0.0;  // S(G, tgt, src)
  double combined = 0.0;  // lambda * forward + (1 - lambda) * backward
};

// Mean cosine between each of the eval_vocab most frequent source words, once
// mapped, and its CSLS translation among the eval_vocab most frequent target
// words. Warns and clamps when eval_vocab exceeds either vocabulary.
double criterion_s(const LinearMapping& map, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                   const SelectionConfig& cfg);

// Bidirectional weighted criterion. G maps tgt -> src, so its score is
// S(G, tgt, src).
SelectionScore criterion_sa(const LinearMapping& f_map, const LinearMapping& g_map, const EmbeddingSpace& src,
                            const EmbeddingSpace& tgt, const SelectionConfig& cfg);

double combine_scores(double forward, double backward, double lambda);

}  // namespace dualbli
