#pragma once

#include <cstddef>

#include "dualbli/embeddings.hpp"
#include "dualbli/lexicon.hpp"
#include "dualbli/mapping.hpp"
#include "dualbli/retrieval.hpp"

namespace dualbli {

struct EvalReport {
  double p_at_1 = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped_oov = 0;
  double inconsistency_rate = 0.0;
};

// CSLS index of src * map (rows renormalized) against tgt.
CslsIndex build_mapped_index(const LinearMapping& map, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                             std::size_t k);

// Entries whose source word is missing from src, or none of whose targets are
// in tgt, are skipped and counted in skipped_oov.
EvalReport precision_at_1(const LinearMapping& f_map, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                          const BilingualLexicon& lexicon, std::size_t k = kDefaultCslsK);
EvalReport precision_at_1(const CslsIndex& index, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                          const BilingualLexicon& lexicon);

// Fraction of the eval_vocab most frequent source words that are not returned
// by translating forward with F and then translating the result back with G.
double inconsistency_rate(const LinearMapping& f_map, const LinearMapping& g_map, const EmbeddingSpace& src,
                          const EmbeddingSpace& tgt, std::size_t eval_vocab, std::size_t k = kDefaultCslsK);
double inconsistency_rate(const CslsIndex& forward, const CslsIndex& backward, std::size_t eval_vocab);

}  // namespace dualbli
