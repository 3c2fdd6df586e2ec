#include "dualbli/selection.hpp"

#include <numeric>

#include "dualbli/log.hpp"

namespace dualbli {

double combine_scores(double forward, double backward, double lambda) {
  return lambda * forward + (1.0 - lambda) * backward;
}

double criterion_s(const LinearMapping& map, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                   const SelectionConfig& cfg) {
  if (cfg.eval_vocab == 0) throw DataError("eval_vocab must be positive");
  if (cfg.eval_vocab > src.size() || cfg.eval_vocab > tgt.size()) {
    warn("selection eval_vocab " + std::to_string(cfg.eval_vocab) + " exceeds vocabulary size; clamped");
  }
  const Matrix mapped = normalized_rows(apply(map, src.prefix_rows(cfg.eval_vocab)));
  const CslsIndex index = build_index(mapped, normalized_rows(tgt.prefix_rows(cfg.eval_vocab)), cfg.k);

  std::vector<std::size_t> ids(static_cast<std::size_t>(mapped.rows()));
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  const auto hits = translate(index, ids);
  double total = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) total += index.cosine(i, hits[i]);
  return total / static_cast<double>(ids.size());
}

SelectionScore criterion_sa(const LinearMapping& f_map, const LinearMapping& g_map, const EmbeddingSpace& src,
                            const EmbeddingSpace& tgt, const SelectionConfig& cfg) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) throw DataError("selection lambda must lie in [0, 1]");
  SelectionScore s;
  s.forward = criterion_s(f_map, src, tgt, cfg);
  s.backward = criterion_s(g_map, tgt, src, cfg);
  s.combined = combine_scores(s.forward, s.backward, cfg.lambda);
  return s;
}

}  // namespace dualbli
