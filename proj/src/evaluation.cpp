#include "dualbli/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "dualbli/text_matrix.hpp"

namespace dualbli {

bool LexiconEntry::accepts(const std::string& target) const {
  return std::find(targets.begin(), targets.end(), target) != targets.end();
}

void BilingualLexicon::add(const std::string& source, const std::string& target) {
  auto [it, inserted] = index_.emplace(source, entries_.size());
  if (inserted) entries_.push_back({source, {}});
  auto& entry = entries_[it->second];
  if (!entry.accepts(target)) entry.targets.push_back(target);
}

const LexiconEntry* BilingualLexicon::find(const std::string& source) const {
  auto it = index_.find(source);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

BilingualLexicon BilingualLexicon::reversed() const {
  BilingualLexicon out;
  for (const auto& e : entries_)
    for (const auto& t : e.targets) out.add(t, e.source);
  return out;
}

BilingualLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dictionary file " + path);
  BilingualLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_fields(line, " \t");
    if (fields.empty()) continue;
    if (fields.size() != 2) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected 'source target', got '" + line + "'");
    }
    lex.add(std::string(fields[0]), std::string(fields[1]));
  }
  return lex;
}

void save_lexicon(const BilingualLexicon& lexicon, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const auto& e : lexicon.entries())
    for (const auto& t : e.targets) out << e.source << '\t' << t << '\n';
  out.flush();
  if (!out) throw DataError("write failed for " + path);
}

CslsIndex build_mapped_index(const LinearMapping& map, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                             std::size_t k) {
  return build_index(normalized_rows(apply(map, src.vectors())), normalized_rows(tgt.vectors()), k);
}

EvalReport precision_at_1(const CslsIndex& index, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                          const BilingualLexicon& lexicon) {
  EvalReport report;
  std::vector<std::size_t> queries;
  std::vector<const LexiconEntry*> gold;
  for (const auto& e : lexicon.entries()) {
    const auto sid = src.find(e.source);
    const bool any_target =
        std::any_of(e.targets.begin(), e.targets.end(), [&tgt](const std::string& t) { return tgt.find(t).has_value(); });
    if (!sid || !any_target) {
      ++report.skipped_oov;
      continue;
    }
    queries.push_back(*sid);
    gold.push_back(&e);
  }
  report.evaluated = queries.size();
  if (queries.empty()) return report;

  const auto predicted = translate(index, queries);
  std::size_t hits = 0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    if (gold[q]->accepts(tgt.token(predicted[q]))) ++hits;
  }
  report.p_at_1 = static_cast<double>(hits) / static_cast<double>(queries.size());
  return report;
}

EvalReport precision_at_1(const LinearMapping& f_map, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                          const BilingualLexicon& lexicon, std::size_t k) {
  return precision_at_1(build_mapped_index(f_map, src, tgt, k), src, tgt, lexicon);
}

double inconsistency_rate(const CslsIndex& forward, const CslsIndex& backward, std::size_t eval_vocab) {
  const std::size_t count = std::min<std::size_t>(eval_vocab, static_cast<std::size_t>(forward.mapped_source.rows()));
  if (count == 0) return 0.0;
  std::vector<std::size_t> ids(count);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  const auto there = translate(forward, ids);
  const auto back = translate(backward, there);
  std::size_t inconsistent = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (back[i] != i) ++inconsistent;
  }
  return static_cast<double>(inconsistent) / static_cast<double>(count);
}

double inconsistency_rate(const LinearMapping& f_map, const LinearMapping& g_map, const EmbeddingSpace& src,
                          const EmbeddingSpace& tgt, std::size_t eval_vocab, std::size_t k) {
  return inconsistency_rate(build_mapped_index(f_map, src, tgt, k), build_mapped_index(g_map, tgt, src, k),
                            eval_vocab);
}

}  // namespace dualbli
