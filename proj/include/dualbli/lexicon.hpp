#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace dualbli {

struct LexiconEntry {
  std::string source;
  std::vector<std::string> targets;  // unique, first-seen order

  bool accepts(const std::string& target) const;
};

// Source words with their acceptable translations, grouped by source token in
// first-seen order.
class BilingualLexicon {
 public:
  void add(const std::string& source, const std::string& target);

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const LexiconEntry* find(const std::string& source) const;

  // Swaps the roles of source and target words.
  BilingualLexicon reversed() const;

 private:
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// One "src<TAB or SPACE>tgt" pair per line. Blank lines are ignored.
BilingualLexicon load_lexicon(const std::string& path);
// Tab-separated, one pair per line.
void save_lexicon(const BilingualLexicon& lexicon, const std::string& path);

}  // namespace dualbli
