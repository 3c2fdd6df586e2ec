#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dualbli/types.hpp"

namespace dualbli {

enum class NormalizeScheme { unit, center_then_unit };

NormalizeScheme parse_normalize_scheme(const std::string& name);
std::string to_string(NormalizeScheme scheme);

// Vocabulary plus one vector per word. Row i of vectors() belongs to vocab()[i];
// rows are in frequency order. Immutable once built.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;
  // Throws DataError on duplicate tokens, whitespace in tokens, a row count that
  // does not match the vocabulary, or a non-positive dimension.
  EmbeddingSpace(std::string lang_tag, std::vector<std::string> vocab, Matrix vectors);

  const std::string& lang_tag() const { return lang_tag_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  const Matrix& vectors() const { return vectors_; }
  std::size_t size() const { return vocab_.size(); }
  Eigen::Index dim() const { return vectors_.cols(); }
  bool empty() const { return vocab_.empty(); }

  std::optional<std::size_t> find(const std::string& token) const;
  const std::string& token(std::size_t id) const { return vocab_.at(id); }

  // Rows [0, count) clamped to the vocabulary size.
  Matrix prefix_rows(std::size_t count) const;

 private:
  std::string lang_tag_;
  std::vector<std::string> vocab_;
  Matrix vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Reads the word2vec text format: a "<count> <dim>" header line, then one
// "<token> <v1> ... <vdim>" line per word.
EmbeddingSpace load_text(const std::string& path, std::optional<std::size_t> max_vocab = std::nullopt,
                         const std::string& lang_tag = "");

// Writes the same format with 6 significant digits per component.
void save_text(const EmbeddingSpace& space, const std::string& path);

EmbeddingSpace normalize(const EmbeddingSpace& space, NormalizeScheme scheme = NormalizeScheme::unit);

// Divides every row by its Euclidean norm. Zero rows are an error; the message
// names the row index.
void normalize_rows_in_place(Matrix& rows);
Matrix normalized_rows(const Matrix& rows);

}  // namespace dualbli
