#include "dualbli/embeddings.hpp"

#include <fstream>

#include "dualbli/log.hpp"
#include "dualbli/text_matrix.hpp"

namespace dualbli {

NormalizeScheme parse_normalize_scheme(const std::string& name) {
  if (name == "unit") return NormalizeScheme::unit;
  if (name == "center_then_unit") return NormalizeScheme::center_then_unit;
  throw DataError("unknown normalization scheme '" + name + "' (expected unit or center_then_unit)");
}

std::string to_string(NormalizeScheme scheme) {
  return scheme == NormalizeScheme::unit ? "unit" : "center_then_unit";
}

EmbeddingSpace::EmbeddingSpace(std::string lang_tag, std::vector<std::string> vocab, Matrix vectors)
    : lang_tag_(std::move(lang_tag)), vocab_(std::move(vocab)), vectors_(std::move(vectors)) {
  if (vectors_.cols() <= 0) throw DataError("embedding dimension must be positive");
  if (static_cast<std::size_t>(vectors_.rows()) != vocab_.size()) {
    throw DataError("vocabulary has " + std::to_string(vocab_.size()) + " tokens but matrix has " +
                    std::to_string(vectors_.rows()) + " rows");
  }
  index_.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    const auto& tok = vocab_[i];
    if (tok.empty() || tok.find_first_of(" \t\n\r\v\f") != std::string::npos) {
      throw DataError("token " + std::to_string(i) + " is empty or contains whitespace");
    }
    if (!index_.emplace(tok, i).second) throw DataError("duplicate token '" + tok + "'");
  }
}

std::optional<std::size_t> EmbeddingSpace::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Matrix EmbeddingSpace::prefix_rows(std::size_t count) const {
  const auto n = static_cast<Eigen::Index>(std::min(count, size()));
  return vectors_.topRows(n);
}

namespace {

std::string at_line(const std::string& path, std::size_t line_no) {
  return path + ":" + std::to_string(line_no) + ": ";
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

EmbeddingSpace load_text(const std::string& path, std::optional<std::size_t> max_vocab,
                         const std::string& lang_tag) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path);

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw DataError(at_line(path, 1) + "missing header");
  strip_cr(line);
  auto header = split_fields(line);
  double count_d = 0, dim_d = 0;
  if (header.size() != 2 || !parse_number(header[0], count_d) || !parse_number(header[1], dim_d) ||
      count_d < 0 || dim_d < 1 || count_d != static_cast<double>(static_cast<std::size_t>(count_d)) ||
      dim_d != static_cast<double>(static_cast<std::size_t>(dim_d))) {
    throw DataError(at_line(path, 1) + "malformed header '" + line + "', expected '<count> <dim>'");
  }
  const auto count = static_cast<std::size_t>(count_d);
  const auto dim = static_cast<Eigen::Index>(dim_d);
  const std::size_t wanted = max_vocab ? std::min(count, *max_vocab) : count;

  std::vector<std::string> vocab;
  vocab.reserve(wanted);
  std::unordered_map<std::string, std::size_t> seen;
  Matrix vectors(static_cast<Eigen::Index>(wanted), dim);
  std::size_t rows_read = 0;

  while (vocab.size() < wanted && rows_read < count && std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    ++rows_read;
    auto fields = split_fields(line);
    if (static_cast<Eigen::Index>(fields.size()) != dim + 1) {
      throw DataError(at_line(path, line_no) + "expected token plus " + std::to_string(dim) +
                      " values, found " + std::to_string(fields.empty() ? 0 : fields.size() - 1) +
                      " values");
    }
    std::string token(fields[0]);
    if (auto it = seen.find(token); it != seen.end()) {
      warn(at_line(path, line_no) + "duplicate token '" + token + "' skipped (first seen at row " +
           std::to_string(it->second + 1) + ")");
      continue;
    }
    const auto row = static_cast<Eigen::Index>(vocab.size());
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (!parse_number(fields[j + 1], vectors(row, j))) {
        throw DataError(at_line(path, line_no) + "malformed or non-finite value '" +
                        std::string(fields[j + 1]) + "'");
      }
    }
    seen.emplace(token, vocab.size());
    vocab.push_back(std::move(token));
  }

  if (vocab.size() < wanted && rows_read < count) {
    throw DataError(path + ": header promises " + std::to_string(count) + " rows but file ends after " +
                    std::to_string(rows_read));
  }
  if (rows_read == count) {
    while (std::getline(in, line)) {
      ++line_no;
      strip_cr(line);
      if (line.find_first_not_of(' ') != std::string::npos) {
        throw DataError(at_line(path, line_no) + "more rows than the header count " + std::to_string(count));
      }
    }
  }
  vectors.conservativeResize(static_cast<Eigen::Index>(vocab.size()), dim);
  return EmbeddingSpace(lang_tag, std::move(vocab), std::move(vectors));
}

void save_text(const EmbeddingSpace& space, const std::string& path) {
  if (space.empty()) throw DataError("refusing to save an empty embedding space to " + path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  const Matrix& v = space.vectors();
  out << space.size() << ' ' << space.dim() << '\n';
  for (std::size_t i = 0; i < space.size(); ++i) {
    out << space.vocab()[i];
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      out << ' ' << format_number(v(static_cast<Eigen::Index>(i), j), 6);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw DataError("write failed for " + path);
}

void normalize_rows_in_place(Matrix& rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    if (!(norm > 0.0)) throw DataError("row " + std::to_string(i) + " has zero norm");
    rows.row(i) /= norm;
  }
}

Matrix normalized_rows(const Matrix& rows) {
  Matrix out = rows;
  normalize_rows_in_place(out);
  return out;
}

EmbeddingSpace normalize(const EmbeddingSpace& space, NormalizeScheme scheme) {
  Matrix v = space.vectors();
  if (scheme == NormalizeScheme::center_then_unit && v.rows() > 0) {
    const RowVector mean = v.colwise().mean();
    v.rowwise() -= mean;
  }
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const double norm = v.row(i).norm();
    if (!(norm > 0.0)) {
      throw DataError("cannot normalize zero vector of token '" + space.token(static_cast<std::size_t>(i)) + "'");
    }
    v.row(i) /= norm;
  }
  return EmbeddingSpace(space.lang_tag(), space.vocab(), std::move(v));
}

}  // namespace dualbli
