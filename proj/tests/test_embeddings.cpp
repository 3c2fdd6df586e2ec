#include <doctest.h>

#include <fstream>

#include "dualbli/embeddings.hpp"
#include "dualbli/log.hpp"
#include "oracles.hpp"

using namespace dualbli;

namespace {

std::string write_file(const std::string& dir, const std::string& name, const std::string& body) {
  const auto path = oracle::scratch_dir(dir) / name;
  std::ofstream(path, std::ios::binary) << body;
  return path.string();
}

}  // namespace

TEST_CASE("load_text parses header and rows") {
  const auto path = write_file("emb_basic", "e.vec", "3 4\na 1 2 3 4\nb 0 1 0 1\nc -1 0.5 2e-1 +3\n");
  const EmbeddingSpace s = load_text(path);
  CHECK(s.size() == 3);
  CHECK(s.dim() == 4);
  CHECK(s.token(2) == "c");
  CHECK(s.vectors()(2, 2) == doctest::Approx(0.2));
  CHECK(s.vectors()(2, 3) == 3.0);
  CHECK(*s.find("b") == 1);
  CHECK_FALSE(s.find("B").has_value());
}

TEST_CASE("load_text truncates to max_vocab") {
  const auto path = write_file("emb_trunc", "e.vec", "5 2\na 1 0\nb 0 1\nc 1 1\nd 2 1\ne 1 2\n");
  const EmbeddingSpace s = load_text(path, 2);
  CHECK(s.size() == 2);
  CHECK(s.token(1) == "b");
}

TEST_CASE("load_text skips a duplicate token with a warning naming the line") {
  const auto path = write_file("emb_dup", "e.vec", "4 2\na 1 0\nb 0 1\nc 1 1\nb 5 5\n");
  ScopedWarningCapture cap;
  const EmbeddingSpace s = load_text(path);
  CHECK(s.size() == 3);
  CHECK(s.vectors()(1, 0) == 0.0);
  REQUIRE(cap.messages().size() == 1);
  CHECK(cap.contains(":5:"));
  CHECK(cap.contains("'b'"));
}

TEST_CASE("load_text accepts CRLF and a missing trailing newline") {
  const auto path = write_file("emb_crlf", "e.vec", "2 2\r\na 1 0\r\nb 0 1");
  const EmbeddingSpace s = load_text(path);
  CHECK(s.size() == 2);
  CHECK(s.vectors()(1, 1) == 1.0);
}

TEST_CASE("load_text rejects malformed input with line numbers") {
  SUBCASE("bad header") {
    const auto path = write_file("emb_bad_header", "e.vec", "three 4\n");
    CHECK_THROWS_WITH_AS(load_text(path), doctest::Contains(":1:"), DataError);
  }
  SUBCASE("wrong field count") {
    const auto path = write_file("emb_bad_count", "e.vec", "2 3\na 1 2 3\nb 1 2\n");
    CHECK_THROWS_WITH_AS(load_text(path), doctest::Contains(":3:"), DataError);
  }
  SUBCASE("non-finite value") {
    const auto path = write_file("emb_nan", "e.vec", "2 2\na 1 2\nb nan 2\n");
    CHECK_THROWS_WITH_AS(load_text(path), doctest::Contains(":3:"), DataError);
  }
  SUBCASE("infinite value") {
    const auto path = write_file("emb_inf", "e.vec", "1 2\na inf 2\n");
    CHECK_THROWS_AS(load_text(path), DataError);
  }
  SUBCASE("short file") {
    const auto path = write_file("emb_short", "e.vec", "3 2\na 1 2\n");
    CHECK_THROWS_AS(load_text(path), DataError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_text("/nonexistent/e.vec"), DataError); }
}

TEST_CASE("EmbeddingSpace enforces its invariants") {
  CHECK_THROWS_AS(EmbeddingSpace("x", {"a", "a"}, Matrix::Ones(2, 2)), DataError);
  CHECK_THROWS_AS(EmbeddingSpace("x", {"a b", "c"}, Matrix::Ones(2, 2)), DataError);
  CHECK_THROWS_AS(EmbeddingSpace("x", {"a"}, Matrix::Ones(2, 2)), DataError);
  CHECK_NOTHROW(EmbeddingSpace("x", {"a", "b"}, Matrix::Ones(2, 2)));
}

TEST_CASE("unit normalization") {
  Matrix v(1, 2);
  v << 3, 4;
  const EmbeddingSpace s = normalize(EmbeddingSpace("x", {"w"}, v));
  CHECK(s.vectors()(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(s.vectors()(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("center_then_unit leaves a symmetric pair unchanged") {
  Matrix v(2, 2);
  v << 1, 0, -1, 0;
  const EmbeddingSpace s = normalize(EmbeddingSpace("x", {"a", "b"}, v), NormalizeScheme::center_then_unit);
  CHECK((s.vectors() - v).norm() < 1e-15);
}

TEST_CASE("normalize gives unit rows and is idempotent") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix v = oracle::gaussian(5, 3, rng);
    EmbeddingSpace raw("x", {"a", "b", "c", "d", "e"}, v);
    for (auto scheme : {NormalizeScheme::unit, NormalizeScheme::center_then_unit}) {
      const EmbeddingSpace once = normalize(raw, scheme);
      for (Eigen::Index i = 0; i < 5; ++i) CHECK(std::abs(once.vectors().row(i).norm() - 1.0) < 1e-6);
      const EmbeddingSpace twice = normalize(once, NormalizeScheme::unit);
      CHECK((twice.vectors() - once.vectors()).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("normalize rejects a zero row naming its token") {
  Matrix v(2, 2);
  v << 1, 0, 0, 0;
  CHECK_THROWS_WITH_AS(normalize(EmbeddingSpace("x", {"a", "zero"}, v)), doctest::Contains("zero"), DataError);
}

TEST_CASE("normalize scheme names") {
  CHECK(parse_normalize_scheme("unit") == NormalizeScheme::unit);
  CHECK(parse_normalize_scheme("center_then_unit") == NormalizeScheme::center_then_unit);
  CHECK(to_string(NormalizeScheme::center_then_unit) == "center_then_unit");
  CHECK_THROWS_AS(parse_normalize_scheme("l2"), DataError);
}

TEST_CASE("save_text and load_text round trip") {
  Rng rng(11);
  const auto dir = oracle::scratch_dir("emb_roundtrip");
  SUBCASE("3x4 header") {
    EmbeddingSpace s("x", {"a", "b", "c"}, oracle::gaussian(3, 4, rng));
    save_text(s, (dir / "s.vec").string());
    std::ifstream in(dir / "s.vec");
    std::string header;
    std::getline(in, header);
    CHECK(header == "3 4");
  }
  SUBCASE("random unit space") {
    std::vector<std::string> vocab;
    for (int i = 0; i < 50; ++i) vocab.push_back("w" + std::to_string(i));
    EmbeddingSpace s("x", vocab, oracle::unit_rows(oracle::gaussian(50, 16, rng)));
    save_text(s, (dir / "u.vec").string());
    const EmbeddingSpace back = load_text((dir / "u.vec").string());
    CHECK(back.vocab() == s.vocab());
    CHECK((back.vectors() - s.vectors()).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("empty space is rejected") {
    CHECK_THROWS_AS(save_text(EmbeddingSpace(), (dir / "e.vec").string()), DataError);
  }
}

TEST_CASE("prefix_rows clamps") {
  EmbeddingSpace s("x", {"a", "b"}, Matrix::Identity(2, 2));
  CHECK(s.prefix_rows(1).rows() == 1);
  CHECK(s.prefix_rows(10).rows() == 2);
}
