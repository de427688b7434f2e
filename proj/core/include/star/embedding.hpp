#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace star {

inline constexpr std::string_view kRefHashScheme = "ref-hash-v1";
inline constexpr std::string_view kExternalScheme = "external";

// Identifies the embedder that produced every vector in a snapshot.
struct EmbeddingSpec {
  std::size_t dimension = 64;
  std::string scheme_id = std::string(kRefHashScheme);

  friend bool operator==(const EmbeddingSpec&, const EmbeddingSpec&) = default;
};

// Case-folded tokens; every ASCII character that is not alphanumeric acts as a
// separator. Bytes >= 0x80 are kept so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

class Embedder {
 public:
  virtual ~Embedder() = default;

  // Unit-norm vector of dimension spec().dimension. Throws EmptyText when the
  // text has no tokens.
  virtual std::vector<double> embed(std::string_view text) const = 0;
  virtual EmbeddingSpec spec() const = 0;
};

// Signed-hash bag of words: each token is FNV-1a hashed into one of d bins
// with a hash-derived sign, then the vector is L2-normalized.
class RefHashEmbedder final : public Embedder {
 public:
  explicit RefHashEmbedder(std::size_t dimension = 64);

  std::vector<double> embed(std::string_view text) const override;
  EmbeddingSpec spec() const override;

 private:
  std::size_t dimension_;
};

// Normalized similarity max(0, u.v) for unit vectors, reported in [0, 1].
// Values within 1e-12 of 1 are reported as exactly 1 so that a vector always
// matches itself at threshold 1. Throws DimensionMismatch.
double similarity(std::span<const double> u, std::span<const double> v);

double l2_norm(std::span<const double> v);

bool is_unit_norm(std::span<const double> v, double tol = 1e-6);

}  // namespace star
