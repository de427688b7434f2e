#include "star/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdint>

#include "star/error.hpp"

namespace star {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool is_separator(unsigned char c) {
  if (c >= 0x80) return false;
  return !std::isalnum(c);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_separator(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      continue;
    }
    current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

RefHashEmbedder::RefHashEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ < 2) {
    throw Error(ErrorCode::InvalidConfig, "embedding dimension must be >= 2");
  }
}

EmbeddingSpec RefHashEmbedder::spec() const {
  return EmbeddingSpec{dimension_, std::string(kRefHashScheme)};
}

std::vector<double> RefHashEmbedder::embed(std::string_view text) const {
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw Error(ErrorCode::EmptyText, "no tokens in text");

  std::vector<double> v(dimension_, 0.0);
  for (const auto& tok : tokens) {
    const std::uint64_t h = fnv1a(tok);
    const double sign = ((h >> 32) & 1U) != 0U ? -1.0 : 1.0;
    v[h % dimension_] += sign;
  }
  double n = l2_norm(v);
  if (n == 0.0) {
    // Signed contributions cancelled exactly; fall back to unsigned counts.
    for (const auto& tok : tokens) v[fnv1a(tok) % dimension_] += 1.0;
    n = l2_norm(v);
  }
  for (double& x : v) x /= n;
  return v;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool is_unit_norm(std::span<const double> v, double tol) {
  return std::abs(l2_norm(v) - 1.0) <= tol;
}

double similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "vectors of dimension " + std::to_string(u.size()) + " and " +
                    std::to_string(v.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  if (dot > 1.0 - 1e-12) return 1.0;
  return std::max(0.0, dot);
}

}  // namespace star
