#include "star/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "star/error.hpp"

namespace star {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view v) {
  std::string s(v);
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorCode::InvalidConfig, std::string(key) + ": expected a number, got '" + s + "'");
  }
  return d;
}

long long parse_int(std::string_view key, std::string_view v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::InvalidConfig,
                std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

std::size_t parse_count(std::string_view key, std::string_view v) {
  const long long n = parse_int(key, v);
  if (n < 0) throw Error(ErrorCode::InvalidConfig, std::string(key) + " must be non-negative");
  return static_cast<std::size_t>(n);
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::InvalidConfig,
              std::string(key) + ": expected true/false, got '" + std::string(v) + "'");
}

std::string fmt(double d) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, r.ptr);
}

}  // namespace

void RetrievalConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, m); };
  if (!(tau >= 0.0 && tau <= 1.0)) fail("tau must lie in [0, 1]");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (gamma_topk < 1) fail("gamma_topk must be >= 1");
  if (!(delta_bar >= 0.0)) fail("delta_bar must be >= 0");
  if (K < 1) fail("K must be >= 1");
  if (!(r_adj > 0.0)) fail("r_adj must be > 0");
  if (max_rounds < 1 || max_rounds > 3) fail("max_rounds must be 1, 2 or 3");
  if (!(keyframe_tol >= 0.0)) fail("keyframe_tol must be >= 0");
  if (embedding_dim < 2) fail("embedding_dim must be >= 2");
  if (!(tau_relaxation >= 0.0)) fail("tau_relaxation must be >= 0");
  if (!(generator_timeout_s > 0.0)) fail("generator_timeout_s must be > 0");
}

void RetrievalConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view v = trim(raw);
  if (key == "tau") tau = parse_double(key, v);
  else if (key == "alpha") alpha = parse_double(key, v);
  else if (key == "gamma_topk") gamma_topk = parse_count(key, v);
  else if (key == "delta_bar") delta_bar = parse_double(key, v);
  else if (key == "K") K = parse_count(key, v);
  else if (key == "r_adj") r_adj = parse_double(key, v);
  else if (key == "cooccurrence_edges") cooccurrence_edges = parse_bool(key, v);
  else if (key == "max_rounds") max_rounds = static_cast<int>(parse_int(key, v));
  else if (key == "keyframe_tol") keyframe_tol = parse_double(key, v);
  else if (key == "embedder") embedder = std::string(v);
  else if (key == "embedding_dim") embedding_dim = parse_count(key, v);
  else if (key == "external_generator_url") {
    if (v.empty()) external_generator_url.reset();
    else external_generator_url = std::string(v);
  } else if (key == "tau_relaxation") tau_relaxation = parse_double(key, v);
  else if (key == "generator_timeout_s") generator_timeout_s = parse_double(key, v);
  else throw Error(ErrorCode::InvalidConfig, "unknown config key '" + std::string(key) + "'");
}

void RetrievalConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view l = line;
    if (auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig,
                  path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    set(trim(l.substr(0, eq)), trim(l.substr(eq + 1)));
  }
}

std::vector<std::pair<std::string, std::string>> RetrievalConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out = {
      {"K", std::to_string(K)},
      {"alpha", fmt(alpha)},
      {"cooccurrence_edges", cooccurrence_edges ? "true" : "false"},
      {"delta_bar", fmt(delta_bar)},
      {"embedder", embedder},
      {"embedding_dim", std::to_string(embedding_dim)},
      {"external_generator_url", external_generator_url.value_or("")},
      {"gamma_topk", std::to_string(gamma_topk)},
      {"generator_timeout_s", fmt(generator_timeout_s)},
      {"keyframe_tol", fmt(keyframe_tol)},
      {"max_rounds", std::to_string(max_rounds)},
      {"r_adj", fmt(r_adj)},
      {"tau", fmt(tau)},
      {"tau_relaxation", fmt(tau_relaxation)},
  };
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace star
