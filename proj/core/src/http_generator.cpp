#include <httplib.h>

#include <algorithm>
#include <cmath>

#include "record_json.hpp"
#include "star/agent.hpp"
#include "star/error.hpp"

namespace star {

HttpAnswerGenerator::HttpAnswerGenerator(std::string url, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  constexpr std::string_view scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw Error(ErrorCode::InvalidConfig, "external generator URL must start with http://");
  }
  const auto slash = url.find('/', scheme.size());
  base_ = slash == std::string::npos ? url : url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
}

std::string HttpAnswerGenerator::request_body(const Query& query, QueryKind kind,
                                              const EvidenceSet& evidence) {
  detail::json j = {{"query", query.text},
                    {"kind", std::string(to_string(kind))},
                    {"evidence", detail::json::parse(evidence.to_canonical())}};
  return j.dump();
}

Answer HttpAnswerGenerator::parse_response(std::string_view body, QueryKind kind) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ExternalGenerator, m); };
  detail::json j;
  try {
    j = detail::json::parse(body);
  } catch (const detail::json::exception& e) {
    fail(std::string("response is not JSON: ") + e.what());
  }
  if (!j.is_object()) fail("response must be a JSON object");
  Answer a;
  a.kind = kind;
  auto text = j.find("text");
  if (text == j.end() || !text->is_string()) fail("response.text must be a string");
  a.text = text->get<std::string>();
  if (auto p = j.find("position"); p != j.end() && !p->is_null()) {
    if (!p->is_array() || p->size() != 3 ||
        !std::all_of(p->begin(), p->end(), [](const auto& x) { return x.is_number(); })) {
      fail("response.position must be [x, y, z] or null");
    }
    a.position = Vec3{(*p)[0].get<double>(), (*p)[1].get<double>(), (*p)[2].get<double>()};
  }
  if (auto t = j.find("time_ago"); t != j.end() && !t->is_null()) {
    if (!t->is_number()) fail("response.time_ago must be a number or null");
    a.time_ago = t->get<double>();
  }
  switch (kind) {
    case QueryKind::Spatial: a.found = a.position.has_value(); break;
    case QueryKind::Temporal: a.found = a.time_ago.has_value(); break;
    default: a.found = !a.text.empty(); break;
  }
  return a;
}

Answer HttpAnswerGenerator::generate(const Query& query, const PlannerDirective& directive,
                                     const EvidenceSet& evidence, const MemorySnapshot&) const {
  const std::string body = request_body(query, directive.kind, evidence);
  httplib::Client client(base_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto res = client.Post(path_, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }
    Answer a = parse_response(res->body, directive.kind);
    a.evidence = evidence;
    return a;
  }
  throw Error(ErrorCode::ExternalGenerator, last_error);
}

}  // namespace star
