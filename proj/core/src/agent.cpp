#include "star/agent.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "record_json.hpp"
#include "star/error.hpp"

namespace star {
namespace {

const std::unordered_set<std::string_view>& stop_words() {
  static const std::unordered_set<std::string_view> words = {
      "a", "about", "after", "ago", "all", "am", "an", "and", "any", "are", "as", "at", "be",
      "been", "before", "being", "by", "can", "closest", "color", "colour", "could", "current",
      "currently", "did", "do", "does", "find", "for", "found", "from", "go", "had", "has",
      "have", "how", "i", "in", "inside", "is", "it", "its", "last", "located", "location",
      "long", "me", "most", "my", "near", "nearest", "notice", "noticed", "now", "of", "on",
      "one", "or", "place", "placed", "please", "put", "recently", "saw", "see", "seen",
      "should", "show", "some", "spot", "spotted", "tell", "that", "the", "there", "these",
      "this", "those", "time", "to", "was", "we", "were", "what", "when", "where", "which",
      "who", "will", "would", "you", "your",
  };
  return words;
}

// Words that introduce an attribute of the preceding object phrase.
bool is_attribute_marker(std::string_view w) {
  return w == "labeled" || w == "labelled" || w == "with" || w == "marked" || w == "showing";
}

bool is_auxiliary(std::string_view w) {
  static const std::unordered_set<std::string_view> aux = {
      "is", "are", "was", "were", "do", "does", "did", "can", "could", "has",
      "have", "had", "will", "would", "should", "am", "shall", "may",
  };
  return aux.contains(w);
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

void extract_phrases(std::string_view text, std::vector<std::string>& cues) {
  const auto tokens = tokenize(text);
  std::vector<std::string> run;
  std::string head;           // last word of the latest object phrase
  bool attribute = false;     // current run follows an attribute marker
  auto flush = [&] {
    if (run.empty()) return;
    if (attribute && !head.empty() && std::find(run.begin(), run.end(), head) == run.end()) {
      run.push_back(head);
    }
    if (!attribute) {
      // Head noun: last non-numeric word ("shelf 2" -> "shelf").
      auto it = std::find_if(run.rbegin(), run.rend(), [](const std::string& w) {
        return !std::all_of(w.begin(), w.end(), [](unsigned char ch) { return std::isdigit(ch); });
      });
      head = it == run.rend() ? run.back() : *it;
    }
    cues.push_back(join(run));
    run.clear();
  };
  for (const auto& t : tokens) {
    if (is_attribute_marker(t)) {
      flush();
      attribute = true;
      continue;
    }
    if (stop_words().contains(t)) {
      flush();
      continue;
    }
    run.push_back(t);
  }
  flush();
}

bool contains_sequence(const std::vector<std::string>& tokens,
                       std::initializer_list<std::string_view> seq) {
  if (tokens.size() < seq.size()) return false;
  for (std::size_t i = 0; i + seq.size() <= tokens.size(); ++i) {
    std::size_t j = 0;
    for (auto w : seq) {
      if (tokens[i + j] != w) break;
      ++j;
    }
    if (j == seq.size()) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::Spatial: return "spatial";
    case QueryKind::Temporal: return "temporal";
    case QueryKind::Binary: return "binary";
    case QueryKind::Descriptive: return "descriptive";
  }
  return "descriptive";
}

QueryKind parse_query_kind(std::string_view s) {
  if (s == "spatial") return QueryKind::Spatial;
  if (s == "temporal") return QueryKind::Temporal;
  if (s == "binary") return QueryKind::Binary;
  if (s == "descriptive") return QueryKind::Descriptive;
  throw Error(ErrorCode::KindMismatch, "unknown query kind '" + std::string(s) + "'");
}

std::string_view to_string(Tool tool) {
  switch (tool) {
    case Tool::Text: return "text";
    case Tool::Time: return "time";
    case Tool::Position: return "position";
  }
  return "text";
}

PlannerDirective plan_query(const Query& query) {
  const auto tokens = tokenize(query.text);
  if (tokens.empty()) throw Error(ErrorCode::UnparseableQuery, "query is empty");

  PlannerDirective d;
  auto contains = [&](std::string_view w) {
    return std::find(tokens.begin(), tokens.end(), w) != tokens.end();
  };
  if (contains("where")) {
    d.kind = QueryKind::Spatial;
  } else if (contains("when") || contains_sequence(tokens, {"how", "long", "ago"})) {
    d.kind = QueryKind::Temporal;
  } else if (is_auxiliary(tokens.front())) {
    d.kind = QueryKind::Binary;
  } else {
    d.kind = QueryKind::Descriptive;
  }

  std::vector<std::string> cues;
  extract_phrases(query.text, cues);
  if (query.observation) extract_phrases(*query.observation, cues);
  for (auto& c : cues) {
    if (std::find(d.cues.begin(), d.cues.end(), c) == d.cues.end()) d.cues.push_back(std::move(c));
  }
  if (d.cues.empty()) {
    throw Error(ErrorCode::UnparseableQuery, "no content words in '" + query.text + "'");
  }
  d.tool = Tool::Text;
  d.round = 1;
  return d;
}

std::vector<std::string> expand_synonyms(const std::vector<std::string>& cues) {
  static const std::unordered_map<std::string_view, std::string_view> synonyms = {
      {"pole", "post"},     {"post", "pole"},       {"box", "carton"},  {"carton", "box"},
      {"barrel", "drum"},   {"drum", "barrel"},     {"bin", "can"},     {"cone", "pylon"},
      {"pylon", "cone"},    {"shelf", "rack"},      {"rack", "shelf"},  {"ladder", "steps"},
      {"forklift", "lift"}, {"pallet", "skid"},     {"skid", "pallet"}, {"sign", "placard"},
  };
  std::vector<std::string> out = cues;
  for (const auto& cue : cues) {
    auto words = tokenize(cue);
    bool changed = false;
    for (auto& w : words) {
      if (auto it = synonyms.find(w); it != synonyms.end()) {
        w = std::string(it->second);
        changed = true;
      }
    }
    if (!changed) continue;
    auto variant = join(words);
    if (std::find(out.begin(), out.end(), variant) == out.end()) out.push_back(std::move(variant));
  }
  return out;
}

std::string render_time_ago(double seconds) {
  if (!(seconds >= 1.0)) return "just now";
  char buf[64];
  if (seconds < 60.0) {
    const long s = std::lround(seconds);
    std::snprintf(buf, sizeof buf, "%ld sec%s ago", s, s == 1 ? "" : "s");
  } else if (seconds < 7200.0) {
    const long m = std::lround(seconds / 60.0);
    std::snprintf(buf, sizeof buf, "%ld min%s ago", m, m == 1 ? "" : "s");
  } else {
    const long h = std::lround(seconds / 3600.0);
    std::snprintf(buf, sizeof buf, "%ld hours ago", h);
  }
  return buf;
}

std::string Answer::to_canonical() const {
  using detail::json;
  json j = json::object();
  j["kind"] = std::string(to_string(kind));
  j["found"] = found;
  j["text"] = text;
  j["position"] = position ? detail::to_json(*position) : json(nullptr);
  j["time_ago"] = time_ago ? json(*time_ago) : json(nullptr);
  j["rounds_used"] = rounds_used;
  j["evidence"] = json::parse(evidence.to_canonical());
  return detail::round_floats(j).dump();
}

namespace {

Answer not_found(QueryKind kind, const EvidenceSet& evidence) {
  Answer a;
  a.kind = kind;
  a.found = false;
  a.text = "not found";
  a.evidence = evidence;
  return a;
}

// needles appear in haystack as one contiguous run.
bool contains_phrase(const std::vector<std::string>& haystack,
                     const std::vector<std::string>& needles) {
  return !needles.empty() &&
         std::search(haystack.begin(), haystack.end(), needles.begin(), needles.end()) !=
             haystack.end();
}

std::string fmt_position(const Vec3& p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.2f, %.2f, %.2f)", p.x, p.y, p.z);
  return buf;
}

}  // namespace

Answer ExtractiveAnswerGenerator::generate(const Query& query, const PlannerDirective& directive,
                                           const EvidenceSet& evidence,
                                           const MemorySnapshot& snapshot) const {
  if (evidence.empty()) return not_found(directive.kind, evidence);
  const auto& top = evidence.text.front();

  Answer a;
  a.kind = directive.kind;
  a.evidence = evidence;
  a.found = true;

  switch (directive.kind) {
    case QueryKind::Spatial:
    case QueryKind::Temporal: {
      const auto cues = TaskCueSet::from_texts(directive.cues, embedder_, alpha_, topk_);
      // Most specific member over the evidence clusters: matches the most cues
      // at the round's threshold, then sits closest to all cues taken
      // together, then carries the most cue mass. Ties keep the better-ranked
      // cluster and the lower id.
      std::string all_cues;
      for (const auto& c : directive.cues) all_cues += (all_cues.empty() ? "" : " ") + c;
      const auto whole = embedder_.embed(all_cues);
      const Primitive* best = nullptr;
      std::size_t best_hits = 0;
      double best_whole = -1.0;
      double best_mass = -1.0;
      for (const auto& entry : evidence.text) {
        const Cluster* cl = evidence.find_cluster(entry.cluster_id);
        if (cl == nullptr) continue;
        for (RecordId m : cl->members) {
          const auto& p = snapshot.primitive(m);
          const auto theta = cue_scores(p.feature, cues);
          std::size_t hits = 0;
          double mass = 0.0;
          for (std::size_t j = 1; j < theta.size(); ++j) {
            hits += theta[j] >= directive.tau ? 1 : 0;
            mass += theta[j];
          }
          const double w = similarity(p.feature, whole);
          const bool better =
              best == nullptr || hits > best_hits ||
              (hits == best_hits && (w > best_whole || (w == best_whole && mass > best_mass)));
          if (better) {
            best = &p;
            best_hits = hits;
            best_whole = w;
            best_mass = mass;
          }
        }
      }
      if (best == nullptr) return not_found(directive.kind, evidence);
      if (directive.kind == QueryKind::Spatial) {
        a.position = best->bbox.center();
        a.text = best->caption + " at " + fmt_position(*a.position);
      } else {
        if (best->detections.empty()) return not_found(directive.kind, evidence);
        a.time_ago = query.issued_at - best->detections.back();
        a.text = render_time_ago(*a.time_ago);
      }
      break;
    }
    case QueryKind::Binary: {
      std::vector<std::vector<std::string>> cue_tokens;
      for (const auto& c : directive.cues) cue_tokens.push_back(tokenize(c));
      auto matches = [&](const std::string& text) {
        const auto toks = tokenize(text);
        return std::any_of(cue_tokens.begin(), cue_tokens.end(),
                           [&](const auto& ct) { return contains_phrase(toks, ct); });
      };
      bool yes = std::any_of(evidence.text.begin(), evidence.text.end(),
                             [&](const RankedEvidence& e) { return matches(e.text); });
      yes = yes || std::any_of(evidence.keyframes.begin(), evidence.keyframes.end(),
                               [&](const KeyframeRecord& k) {
                                 return k.annotation && matches(*k.annotation);
                               });
      a.text = yes ? "yes" : "no";
      break;
    }
    case QueryKind::Descriptive: {
      a.text = top.text;
      const double mid = 0.5 * (top.t_start + top.t_end);
      const KeyframeRecord* nearest = nullptr;
      for (const auto& k : evidence.keyframes) {
        if (!k.annotation) continue;
        if (nearest == nullptr || std::abs(k.timestamp - mid) < std::abs(nearest->timestamp - mid)) {
          nearest = &k;
        }
      }
      if (nearest != nullptr) a.text += " | " + *nearest->annotation;
      break;
    }
  }
  return a;
}

RoundsResult run_rounds(const Query& query, const MemorySnapshot& snapshot,
                        const VectorIndex& captions, const RetrievalConfig& config,
                        const Embedder& embedder, const KeyframeSelector& selector) {
  config.validate();
  RoundsResult out;
  PlannerDirective d = plan_query(query);

  d.round = 1;
  d.tau = config.tau;
  {
    const auto cues = TaskCueSet::from_texts(d.cues, embedder, config.alpha, config.gamma_topk);
    auto run = retrieve_evidence(snapshot, captions, cues, config, d.tau, selector);
    out.history.push_back(d);
    out.evidence = std::move(run.evidence);
    out.trace = std::move(run.trace);
  }
  if (!out.evidence.empty() || config.max_rounds < 2) return out;

  d.round = 2;
  d.cues = expand_synonyms(d.cues);
  d.tau = std::max(0.0, config.tau - config.tau_relaxation);
  {
    const auto cues = TaskCueSet::from_texts(d.cues, embedder, config.alpha, config.gamma_topk);
    auto run = retrieve_evidence(snapshot, captions, cues, config, d.tau, selector);
    out.history.push_back(d);
    out.evidence = std::move(run.evidence);
    out.trace = std::move(run.trace);
  }
  if (!out.evidence.empty() || config.max_rounds < 3) return out;

  d.round = 3;
  d.tau = 0.0;
  const auto cues = TaskCueSet::from_texts(d.cues, embedder, config.alpha, config.gamma_topk);
  out.history.push_back(d);
  out.evidence = retrieve_topk_evidence(snapshot, captions, cues, config, selector, true);
  return out;
}

QuerySession answer_query(const Query& query, const MemorySnapshot& snapshot,
                          const VectorIndex& captions, const RetrievalConfig& config,
                          const Embedder& embedder, const KeyframeSelector& selector,
                          const AnswerGenerator& generator) {
  QuerySession s;
  s.rounds = run_rounds(query, snapshot, captions, config, embedder, selector);
  s.answer = generator.generate(query, s.rounds.history.back(), s.rounds.evidence, snapshot);
  s.answer.rounds_used = s.rounds.rounds_used();
  return s;
}

}  // namespace star
