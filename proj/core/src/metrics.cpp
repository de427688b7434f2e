#include "star/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <mutex>
#include <thread>

#include "record_json.hpp"
#include "star/error.hpp"

namespace star {

int recall_at_k(const EvidenceSet& evidence, const QATask& task, std::size_t k, double tol) {
  const std::size_t n = std::min(k, evidence.text.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = evidence.text[i];
    for (double t : task.evidence_times) {
      if (t >= e.t_start - tol && t <= e.t_end + tol) return 1;
    }
  }
  return 0;
}

double redundancy(std::span<const RankedEvidence> text, double window) {
  if (text.size() < 2) return 0.0;
  std::vector<double> mids;
  mids.reserve(text.size());
  for (const auto& e : text) mids.push_back(0.5 * (e.t_start + e.t_end));
  std::sort(mids.begin(), mids.end());
  std::size_t best = 0;
  for (std::size_t i = 0, j = 0; i < mids.size(); ++i) {
    while (j < mids.size() && mids[j] <= mids[i] + window) ++j;
    best = std::max(best, j - i);
  }
  if (best < 2) return 0.0;
  return static_cast<double>(best) / static_cast<double>(text.size());
}

Score score_answer(const Answer& answer, const QATask& task) {
  if (answer.kind != task.kind) {
    throw Error(ErrorCode::KindMismatch, "answer kind " + std::string(to_string(answer.kind)) +
                                             " does not match task kind " +
                                             std::string(to_string(task.kind)));
  }
  Score s;
  switch (task.kind) {
    case QueryKind::Spatial: {
      if (!task.gt_position) throw Error(ErrorCode::KindMismatch, "spatial task without position");
      if (!answer.found || !answer.position) return s;
      s.error = distance(*answer.position, *task.gt_position);
      s.success = *s.error < task.spatial_threshold.value_or(kSpatialThreshold);
      return s;
    }
    case QueryKind::Temporal: {
      if (!task.gt_time) throw Error(ErrorCode::KindMismatch, "temporal task without time");
      if (!answer.found || !answer.time_ago) return s;
      const double truth = task.query.issued_at - *task.gt_time;
      s.error = std::abs(*answer.time_ago - truth);
      s.success = *s.error <= kTemporalThreshold;
      return s;
    }
    case QueryKind::Binary: {
      if (!task.gt_binary) throw Error(ErrorCode::KindMismatch, "binary task without truth value");
      const bool said_yes = answer.found && answer.text == "yes";
      s.success = said_yes == *task.gt_binary;
      return s;
    }
    case QueryKind::Descriptive: {
      const auto toks = tokenize(answer.text);
      s.success = answer.found && std::all_of(task.key_tokens.begin(), task.key_tokens.end(),
                                              [&](const std::string& k) {
                                                const auto kt = tokenize(k);
                                                return std::all_of(kt.begin(), kt.end(), [&](const std::string& t) {
                                                  return std::find(toks.begin(), toks.end(), t) != toks.end();
                                                });
                                              });
      return s;
    }
  }
  return s;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Star: return "star";
    case Method::NaiveTopk: return "naive_topk";
    case Method::ObjectCaption: return "object_caption";
  }
  return "star";
}

Method parse_method(std::string_view s) {
  if (s == "star") return Method::Star;
  if (s == "naive_topk") return Method::NaiveTopk;
  if (s == "object_caption") return Method::ObjectCaption;
  throw Error(ErrorCode::UnknownMethod, "unknown method '" + std::string(s) + "'");
}

const CategoryStats* MetricReport::find(TaskCategory c) const {
  for (const auto& s : categories) {
    if (s.category == c) return &s;
  }
  return nullptr;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string MetricReport::to_table(bool timing) const {
  std::ostringstream out;
  char line[160];
  out << "method: " << to_string(method) << "  tasks: " << tasks << "  K: " << k << "\n";
  std::snprintf(line, sizeof line, "%-12s %6s %6s %10s\n", "category", "tasks", "SR", "error");
  out << line;
  for (const auto& c : categories) {
    const std::string err = c.mean_error ? fixed(*c.mean_error, 3) : "-";
    std::snprintf(line, sizeof line, "%-12s %6zu %6s %10s\n", std::string(to_string(c.category)).c_str(),
                  c.tasks, fixed(c.success_rate, 3).c_str(), err.c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "%-12s %6zu %6s %10s\n", "overall", tasks,
                fixed(success_rate, 3).c_str(), "-");
  out << line;
  out << "recall@" << k << ": " << fixed(recall_at_k, 3) << "\n";
  out << "redundancy: " << fixed(redundancy, 3) << "\n";
  if (timing) {
    out << "latency mean ms: " << fixed(latency_mean_ms, 3) << "\n";
    out << "latency p95 ms: " << fixed(latency_p95_ms, 3) << "\n";
  }
  return out.str();
}

std::string MetricReport::to_jsonl(bool timing) const {
  using detail::json;
  std::string out;
  json summary = json::object();
  summary["record"] = "summary";
  summary["method"] = std::string(to_string(method));
  summary["k"] = k;
  summary["tasks"] = tasks;
  summary["success_rate"] = success_rate;
  summary["recall_at_k"] = recall_at_k;
  summary["redundancy"] = redundancy;
  if (timing) {
    summary["latency_mean_ms"] = latency_mean_ms;
    summary["latency_p95_ms"] = latency_p95_ms;
  }
  json cfg = json::object();
  for (const auto& [key, value] : config) cfg[key] = value;
  summary["config"] = cfg;
  out += detail::round_floats(summary).dump() + "\n";

  for (const auto& c : categories) {
    json j = json::object();
    j["record"] = "category";
    j["category"] = std::string(to_string(c.category));
    j["tasks"] = c.tasks;
    j["successes"] = c.successes;
    j["success_rate"] = c.success_rate;
    j["mean_error"] = c.mean_error ? json(*c.mean_error) : json(nullptr);
    out += detail::round_floats(j).dump() + "\n";
  }
  for (const auto& o : outcomes) {
    json j = json::object();
    j["record"] = "task";
    j["id"] = o.task_id;
    j["category"] = std::string(to_string(o.category));
    j["success"] = o.success;
    j["error"] = o.error ? json(*o.error) : json(nullptr);
    j["recall"] = o.recall;
    j["redundancy"] = o.redundancy;
    j["position"] = o.position ? detail::to_json(*o.position) : json(nullptr);
    j["answer"] = o.answer;
    j["rounds_used"] = o.rounds_used;
    j["evidence_size"] = o.evidence_size;
    if (timing) j["latency_ms"] = o.latency_ms;
    out += detail::round_floats(j).dump() + "\n";
  }
  return out;
}

namespace {

struct Runner {
  const MemorySnapshot& snapshot;
  Method method;
  const RetrievalConfig& config;
  const Embedder& embedder;
  VectorIndex captions;
  std::optional<VectorIndex> primitives;
  MidpointKeyframeSelector selector;
  ExtractiveAnswerGenerator generator;

  Runner(const MemorySnapshot& s, Method m, const RetrievalConfig& c, const Embedder& e)
      : snapshot(s),
        method(m),
        config(c),
        embedder(e),
        captions(VectorIndex::over_captions(s)),
        generator(e, c.alpha, c.gamma_topk) {
    if (m == Method::ObjectCaption) primitives = VectorIndex::over_primitives(s);
  }

  TaskOutcome run(const QATask& task) const {
    const auto start = std::chrono::steady_clock::now();
    Answer answer;
    if (method == Method::Star) {
      answer = answer_query(task.query, snapshot, captions, config, embedder, selector, generator)
                   .answer;
    } else {
      PlannerDirective d = plan_query(task.query);
      d.tau = 0.0;
      const auto cues = TaskCueSet::from_texts(d.cues, embedder, config.alpha, config.gamma_topk);
      const EvidenceSet ev =
          method == Method::NaiveTopk
              ? retrieve_topk_evidence(snapshot, captions, cues, config, selector, false)
              : retrieve_object_evidence(snapshot, *primitives, cues, config, selector);
      answer = generator.generate(task.query, d, ev, snapshot);
      answer.rounds_used = 1;
    }
    const auto stop = std::chrono::steady_clock::now();

    TaskOutcome o;
    o.task_id = task.id;
    o.category = task.category;
    const Score s = score_answer(answer, task);
    o.success = s.success;
    o.error = s.error;
    o.recall = recall_at_k(answer.evidence, task, config.K);
    o.redundancy = redundancy(answer.evidence.text);
    o.position = answer.position;
    o.answer = answer.text;
    o.rounds_used = answer.rounds_used;
    o.evidence_size = answer.evidence.text.size();
    o.latency_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    return o;
  }
};

}  // namespace

MetricReport run_benchmark(const MemorySnapshot& snapshot, std::span<const QATask> tasks,
                           Method method, const RetrievalConfig& config, const Embedder& embedder,
                           const BenchmarkOptions& options) {
  config.validate();
  const Runner runner(snapshot, method, config, embedder);

  std::vector<TaskOutcome> outcomes(tasks.size());
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, tasks.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) outcomes[i] = runner.run(tasks[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
          try {
            outcomes[i] = runner.run(tasks[i]);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  MetricReport r;
  r.method = method;
  r.k = config.K;
  r.tasks = tasks.size();
  r.config = config.entries();

  static constexpr TaskCategory kOrder[] = {TaskCategory::Spatial, TaskCategory::Binary,
                                            TaskCategory::Descriptive, TaskCategory::Multimodal,
                                            TaskCategory::Temporal};
  std::size_t successes = 0;
  double recall_sum = 0.0;
  double redundancy_sum = 0.0;
  std::vector<double> latencies;
  for (const auto& o : outcomes) {
    successes += o.success ? 1 : 0;
    recall_sum += o.recall;
    redundancy_sum += o.redundancy;
    latencies.push_back(o.latency_ms);
  }
  for (TaskCategory c : kOrder) {
    CategoryStats s;
    s.category = c;
    double err_sum = 0.0;
    std::size_t err_n = 0;
    for (const auto& o : outcomes) {
      if (o.category != c) continue;
      ++s.tasks;
      s.successes += o.success ? 1 : 0;
      if (o.error) {
        err_sum += *o.error;
        ++err_n;
      }
    }
    if (s.tasks == 0) continue;
    s.success_rate = static_cast<double>(s.successes) / static_cast<double>(s.tasks);
    if (err_n > 0) s.mean_error = err_sum / static_cast<double>(err_n);
    r.categories.push_back(s);
  }
  if (!outcomes.empty()) {
    const auto n = static_cast<double>(outcomes.size());
    r.success_rate = static_cast<double>(successes) / n;
    r.recall_at_k = recall_sum / n;
    r.redundancy = redundancy_sum / n;
    double lat_sum = 0.0;
    for (double l : latencies) lat_sum += l;
    r.latency_mean_ms = lat_sum / n;
    std::sort(latencies.begin(), latencies.end());
    const auto idx = static_cast<std::size_t>(std::ceil(0.95 * n)) - 1;
    r.latency_p95_ms = latencies[std::min(idx, latencies.size() - 1)];
  }
  if (options.keep_outcomes) r.outcomes = std::move(outcomes);
  return r;
}

}  // namespace star
