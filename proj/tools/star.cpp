// star: build memory snapshots, ask questions, run benchmarks, generate
// synthetic scenarios.
//
// Exit status: 0 success, 1 data error, 2 usage or environment error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "star/agent.hpp"
#include "star/bundle.hpp"
#include "star/config.hpp"
#include "star/embedding.hpp"
#include "star/error.hpp"
#include "star/metrics.hpp"
#include "star/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kUsageError = 2;

struct Globals {
  std::optional<std::string> config_file;
  std::vector<std::string> overrides;  // key=value
  bool verbose = false;
  std::optional<std::uint64_t> seed;
  bool lenient = false;
};

// Thrown for problems that map to exit status 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

star::RetrievalConfig load_config(const Globals& g) {
  star::RetrievalConfig c;
  try {
    if (g.config_file) c.merge_file(*g.config_file);
    for (const auto& kv : g.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    c.validate();
  } catch (const star::Error& e) {
    throw UsageError(e.what());
  }
  return c;
}

std::unique_ptr<star::Embedder> make_embedder(const star::RetrievalConfig& c) {
  if (c.embedder != star::kRefHashScheme) {
    throw UsageError("embedder '" + c.embedder + "' is not available; only " +
                     std::string(star::kRefHashScheme) + " is built in");
  }
  return std::make_unique<star::RefHashEmbedder>(c.embedding_dim);
}

star::LoadedBundle load_bundle(const fs::path& dir, const star::RetrievalConfig& c) {
  try {
    auto b = star::load_snapshot_bundle(dir);
    const auto& spec = b.snapshot.embedding_spec();
    if (spec.scheme_id != c.embedder || spec.dimension != c.embedding_dim) {
      throw UsageError("snapshot vectors use " + spec.scheme_id + "/" +
                       std::to_string(spec.dimension) + " but queries would be embedded with " +
                       c.embedder + "/" + std::to_string(c.embedding_dim));
    }
    return b;
  } catch (const star::Error& e) {
    throw UsageError(std::string("cannot load snapshot ") + dir.string() + ": " + e.what());
  }
}

void print_diagnostic(const star::Error& e) {
  std::cerr << "star: " << e.what() << "\n";
  if (const auto* m = dynamic_cast<const star::MalformedRecord*>(&e)) {
    std::cerr << "  at " << m->file() << ":" << m->line_no() << "\n";
  } else if (const auto* d = dynamic_cast<const star::DanglingReference*>(&e)) {
    std::cerr << "  " << d->owner() << " references missing primitive " << d->primitive_id()
              << "\n";
  }
}

star::ScenarioSpec load_spec(const std::optional<std::string>& file, const Globals& g) {
  star::ScenarioSpec spec;
  if (file) spec.merge_file(*file);
  if (g.seed) spec.seed = *g.seed;
  spec.validate();
  return spec;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

// --- build ----------------------------------------------------------------

struct BuildArgs {
  std::optional<std::string> from;
  std::string captions, primitives, keyframes, out;
  std::optional<double> horizon;
};

int cmd_build(const Globals& g, const BuildArgs& a) {
  const auto config = load_config(g);
  const auto embedder = make_embedder(config);
  const fs::path base = a.from ? fs::path(*a.from) : fs::path();
  auto pick = [&](const std::string& given, const char* name) {
    if (!given.empty()) return fs::path(given);
    if (a.from) return base / name;
    throw UsageError(std::string("missing --") + fs::path(name).stem().string() + " (or --from)");
  };
  const fs::path captions = pick(a.captions, "captions.jsonl");
  const fs::path primitives = pick(a.primitives, "primitives.jsonl");
  const fs::path keyframes = pick(a.keyframes, "keyframes.jsonl");
  for (const auto& p : {captions, primitives, keyframes}) {
    if (!fs::exists(p)) throw UsageError("no such file: " + p.string());
  }

  star::IngestOptions opts;
  opts.strict = !g.lenient;
  opts.embedder = embedder.get();
  opts.horizon = a.horizon;
  star::MemorySnapshot snapshot = [&] {
    try {
      return star::ingest_files(captions, primitives, keyframes, opts);
    } catch (const star::MalformedRecord& e) {
      // Name the file the user passed rather than its role.
      const fs::path& file = e.file() == "captions.jsonl"     ? captions
                             : e.file() == "primitives.jsonl" ? primitives
                                                              : keyframes;
      throw star::MalformedRecord(file.string(), e.line_no(), e.reason());
    }
  }();
  star::write_snapshot_bundle(snapshot, a.out, config.entries());
  std::cout << "snapshot: " << a.out << "\n"
            << "captions: " << snapshot.captions().size() << "\n"
            << "primitives: " << snapshot.primitives().size() << "\n"
            << "keyframes: " << snapshot.keyframes().size() << "\n"
            << "horizon: " << snapshot.horizon() << " s\n"
            << "embedding: " << snapshot.embedding_spec().scheme_id << "/"
            << snapshot.embedding_spec().dimension << "\n"
            << "validation: ok\n";
  return kOk;
}

// --- query ----------------------------------------------------------------

struct QueryArgs {
  std::string snapshot;
  std::string text;
  std::optional<std::string> observation;
  std::optional<double> now;
  bool json = false;
};

int cmd_query(const Globals& g, const QueryArgs& a) {
  const auto config = load_config(g);
  const auto embedder = make_embedder(config);
  const auto bundle = load_bundle(a.snapshot, config);
  const auto& snapshot = bundle.snapshot;

  star::Query q;
  q.text = a.text;
  q.observation = a.observation;
  q.issued_at = a.now.value_or(snapshot.horizon());

  const auto index = star::VectorIndex::over_captions(snapshot);
  const star::MidpointKeyframeSelector selector;
  std::unique_ptr<star::AnswerGenerator> generator;
  if (config.external_generator_url) {
    generator = std::make_unique<star::HttpAnswerGenerator>(
        *config.external_generator_url,
        std::chrono::milliseconds(static_cast<long long>(config.generator_timeout_s * 1000)));
  } else {
    generator = std::make_unique<star::ExtractiveAnswerGenerator>(*embedder, config.alpha,
                                                                  config.gamma_topk);
  }
  star::QuerySession s;
  try {
    s = star::answer_query(q, snapshot, index, config, *embedder, selector, *generator);
  } catch (const star::Error& e) {
    if (e.code() == star::ErrorCode::UnparseableQuery ||
        e.code() == star::ErrorCode::ExternalGenerator) {
      throw UsageError(e.what());
    }
    throw;
  }

  const auto& ans = s.answer;
  if (a.json) {
    std::cout << ans.to_canonical() << "\n";
  } else {
    std::cout << "kind: " << star::to_string(ans.kind) << "\n"
              << "found: " << (ans.found ? "yes" : "no") << "\n"
              << "answer: " << ans.text << "\n";
    if (ans.position) {
      std::printf("position: %.3f %.3f %.3f\n", ans.position->x, ans.position->y,
                  ans.position->z);
    }
    if (ans.time_ago) std::printf("time_ago_s: %.3f\n", *ans.time_ago);
    std::cout << "rounds: " << ans.rounds_used << "\n";
  }
  if (g.verbose) {
    std::cout << "evidence: " << s.rounds.evidence.to_canonical() << "\n";
    std::cout << "merge_trace:\n" << s.rounds.trace.to_jsonl();
  }
  return kOk;
}

// --- eval -----------------------------------------------------------------

struct EvalArgs {
  std::optional<std::string> snapshot;
  std::optional<std::string> tasks;
  std::optional<std::string> spec;
  std::string method = "star";
  std::optional<std::string> report;
  bool timing = false;
  std::size_t threads = 1;
};

int cmd_eval(const Globals& g, const EvalArgs& a) {
  star::Method method;
  try {
    method = star::parse_method(a.method);
  } catch (const star::Error& e) {
    throw UsageError(e.what());
  }
  const auto config = load_config(g);
  const auto embedder = make_embedder(config);

  std::optional<star::MemorySnapshot> snapshot;
  std::vector<star::QATask> tasks;
  if (a.snapshot) {
    if (!a.tasks) throw UsageError("--snapshot needs --tasks");
    snapshot.emplace(load_bundle(*a.snapshot, config).snapshot);
    tasks = star::read_tasks(*a.tasks);
  } else {
    auto scenario = star::generate_synthetic_memory(load_spec(a.spec, g), *embedder);
    snapshot.emplace(std::move(scenario.snapshot));
    tasks = std::move(scenario.tasks);
  }

  star::BenchmarkOptions opts;
  opts.threads = a.threads;
  const auto report = star::run_benchmark(*snapshot, tasks, method, config, *embedder, opts);
  std::cout << report.to_table(a.timing);
  if (a.report) write_file(*a.report, report.to_jsonl(a.timing));
  return kOk;
}

// --- gen ------------------------------------------------------------------

struct GenArgs {
  std::optional<std::string> spec;
  std::string out;
};

int cmd_gen(const Globals& g, const GenArgs& a) {
  const auto spec = load_spec(a.spec, g);
  const auto memory = star::generate_synthetic_parts(spec);
  star::write_scenario_files(memory, spec, a.out);
  std::cout << "scenario: " << a.out << "\n"
            << "captions: " << memory.parts.captions.size() << "\n"
            << "primitives: " << memory.parts.primitives.size() << "\n"
            << "keyframes: " << memory.parts.keyframes.size() << "\n"
            << "tasks: " << memory.tasks.size() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"star: task-oriented spatio-temporal memory retrieval"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_file, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", g.overrides, "override one config key (key=value), repeatable");
  app.add_flag("-v,--verbose", g.verbose, "print evidence and merge trace");
  app.add_option("--seed", g.seed, "scenario seed (gen, eval)");
  app.add_flag("--lenient", g.lenient, "ignore unknown record fields");

  BuildArgs build;
  auto* b = app.add_subcommand("build", "validate records and write a snapshot bundle");
  b->add_option("--from", build.from, "directory with captions/primitives/keyframes .jsonl");
  b->add_option("--captions", build.captions, "captions file");
  b->add_option("--primitives", build.primitives, "primitives file");
  b->add_option("--keyframes", build.keyframes, "keyframes file");
  b->add_option("--horizon", build.horizon, "memory horizon in seconds");
  b->add_option("-o,--out", build.out, "snapshot directory")->required();

  QueryArgs query;
  auto* q = app.add_subcommand("query", "answer one question against a snapshot");
  q->add_option("-s,--snapshot", query.snapshot, "snapshot directory")->required();
  q->add_option("text", query.text, "question")->required();
  q->add_option("--observation", query.observation, "text describing an attached image");
  q->add_option("--now", query.now, "query time in memory seconds (default: horizon)");
  q->add_flag("--json", query.json, "print the canonical answer record");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "run a benchmark");
  e->add_option("--snapshot", eval.snapshot, "snapshot directory");
  e->add_option("--tasks", eval.tasks, "tasks.jsonl");
  e->add_option("--spec", eval.spec, "scenario spec file (used without --snapshot)");
  e->add_option("-m,--method", eval.method, "star | naive_topk | object_caption");
  e->add_option("-r,--report", eval.report, "write line-delimited report here");
  e->add_flag("--timing", eval.timing, "include latency in outputs");
  e->add_option("-j,--threads", eval.threads, "worker threads")->check(CLI::PositiveNumber);

  GenArgs gen;
  auto* gn = app.add_subcommand("gen", "generate a synthetic warehouse scenario");
  gn->add_option("--spec", gen.spec, "scenario spec file");
  gn->add_option("-o,--out", gen.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsageError;
  }

  try {
    if (*b) return cmd_build(g, build);
    if (*q) return cmd_query(g, query);
    if (*e) return cmd_eval(g, eval);
    if (*gn) return cmd_gen(g, gen);
  } catch (const UsageError& err) {
    std::cerr << "star: " << err.what() << "\n";
    return kUsageError;
  } catch (const star::Error& err) {
    print_diagnostic(err);
    if (err.code() == star::ErrorCode::Io || err.code() == star::ErrorCode::InvalidConfig ||
        err.code() == star::ErrorCode::UnknownMethod) {
      return kUsageError;
    }
    return kDataError;
  } catch (const std::exception& err) {
    std::cerr << "star: " << err.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}
