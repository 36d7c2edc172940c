// Command-line surface: answer single questions, run benchmark sets, replay
// traces with human feedback, drive the gridworld domain and the online goal
// filter, and manage the response cache. All command output is deterministic
// for fixed inputs on the scripted and gridworld backends; anything timing
// related goes to the error stream.
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "invplan/discovery.hpp"
#include "invplan/gridworld.hpp"
#include "invplan/oracle_cache.hpp"
#include "invplan/remote_oracle.hpp"
#include "invplan/scripted_oracle.hpp"
#include "invplan/smc.hpp"

namespace invplan {

inline const char* category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Extraction: return "extraction";
    case ErrorCategory::Oracle: return "oracle";
    case ErrorCategory::Input: return "input";
    case ErrorCategory::Internal: return "internal";
  }
  return "internal";
}

// ---------------------------------------------------------------------------
// File formats. Every document carries format_version; unknown fields are
// ignored with a warning so newer files still replay.

inline void check_format_version(const nlohmann::json& doc,
                                 const std::string& what) {
  if (!doc.is_object()) {
    throw InputError(what + " must be a JSON object");
  }
  const int version = doc.value("format_version", 1);
  if (version != 1) {
    throw InputError(what + " has unsupported format_version " +
                     std::to_string(version));
  }
}

inline void warn_unknown_fields(const nlohmann::json& doc,
                                const std::vector<std::string>& known,
                                const std::string& what, std::ostream& err) {
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      err << "warning: " << what << " has unknown field '" << key
          << "', ignoring\n";
    }
  }
}

inline nlohmann::json load_json_file(const std::string& path,
                                     const std::string& what) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + what + ": " + path);
  try {
    nlohmann::json doc;
    in >> doc;
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(what + " " + path + " is not valid JSON: " + e.what());
  }
}

inline nlohmann::ordered_json timeline_to_json(const Timeline& tl) {
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const TimelineStep& step : tl.steps) {
    steps.push_back({{"state", step.state},
                     {"action", step.action},
                     {"utterance", step.utterance}});
  }
  nlohmann::ordered_json evidence = nlohmann::ordered_json::array();
  for (const auto& [kind, text] : tl.evidence) {
    evidence.push_back({kind, text});
  }
  return nlohmann::ordered_json{{"steps", std::move(steps)},
                                {"agents", tl.agents},
                                {"target_agent", tl.target_agent},
                                {"evidence", std::move(evidence)}};
}

inline Timeline timeline_from_json(const nlohmann::json& doc) {
  Timeline tl;
  for (const nlohmann::json& step : doc.value("steps", nlohmann::json::array())) {
    tl.steps.push_back({step.value("state", ""), step.value("action", ""),
                        step.value("utterance", "")});
  }
  tl.agents = doc.value("agents", std::vector<std::string>{});
  tl.target_agent = doc.value("target_agent", "");
  for (const nlohmann::json& pair :
       doc.value("evidence", nlohmann::json::array())) {
    if (!pair.is_array() || pair.size() != 2) {
      throw InputError("timeline evidence entries must be [kind, text] pairs");
    }
    tl.evidence.emplace_back(pair[0].get<std::string>(),
                             pair[1].get<std::string>());
  }
  return tl;
}

inline nlohmann::ordered_json variable_ref_to_json(const VariableRef& ref) {
  return nlohmann::ordered_json{{"kind", to_string(ref.kind)},
                                {"timestep", ref.timestep},
                                {"agent", ref.agent},
                                {"level", ref.level}};
}

inline VariableRef variable_ref_from_json(const nlohmann::json& doc) {
  VariableRef ref;
  ref.kind = variable_kind_from_string(doc.value("kind", "belief"));
  ref.timestep = doc.value("timestep", 0);
  ref.agent = doc.value("agent", "");
  ref.level = doc.value("level", 0);
  return ref;
}

inline nlohmann::ordered_json query_to_json(const Query& q) {
  return nlohmann::ordered_json{{"question", q.question},
                                {"candidates", q.candidates},
                                {"extra_info", q.extra_info},
                                {"target", variable_ref_to_json(q.target)}};
}

inline Query query_from_json(const nlohmann::json& doc) {
  Query q;
  q.question = doc.value("question", "");
  q.candidates = doc.value("candidates", std::vector<std::string>{});
  q.extra_info = doc.value("extra_info", "");
  if (doc.contains("target")) q.target = variable_ref_from_json(doc.at("target"));
  return q;
}

/// Pre-structured input that bypasses text extraction in tests and replays.
struct PreExtracted {
  Timeline timeline;
  VariableRef target;
  int level = 0;
  std::string extra_info;
};

struct Episode {
  std::string id;
  std::string story;
  std::string question;
  std::vector<std::string> candidates;
  std::optional<int> expected;  // index into candidates
  std::vector<std::string> tags;
  std::optional<PreExtracted> pre;
};

inline Episode episode_from_json(const nlohmann::json& doc, std::ostream& err) {
  check_format_version(doc, "episode");
  warn_unknown_fields(doc,
                      {"format_version", "id", "story", "question",
                       "candidates", "expected", "tags", "pre_extracted"},
                      "episode " + doc.value("id", "?"), err);
  Episode ep;
  ep.id = doc.value("id", "");
  ep.story = doc.value("story", "");
  ep.question = doc.value("question", "");
  ep.candidates = doc.value("candidates", std::vector<std::string>{});
  if (ep.candidates.empty()) {
    throw InputError("episode " + ep.id + " has no answer candidates");
  }
  if (doc.contains("expected") && !doc.at("expected").is_null()) {
    const int idx = doc.at("expected").get<int>();
    if (idx < 0 || idx >= static_cast<int>(ep.candidates.size())) {
      throw InputError("episode " + ep.id + " expects candidate " +
                       std::to_string(idx) + " but has only " +
                       std::to_string(ep.candidates.size()));
    }
    ep.expected = idx;
  }
  ep.tags = doc.value("tags", std::vector<std::string>{});
  if (doc.contains("pre_extracted") && !doc.at("pre_extracted").is_null()) {
    const nlohmann::json& pre = doc.at("pre_extracted");
    PreExtracted p;
    p.timeline = timeline_from_json(pre.value("timeline", nlohmann::json::object()));
    if (pre.contains("target")) p.target = variable_ref_from_json(pre.at("target"));
    p.level = pre.value("level", 0);
    p.extra_info = pre.value("extra_info", "");
    ep.pre = std::move(p);
  }
  return ep;
}

inline Episode episode_from_file(const std::string& path, std::ostream& err) {
  return episode_from_json(load_json_file(path, "episode file"), err);
}

inline std::vector<Episode> episode_set_from_file(const std::string& path,
                                                  std::ostream& err) {
  const nlohmann::json doc = load_json_file(path, "episode set");
  check_format_version(doc, "episode set");
  if (!doc.contains("episodes") || !doc.at("episodes").is_array()) {
    throw InputError("episode set " + path + " lacks an episodes array");
  }
  std::vector<Episode> episodes;
  for (const nlohmann::json& entry : doc.at("episodes")) {
    episodes.push_back(episode_from_json(entry, err));
  }
  if (episodes.empty()) {
    throw InputError("episode set " + path + " is empty");
  }
  return episodes;
}

// ---------------------------------------------------------------------------
// Oracle construction shared by the commands.

struct OracleChoice {
  std::string backend = "scripted";  // scripted | remote | gridworld
  std::string fixtures;
  std::string scenario;
  std::string cache_path;
  std::string remote_url;
  std::string remote_model;
};

struct OracleHandle {
  std::unique_ptr<Oracle> backend;
  std::unique_ptr<CachingOracle> persistent;
  OracleConfig config;

  Oracle& use() { return persistent ? static_cast<Oracle&>(*persistent) : *backend; }
};

inline OracleHandle build_oracle(const OracleChoice& choice) {
  OracleHandle handle;
  if (choice.backend == "scripted") {
    if (choice.fixtures.empty()) {
      throw ConfigError("the scripted oracle needs --fixtures");
    }
    handle.backend = std::make_unique<ScriptedOracle>(
        ScriptedOracle::from_file(choice.fixtures));
    handle.config.backend = OracleBackend::Scripted;
  } else if (choice.backend == "gridworld") {
    if (choice.scenario.empty()) {
      throw ConfigError("the gridworld oracle needs --scenario");
    }
    const GridScenario sc = scenario_from_file(choice.scenario);
    handle.backend = std::make_unique<GridworldOracle>(sc.grid, sc.params);
    handle.config.backend = OracleBackend::Gridworld;
  } else if (choice.backend == "remote") {
    handle.config.backend = OracleBackend::Remote;
    if (!choice.remote_url.empty()) {
      handle.config.remote.base_url = choice.remote_url;
    }
    if (!choice.remote_model.empty()) {
      handle.config.remote.model_name = choice.remote_model;
    }
    handle.backend = std::make_unique<RemoteOracle>(handle.config);
  } else {
    throw ConfigError("unknown oracle backend: " + choice.backend);
  }
  if (!choice.cache_path.empty()) {
    handle.persistent =
        std::make_unique<CachingOracle>(*handle.backend, choice.cache_path);
  }
  return handle;
}

/// Serves nothing; lets the cache subcommand open a cache file standalone.
class NullOracle : public Oracle {
 public:
  std::vector<std::string> propose(PromptKind, const Slots&, int) override {
    throw OracleError("the null oracle serves no requests");
  }
  LikelihoodJudgment judge(PromptKind, const Slots&) override {
    throw OracleError("the null oracle serves no requests");
  }
  const char* name() const override { return "null"; }
};

// ---------------------------------------------------------------------------
// Trace files: everything needed to re-run discovery, plus the result.

struct TraceDocument {
  std::string episode_id;
  Timeline timeline;
  Query query;
  int level = 0;
  DiscoveryConfig discovery;
  OracleChoice oracle;
  nlohmann::ordered_json result;                       // trace_to_json output
  nlohmann::ordered_json parent = nullptr;             // link to the amended trace
};

inline nlohmann::ordered_json trace_document_to_json(const TraceDocument& td) {
  return nlohmann::ordered_json{
      {"format_version", 1},
      {"episode", td.episode_id},
      {"timeline", timeline_to_json(td.timeline)},
      {"query", query_to_json(td.query)},
      {"level", td.level},
      {"discovery",
       {{"alpha", td.discovery.alpha},
        {"u_min", td.discovery.u_min},
        {"max_level", td.discovery.max_level},
        {"seed", td.discovery.seed},
        {"default_num_hypotheses", td.discovery.default_num_hypotheses},
        {"reduce", td.discovery.reduce},
        {"use_cache", td.discovery.use_cache}}},
      {"oracle",
       {{"backend", td.oracle.backend},
        {"fixtures", td.oracle.fixtures},
        {"scenario", td.oracle.scenario}}},
      {"result", td.result},
      {"parent", td.parent}};
}

inline TraceDocument trace_document_from_file(const std::string& path) {
  const nlohmann::json doc = load_json_file(path, "trace file");
  check_format_version(doc, "trace file");
  TraceDocument td;
  td.episode_id = doc.value("episode", "");
  td.timeline = timeline_from_json(doc.value("timeline", nlohmann::json::object()));
  td.query = query_from_json(doc.value("query", nlohmann::json::object()));
  td.level = doc.value("level", 0);
  if (doc.contains("discovery")) {
    const nlohmann::json& d = doc.at("discovery");
    td.discovery.alpha = d.value("alpha", td.discovery.alpha);
    td.discovery.u_min = d.value("u_min", td.discovery.u_min);
    td.discovery.max_level = d.value("max_level", td.discovery.max_level);
    td.discovery.seed = d.value("seed", td.discovery.seed);
    td.discovery.default_num_hypotheses =
        d.value("default_num_hypotheses", td.discovery.default_num_hypotheses);
    td.discovery.reduce = d.value("reduce", td.discovery.reduce);
    td.discovery.use_cache = d.value("use_cache", td.discovery.use_cache);
  }
  if (doc.contains("oracle")) {
    const nlohmann::json& o = doc.at("oracle");
    td.oracle.backend = o.value("backend", "scripted");
    td.oracle.fixtures = o.value("fixtures", "");
    td.oracle.scenario = o.value("scenario", "");
  }
  if (doc.contains("result")) {
    td.result = nlohmann::ordered_json::parse(doc.at("result").dump());
  }
  if (doc.contains("parent")) {
    td.parent = nlohmann::ordered_json::parse(doc.at("parent").dump());
  }
  return td;
}

inline void write_json_file(const nlohmann::ordered_json& doc,
                            const std::string& path, const std::string& what) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + what + ": " + path);
  out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Feedback amendments.

struct FeedbackAmendment {
  std::string target;       // extraction | hypotheses | clamp
  int step = 0;             // 1-based timestep where one is required
  std::string field;        // extraction: state | action | utterance
  std::string kind;         // hypotheses: observation | belief | goal
  std::string agent;        // defaults to the timeline's target agent
  std::string replacement;  // text, or a JSON array for hypotheses
};

inline nlohmann::ordered_json amendment_to_json(const FeedbackAmendment& a) {
  return nlohmann::ordered_json{{"target", a.target},   {"step", a.step},
                                {"field", a.field},     {"kind", a.kind},
                                {"agent", a.agent},     {"replacement", a.replacement}};
}

/// Mutates the trace document per the amendment. Returns hypothesis-set
/// overrides to hand to discovery (only the hypotheses target produces any).
inline std::vector<HypothesisOverride> apply_amendment(
    TraceDocument& td, const FeedbackAmendment& a) {
  std::vector<HypothesisOverride> overrides;
  if (a.target == "extraction") {
    if (a.step < 1 || a.step > td.timeline.num_steps()) {
      throw UnknownTraceElement("the trace timeline has no step " +
                                std::to_string(a.step));
    }
    TimelineStep& step = td.timeline.steps[static_cast<std::size_t>(a.step - 1)];
    if (a.field == "state") {
      step.state = a.replacement;
    } else if (a.field == "action") {
      step.action = a.replacement;
    } else if (a.field == "utterance") {
      step.utterance = a.replacement;
    } else {
      throw UnknownTraceElement("no extracted field named '" + a.field +
                                "' (expected state, action or utterance)");
    }
  } else if (a.target == "hypotheses") {
    VariableRef ref;
    ref.kind = variable_kind_from_string(a.kind.empty() ? "belief" : a.kind);
    if (!is_latent(ref.kind)) {
      throw UnknownTraceElement("hypothesis sets exist only for latent "
                                "variables, not " + a.kind);
    }
    ref.timestep = a.step;
    if (ref.kind != VariableKind::Goal &&
        (a.step < 1 || a.step > td.timeline.num_steps())) {
      throw UnknownTraceElement("the trace timeline has no step " +
                                std::to_string(a.step));
    }
    ref.agent = a.agent.empty() ? td.timeline.target_agent : a.agent;
    ref.level = td.level;
    nlohmann::json texts;
    try {
      texts = nlohmann::json::parse(a.replacement);
    } catch (const nlohmann::json::exception&) {
      throw InputError("a hypotheses replacement must be a JSON array of texts");
    }
    if (!texts.is_array() || texts.empty()) {
      throw InputError("a hypotheses replacement must be a non-empty JSON array");
    }
    overrides.push_back({ref, texts.get<std::vector<std::string>>()});
  } else if (a.target == "clamp") {
    td.query.extra_info = a.replacement;
  } else {
    throw ConfigError("unknown feedback target: " + a.target);
  }
  return overrides;
}

// ---------------------------------------------------------------------------
// Shared output formatting. Fixed precision keeps repeated runs byte-equal.

inline std::string format_fixed(double value, int places) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(places) << value;
  return out.str();
}

inline void print_distribution_block(const Distribution& d, std::ostream& out) {
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    out << "  " << format_fixed(d.probs[i], 6) << "  " << d.support[i] << "\n";
  }
}

inline void print_answer_block(const DiscoveryTrace& trace, std::ostream& out) {
  out << "answer: " << trace.final_answer << "\n";
  out << "posterior:\n";
  print_distribution_block(trace.final_report.posterior, out);
  out << "utilities: ";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (i) out << " -> ";
    out << format_fixed(trace.steps[i].report.utility, 3);
  }
  out << "\n";
  out << "terminated by: " << to_string(trace.terminated_by) << "\n";
  out << "models evaluated: " << trace.models_evaluated << "\n";
  out << "backend calls: propose=" << trace.backend_propose_calls
      << " judge=" << trace.backend_judge_calls << "\n";
}

// ---------------------------------------------------------------------------
// Commands.

struct RunOptions {
  std::string episode_path;
  OracleChoice oracle;
  DiscoveryConfig discovery;
  std::string trace_path;
};

namespace detail {

/// Extraction when needed, then the discovery loop. The timeline/query pair
/// is returned so callers can persist it in a trace file.
struct AnswerRun {
  Timeline timeline;
  Query query;
  int level = 0;
  DiscoveryTrace trace;
};

inline AnswerRun run_episode(const Episode& ep, Oracle& oracle,
                             const DiscoveryConfig& dcfg,
                             const OracleConfig& ocfg) {
  AnswerRun run;
  if (ep.pre) {
    run.timeline = ep.pre->timeline;
    run.level = ep.pre->level;
    run.query.question = ep.question;
    run.query.candidates = ep.candidates;
    run.query.target = ep.pre->target;
    run.query.extra_info = ep.pre->extra_info;
    if (run.query.target.agent.empty()) {
      run.query.target.agent = run.timeline.target_agent;
    }
  } else {
    ExtractionResult extracted =
        extract_information(oracle, ep.story, ep.question, ep.candidates);
    run.timeline = std::move(extracted.timeline);
    run.query = std::move(extracted.query);
    run.level = extracted.level;
  }
  ModelDiscovery discovery(oracle, dcfg, ocfg);
  run.trace = discovery.discover_from(run.timeline, run.query, run.level);
  return run;
}

}  // namespace detail

inline int cmd_answer(const RunOptions& opts, std::ostream& out,
                      std::ostream& err) {
  const Episode ep = episode_from_file(opts.episode_path, err);
  OracleHandle oracle = build_oracle(opts.oracle);
  const detail::AnswerRun run =
      detail::run_episode(ep, oracle.use(), opts.discovery, oracle.config);
  print_answer_block(run.trace, out);
  if (!opts.trace_path.empty()) {
    TraceDocument td;
    td.episode_id = ep.id;
    td.timeline = run.timeline;
    td.query = run.query;
    td.level = run.level;
    td.discovery = opts.discovery;
    td.oracle = opts.oracle;
    td.result = trace_to_json(run.trace);
    write_json_file(trace_document_to_json(td), opts.trace_path, "trace file");
    out << "trace written: " << opts.trace_path << "\n";
  }
  return 0;
}

struct BenchOptions {
  std::string episodes_path;
  OracleChoice oracle;
  DiscoveryConfig discovery;
  int jobs = 1;
};

inline int cmd_bench(const BenchOptions& opts, std::ostream& out,
                     std::ostream& err) {
  if (opts.jobs < 1) throw ConfigError("--jobs must be at least 1");
  if (opts.jobs > 1 && !opts.oracle.cache_path.empty()) {
    throw ConfigError("a persistent cache cannot be shared across bench jobs");
  }
  const std::vector<Episode> episodes =
      episode_set_from_file(opts.episodes_path, err);
  for (const Episode& ep : episodes) {
    if (!ep.expected) {
      throw InputError("episode " + ep.id + " lacks the expected answer "
                       "index every bench episode needs");
    }
  }

  // Workers build their own oracle from the once-parsed source so that
  // per-episode call counts never interleave.
  std::optional<nlohmann::json> fixture_doc;
  std::optional<GridScenario> scenario;
  if (opts.oracle.backend == "scripted") {
    if (opts.oracle.fixtures.empty()) {
      throw ConfigError("the scripted oracle needs --fixtures");
    }
    fixture_doc = load_json_file(opts.oracle.fixtures, "fixture file");
  } else if (opts.oracle.backend == "gridworld") {
    if (opts.oracle.scenario.empty()) {
      throw ConfigError("the gridworld oracle needs --scenario");
    }
    scenario = scenario_from_file(opts.oracle.scenario);
  }

  struct Outcome {
    bool correct = false;
    bool failed = false;
    std::string answer;
    std::string error;
    long propose_calls = 0;
    long judge_calls = 0;
  };
  std::vector<Outcome> outcomes(episodes.size());

  const auto started = std::chrono::steady_clock::now();
  auto run_one = [&](std::size_t idx) {
    Outcome& outcome = outcomes[idx];
    try {
      std::unique_ptr<Oracle> oracle;
      OracleConfig ocfg;
      if (fixture_doc) {
        oracle = std::make_unique<ScriptedOracle>(
            ScriptedOracle::from_json(*fixture_doc, opts.oracle.fixtures));
        ocfg.backend = OracleBackend::Scripted;
      } else if (scenario) {
        oracle = std::make_unique<GridworldOracle>(scenario->grid,
                                                   scenario->params);
        ocfg.backend = OracleBackend::Gridworld;
      } else {
        OracleChoice choice = opts.oracle;
        choice.cache_path.clear();
        OracleHandle handle = build_oracle(choice);
        ocfg = handle.config;
        oracle = std::move(handle.backend);
      }
      if (!opts.oracle.cache_path.empty()) {
        CachingOracle cached(*oracle, opts.oracle.cache_path);
        const detail::AnswerRun run =
            detail::run_episode(episodes[idx], cached, opts.discovery, ocfg);
        outcome.answer = run.trace.final_answer;
        outcome.propose_calls = run.trace.backend_propose_calls;
        outcome.judge_calls = run.trace.backend_judge_calls;
      } else {
        const detail::AnswerRun run =
            detail::run_episode(episodes[idx], *oracle, opts.discovery, ocfg);
        outcome.answer = run.trace.final_answer;
        outcome.propose_calls = run.trace.backend_propose_calls;
        outcome.judge_calls = run.trace.backend_judge_calls;
      }
      outcome.correct =
          outcome.answer == episodes[idx].candidates[*episodes[idx].expected];
    } catch (const Error& e) {
      outcome.failed = true;
      outcome.error = std::string(category_name(e.category())) + ": " + e.what();
    } catch (const std::exception& e) {
      outcome.failed = true;
      outcome.error = std::string("internal: ") + e.what();
    }
  };

  if (opts.jobs == 1) {
    for (std::size_t i = 0; i < episodes.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const int n_workers =
        std::min<int>(opts.jobs, static_cast<int>(episodes.size()));
    for (int w = 0; w < n_workers; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < episodes.size();
             i = next.fetch_add(1)) {
          run_one(i);
        }
      });
    }
    for (std::thread& worker : workers) worker.join();
  }
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);

  int correct = 0;
  int failures = 0;
  long propose_total = 0;
  long judge_total = 0;
  std::map<std::string, std::pair<int, int>> by_tag;  // tag -> {correct, total}
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const Episode& ep = episodes[i];
    const Outcome& outcome = outcomes[i];
    if (outcome.failed) {
      ++failures;
      out << "episode " << ep.id << ": failed (" << outcome.error << ")\n";
    } else {
      out << "episode " << ep.id << ": "
          << (outcome.correct ? "correct" : "incorrect") << " (answered '"
          << outcome.answer << "')\n";
    }
    correct += outcome.correct ? 1 : 0;
    propose_total += outcome.propose_calls;
    judge_total += outcome.judge_calls;
    for (const std::string& tag : ep.tags) {
      auto& [tag_correct, tag_total] = by_tag[tag];
      tag_correct += outcome.correct ? 1 : 0;
      ++tag_total;
    }
  }
  const double n = static_cast<double>(episodes.size());
  out << "accuracy: " << format_fixed(correct / n, 3) << " (" << correct << "/"
      << episodes.size() << ")\n";
  for (const auto& [tag, counts] : by_tag) {
    out << "tag " << tag << ": "
        << format_fixed(counts.first / static_cast<double>(counts.second), 3)
        << " (" << counts.first << "/" << counts.second << ")\n";
  }
  out << "failures: " << failures << "\n";
  out << "mean backend calls: propose=" << format_fixed(propose_total / n, 1)
      << " judge=" << format_fixed(judge_total / n, 1) << "\n";
  err << "bench wall time: " << elapsed.count() << " ms\n";
  return 0;
}

struct FeedbackOptions {
  std::string trace_path;
  FeedbackAmendment amendment;
  OracleChoice oracle_override;   // only non-empty fields replace the stored ones
  std::optional<double> alpha;
  std::optional<double> u_min;
  std::optional<unsigned> seed;
  bool no_cache = false;
  std::string out_trace_path;
};

inline int cmd_feedback(const FeedbackOptions& opts, std::ostream& out,
                        std::ostream& err) {
  (void)err;
  TraceDocument td = trace_document_from_file(opts.trace_path);
  if (!opts.oracle_override.backend.empty()) {
    td.oracle.backend = opts.oracle_override.backend;
  }
  if (!opts.oracle_override.fixtures.empty()) {
    td.oracle.fixtures = opts.oracle_override.fixtures;
  }
  if (!opts.oracle_override.scenario.empty()) {
    td.oracle.scenario = opts.oracle_override.scenario;
  }
  td.oracle.cache_path = opts.oracle_override.cache_path;
  if (opts.alpha) td.discovery.alpha = *opts.alpha;
  if (opts.u_min) td.discovery.u_min = *opts.u_min;
  if (opts.seed) td.discovery.seed = *opts.seed;
  if (opts.no_cache) td.discovery.use_cache = false;

  const std::vector<HypothesisOverride> overrides =
      apply_amendment(td, opts.amendment);

  OracleHandle oracle = build_oracle(td.oracle);
  ModelDiscovery discovery(oracle.use(), td.discovery, oracle.config);
  const DiscoveryTrace trace =
      discovery.discover_from(td.timeline, td.query, td.level, overrides);
  print_answer_block(trace, out);

  if (!opts.out_trace_path.empty()) {
    TraceDocument amended = td;
    amended.result = trace_to_json(trace);
    amended.parent =
        nlohmann::ordered_json{{"file", opts.trace_path},
                               {"amendment", amendment_to_json(opts.amendment)}};
    write_json_file(trace_document_to_json(amended), opts.out_trace_path,
                    "trace file");
    out << "trace written: " << opts.out_trace_path << "\n";
  }
  return 0;
}

inline void print_posterior_table_header(const std::vector<std::string>& ids,
                                         std::ostream& out) {
  out << "step";
  for (const std::string& id : ids) out << "\t" << id;
  out << "\n";
}

inline void print_posterior_row(int step, const Distribution& d,
                                std::ostream& out) {
  out << step;
  for (double p : d.probs) out << "\t" << format_fixed(p, 6);
  out << "\n";
}

inline int cmd_gridworld_infer_goal(const std::string& scenario_path,
                                    std::ostream& out) {
  const GridScenario sc = scenario_from_file(scenario_path);
  const auto sequence =
      goal_posterior_sequence(sc.grid, sc.trajectory, sc.params, sc.prior);
  print_posterior_table_header(sequence.front().support, out);
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    print_posterior_row(static_cast<int>(i), sequence[i], out);
  }
  return 0;
}

inline int cmd_gridworld_foodtruck(const std::string& scenario_path,
                                   std::ostream& out, std::ostream& err) {
  const GridScenario sc = scenario_from_file(scenario_path);
  const FoodTruckResult result =
      foodtruck_joint_inference(sc, sc.trajectory, sc.params);
  out << "desire:\n";
  print_distribution_block(result.desire, out);
  out << "belief:\n";
  print_distribution_block(result.belief, out);
  for (const std::string& warning : result.warnings) {
    err << "warning: " << warning << "\n";
  }
  return 0;
}

inline int cmd_gridworld_pipeline(const std::string& scenario_path,
                                  DiscoveryConfig dcfg, std::ostream& out,
                                  std::ostream& err) {
  const GridScenario sc = scenario_from_file(scenario_path);
  if (sc.trajectory.size() < 2) {
    throw ScenarioError("the pipeline needs a trajectory with at least one move");
  }
  GridworldOracle oracle(sc.grid, sc.params);
  ModelDiscovery discovery(oracle, dcfg);
  const Timeline timeline = trajectory_timeline(sc.trajectory);
  const DiscoveryTrace trace =
      discovery.discover_from(timeline, goal_inference_query(sc.grid));
  // The last accepted model spans the whole trajectory once the window has
  // grown fully, which is what the direct table reports; the best-utility
  // model may be a sharper suffix window on indirect walks.
  const Distribution& posterior = trace.steps.empty()
                                      ? trace.final_report.posterior
                                      : trace.steps.back().report.posterior;
  print_posterior_table_header(posterior.support, out);
  print_posterior_row(timeline.num_steps(), posterior, out);
  err << "models evaluated: " << trace.models_evaluated << "\n";
  return 0;
}

struct TrackOptions {
  std::string scenario_path;
  SmcConfig smc;
  std::string trace_path;
};

inline int cmd_track(const TrackOptions& opts, std::ostream& out) {
  const GridScenario sc = scenario_from_file(opts.scenario_path);
  validate_trajectory(sc.grid, sc.trajectory);

  std::vector<ActionEvent> stream;
  for (std::size_t i = 0; i + 1 < sc.trajectory.size(); ++i) {
    stream.push_back({cell_text(sc.trajectory[i]),
                      to_string(move_between(sc.trajectory[i],
                                             sc.trajectory[i + 1]))});
  }
  std::vector<std::string> ids;
  for (const auto& [id, cell] : sc.grid.goals) {
    (void)cell;
    ids.push_back(id);
  }
  const GoalProposal proposal = [&ids](const std::string&, const std::string&,
                                       int) { return ids; };
  auto planner = std::make_shared<Planner>(sc.grid, sc.params);
  const GoalLikelihood likelihood = [planner](const std::string& goal,
                                              const std::string& state,
                                              const std::string& action) {
    const std::optional<Cell> cell = parse_cell(state);
    const std::optional<Move> move = parse_move(action);
    if (!cell || !move) {
      throw ScenarioError("unreadable state or action in the stream");
    }
    return planner->likelihood(*cell, *move, planner->grid().goals.at(goal));
  };

  const auto history = track(stream, proposal, likelihood, opts.smc);
  out << history_table(history);
  if (!opts.trace_path.empty()) {
    nlohmann::ordered_json doc{{"format_version", 1},
                               {"scenario", opts.scenario_path},
                               {"history", track_to_json(history)}};
    write_json_file(doc, opts.trace_path, "track trace");
    out << "trace written: " << opts.trace_path << "\n";
  }
  return 0;
}

inline int cmd_cache_info(const std::string& path, std::ostream& out) {
  NullOracle null;
  const CachingOracle cache_view(null, path);
  out << "cache entries: " << cache_view.entry_count() << "\n";
  return 0;
}

inline int cmd_cache_clear(const std::string& path, std::ostream& out) {
  std::size_t entries = 0;
  {
    NullOracle null;
    const CachingOracle cache_view(null, path);
    entries = cache_view.entry_count();
  }
  std::error_code ec;
  std::filesystem::remove(path, ec);
  if (ec) throw InputError("cannot remove cache file " + path + ": " + ec.message());
  out << "cache cleared: " << entries << " entries removed\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Argument parsing and dispatch.

namespace detail {

inline void add_oracle_flags(CLI::App* cmd, OracleChoice* choice) {
  cmd->add_option("--oracle", choice->backend, "Backend: scripted, remote or gridworld")
      ->check(CLI::IsMember({"scripted", "remote", "gridworld"}));
  cmd->add_option("--fixtures", choice->fixtures, "Fixture file for the scripted oracle");
  cmd->add_option("--scenario", choice->scenario, "Scenario file for the gridworld oracle");
  cmd->add_option("--cache", choice->cache_path, "Persistent response cache file");
  cmd->add_option("--remote-url", choice->remote_url, "Remote oracle base URL");
  cmd->add_option("--remote-model", choice->remote_model, "Remote oracle model name");
}

inline void add_discovery_flags(CLI::App* cmd, DiscoveryConfig* cfg,
                                bool* no_cache) {
  cmd->add_option("--alpha", cfg->alpha, "Complexity cost per latent variable");
  cmd->add_option("--u-min", cfg->u_min, "Utility threshold that stops discovery");
  cmd->add_option("--seed", cfg->seed, "Random seed");
  cmd->add_flag("--no-cache", *no_cache, "Disable in-run response memoization");
}

}  // namespace detail

/// Entry point behind main(). Returns the process exit code; error categories
/// map to stable codes so scripts can branch on the failure class.
inline int run_cli(int argc, const char* const* argv, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Bayesian inverse-planning engine for questions about what "
               "story characters believe, want and will do"};
  app.require_subcommand(1);

  RunOptions answer_opts;
  bool answer_no_cache = false;
  CLI::App* answer = app.add_subcommand("answer", "Answer one episode file");
  answer->add_option("episode", answer_opts.episode_path, "Episode JSON file")
      ->required();
  detail::add_oracle_flags(answer, &answer_opts.oracle);
  detail::add_discovery_flags(answer, &answer_opts.discovery, &answer_no_cache);
  answer->add_option("--trace", answer_opts.trace_path, "Write the trace here");

  BenchOptions bench_opts;
  bool bench_no_cache = false;
  CLI::App* bench = app.add_subcommand("bench", "Score an episode set");
  bench->add_option("episodes", bench_opts.episodes_path, "Episode set JSON file")
      ->required();
  detail::add_oracle_flags(bench, &bench_opts.oracle);
  detail::add_discovery_flags(bench, &bench_opts.discovery, &bench_no_cache);
  bench->add_option("--jobs", bench_opts.jobs, "Worker thread count");

  FeedbackOptions feedback_opts;
  double fb_alpha = 0.0;
  double fb_u_min = 0.0;
  unsigned fb_seed = 0;
  CLI::App* feedback = app.add_subcommand(
      "feedback", "Amend one element of a trace and re-run discovery");
  feedback->add_option("trace_file", feedback_opts.trace_path, "Trace JSON file")
      ->required();
  feedback->add_option("--target", feedback_opts.amendment.target,
                       "What to amend: extraction, hypotheses or clamp")
      ->required()
      ->check(CLI::IsMember({"extraction", "hypotheses", "clamp"}));
  feedback->add_option("--step", feedback_opts.amendment.step, "1-based timestep");
  feedback->add_option("--field", feedback_opts.amendment.field,
                       "Extraction field: state, action or utterance");
  feedback->add_option("--kind", feedback_opts.amendment.kind,
                       "Hypotheses variable kind: observation, belief or goal");
  feedback->add_option("--agent", feedback_opts.amendment.agent,
                       "Agent the amended variable belongs to");
  feedback->add_option("--replacement", feedback_opts.amendment.replacement,
                       "Replacement text (JSON array for hypotheses)")
      ->required();
  feedback->add_option("--oracle", feedback_opts.oracle_override.backend,
                       "Override the stored oracle backend")
      ->check(CLI::IsMember({"scripted", "remote", "gridworld"}));
  feedback->add_option("--fixtures", feedback_opts.oracle_override.fixtures,
                       "Override the stored fixture file");
  feedback->add_option("--scenario", feedback_opts.oracle_override.scenario,
                       "Override the stored scenario file");
  feedback->add_option("--cache", feedback_opts.oracle_override.cache_path,
                       "Persistent response cache file");
  feedback->add_option("--alpha", fb_alpha, "Override the stored alpha");
  feedback->add_option("--u-min", fb_u_min, "Override the stored threshold");
  feedback->add_option("--seed", fb_seed, "Override the stored seed");
  feedback->add_flag("--no-cache", feedback_opts.no_cache,
                     "Disable in-run response memoization");
  feedback->add_option("--trace", feedback_opts.out_trace_path,
                       "Write the new trace here");

  std::string gw_scenario;
  DiscoveryConfig gw_discovery;
  CLI::App* gridworld =
      app.add_subcommand("gridworld", "Exact gridworld inference");
  gridworld->require_subcommand(1);
  CLI::App* infer_goal = gridworld->add_subcommand(
      "infer-goal", "Per-step goal posterior over a trajectory");
  infer_goal->add_option("scenario", gw_scenario, "Scenario JSON file")->required();
  CLI::App* foodtruck = gridworld->add_subcommand(
      "foodtruck", "Joint desire/belief inference with occlusion");
  foodtruck->add_option("scenario", gw_scenario, "Scenario JSON file")->required();
  CLI::App* pipeline = gridworld->add_subcommand(
      "pipeline", "Model discovery over the gridworld oracle");
  pipeline->add_option("scenario", gw_scenario, "Scenario JSON file")->required();
  pipeline->add_option("--alpha", gw_discovery.alpha, "Complexity cost");
  CLI::Option* pipeline_u_min = pipeline->add_option(
      "--u-min", gw_discovery.u_min, "Utility threshold that stops discovery");
  pipeline->add_option("--seed", gw_discovery.seed, "Random seed");

  TrackOptions track_opts;
  CLI::App* track_cmd = app.add_subcommand(
      "track", "Online goal filtering over a scenario's trajectory");
  track_cmd->add_option("scenario", track_opts.scenario_path, "Scenario JSON file")
      ->required();
  track_cmd->add_option("--k", track_opts.smc.k, "Particle population size");
  track_cmd->add_option("--p-min", track_opts.smc.p_min, "Survival threshold");
  track_cmd->add_option("--seed", track_opts.smc.seed, "Random seed");
  track_cmd->add_option("--trace", track_opts.trace_path, "Write the history here");

  std::string cache_path;
  CLI::App* cache_cmd = app.add_subcommand("cache", "Inspect or clear a cache file");
  cache_cmd->require_subcommand(1);
  CLI::App* cache_info = cache_cmd->add_subcommand("info", "Count cached entries");
  cache_info->add_option("path", cache_path, "Cache file")->required();
  CLI::App* cache_clear = cache_cmd->add_subcommand("clear", "Delete the cache file");
  cache_clear->add_option("path", cache_path, "Cache file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorCategory::Config);
  }

  try {
    if (*answer) {
      answer_opts.discovery.use_cache = !answer_no_cache;
      return cmd_answer(answer_opts, out, err);
    }
    if (*bench) {
      bench_opts.discovery.use_cache = !bench_no_cache;
      return cmd_bench(bench_opts, out, err);
    }
    if (*feedback) {
      if (feedback->count("--alpha")) feedback_opts.alpha = fb_alpha;
      if (feedback->count("--u-min")) feedback_opts.u_min = fb_u_min;
      if (feedback->count("--seed")) feedback_opts.seed = fb_seed;
      return cmd_feedback(feedback_opts, out, err);
    }
    if (*gridworld) {
      if (*infer_goal) return cmd_gridworld_infer_goal(gw_scenario, out);
      if (*foodtruck) return cmd_gridworld_foodtruck(gw_scenario, out, err);
      // Left alone, the pipeline keeps widening the window so its posterior
      // covers the whole trajectory, like the direct sequence does.
      if (!pipeline_u_min->count()) gw_discovery.u_min = 1e9;
      return cmd_gridworld_pipeline(gw_scenario, gw_discovery, out, err);
    }
    if (*track_cmd) return cmd_track(track_opts, out);
    if (*cache_cmd) {
      if (*cache_info) return cmd_cache_info(cache_path, out);
      return cmd_cache_clear(cache_path, out);
    }
    throw InternalError("no subcommand dispatched");
  } catch (const Error& e) {
    err << "error (" << category_name(e.category()) << "): " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    err << "error (internal): " << e.what() << "\n";
    return static_cast<int>(ErrorCategory::Internal);
  }
}

}  // namespace invplan
