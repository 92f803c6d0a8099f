// granno: generate / analyze / annotate / evaluate

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "granno/analysis/coverage.hpp"
#include "granno/annotation/loop.hpp"
#include "granno/annotation/serve.hpp"
#include "granno/grammar/pair_io.hpp"
#include "granno/parser/retrieval.hpp"

using namespace granno;
using nlohmann::json;

namespace {

std::vector<size_t> parse_depths(const std::string& text) {
  std::vector<size_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    size_t used = 0;
    long long d = std::stoll(part, &used);
    if (used != part.size() || d < 1) throw Error("bad depth '" + part + "'");
    out.push_back(static_cast<size_t>(d));
  }
  if (out.empty()) throw Error("no depths given");
  return out;
}

json nan_as_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

// Utterances only; an `lf` field, if present, is ignored here.
std::vector<std::string> read_utterances(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    try {
      out.push_back(json::parse(line).at("utterance").get<std::string>());
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

int run_generate(const std::string& grammar_path, size_t depth, bool prune_unlikely,
                 const std::string& out) {
  auto g = load_grammar(grammar_path);
  auto all = generate(g, depth);
  auto kept = prune(all, g.schema(), {.prune_unlikely = prune_unlikely});
  SortedPairWriter writer(out);
  for (auto& p : kept) writer.add(std::move(p));
  size_t n = writer.finish();
  std::cerr << "generated " << all.size() << " pairs, kept " << n << " after pruning\n";
  return 0;
}

int run_analyze(const std::string& nat_path, const std::string& on_path, const std::string& grammar_path,
                const std::string& depths, bool as_json) {
  auto nat = Dataset::load(nat_path, DatasetKind::Natural);
  auto on = Dataset::load(on_path, DatasetKind::Generated);
  std::optional<Grammar> g;
  if (!grammar_path.empty()) g = load_grammar(grammar_path);
  const Schema* schema = g ? &g->schema() : nullptr;
  if (schema == nullptr) throw Error("analyze needs --grammar for the schema");

  auto report = mismatch_report(nat, on, *schema);
  std::optional<CoverageReport> curve;
  if (!depths.empty()) curve = coverage_curve(nat, *g, parse_depths(depths));

  if (as_json) {
    json j = {{"mismatch", report.to_json()}};
    if (curve) j["coverage_curve"] = curve->to_json();
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << report.to_text();
    if (curve) std::cout << '\n' << curve->to_text();
  }
  return 0;
}

struct AnnotateArgs {
  std::string pool, unlabeled, embeddings, grammar, worker = "oracle", gold, out, snapshot;
  size_t k = 5, m = 100, max_iters = 15;
  uint64_t seed = 0;
  bool resume = false;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  double timeout_s = 3600;
  double lease_s = 300;
  std::string model_out;
};

std::atomic<TaskQueue*> g_queue{nullptr};

void on_signal(int) {
  if (TaskQueue* q = g_queue.load()) q->close();
}

int run_annotate(const AnnotateArgs& a) {
  auto g = load_grammar(a.grammar);
  auto table = load_embeddings(a.embeddings);
  Featurizer featurizer(table, EntityMatcher(g));
  const Schema& schema = g.schema();
  CandidatePool pool(read_pairs(a.pool), featurizer, schema);
  std::cerr << "pool: " << pool.size() << " pairs\n";

  std::map<std::string, LogicalForm> gold;
  if (!a.gold.empty()) {
    for (auto& e : Dataset::load(a.gold, DatasetKind::Natural).examples) gold.emplace(e.utterance, e.lf);
  }

  std::string snapshot = a.snapshot.empty() ? a.out + ".state.json" : a.snapshot;
  AnnotationState state;
  if (a.resume && std::filesystem::exists(snapshot)) {
    state = AnnotationState::load(snapshot, pool);
    std::cerr << "resumed at t=" << state.t << ", cov " << state.cov() << '\n';
  } else {
    std::vector<UnlabeledItem> items;
    for (auto& u : read_utterances(a.unlabeled)) {
      auto it = gold.find(u);
      items.push_back({u, it == gold.end() ? std::nullopt : std::optional<LogicalForm>(it->second)});
    }
    state = AnnotationState::start(std::move(items), a.seed);
  }

  LoopOptions options;
  options.k = a.k;
  options.m = a.m;
  options.max_iters = a.max_iters;

  std::unique_ptr<Worker> worker;
  std::unique_ptr<TaskQueue> queue;
  std::unique_ptr<AnnotationServer> server;
  ProgressBoard progress;
  progress.set({state.t, state.cov(), std::nullopt});

  const std::string& w = a.worker;
  if (w == "oracle" || w.rfind("noisy:", 0) == 0) {
    if (gold.empty()) throw Error("--worker " + w + " needs --gold");
    double p = 0.0;
    if (w != "oracle") {
      size_t used = 0;
      std::string rate = w.substr(6);
      try {
        p = std::stod(rate, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != rate.size()) throw Error("bad error rate in '" + w + "'");
    }
    worker = std::make_unique<OracleWorker>(gold, schema, p, a.seed);
  } else if (w == "serve") {
    queue = std::make_unique<TaskQueue>(std::chrono::milliseconds(static_cast<long long>(a.lease_s * 1000)));
    server = std::make_unique<AnnotationServer>(*queue, progress, a.static_dir);
    int port = server->start(a.host, a.port);
    std::cerr << "serving on http://" << a.host << ":" << port << "/\n";
    worker = std::make_unique<QueueWorker>(*queue,
                                           std::chrono::milliseconds(static_cast<long long>(a.timeout_s * 1000)));
    g_queue = queue.get();
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
  } else {
    throw Error("unknown worker '" + w + "' (oracle, noisy:p or serve)");
  }

  AnnotationLoop loop(pool, featurizer, schema, std::move(state), options);
  bool interrupted = false;
  if (!loop.state().converged) {
    try {
      loop.run_until_convergence(*worker, [&](const AnnotationState& s) {
        const auto& m = s.history.back();
        std::cerr << m.to_json().dump() << '\n';
        progress.set({s.t, s.cov(), m.cw_acc});
        s.save(snapshot, pool);
      });
    } catch (const Interrupted&) {
      interrupted = true;
    }
  }
  if (server) server->stop();
  if (interrupted) {
    std::cerr << "interrupted at t=" << loop.state().t << "; continue with --resume\n";
    loop.state().save(snapshot, pool);
    return 2;
  }

  const auto& s = loop.state();
  std::cerr << "stopped: " << s.stop_reason << ", cov " << s.cov() << " after " << s.t << " iterations\n";
  s.save(snapshot, pool);
  export_dataset(s, pool, a.out);
  if (!a.model_out.empty()) s.model.save(a.model_out);
  if (!s.converged) {
    std::cerr << "not converged; continue with --resume\n";
    return 2;
  }
  return 0;
}

int run_evaluate(const std::string& train_path, const std::string& test_path, const std::string& kb_path,
                 const std::string& split_path, const std::string& grammar_path,
                 const std::string& embeddings_path, const std::string& model_path) {
  auto kb = KnowledgeBase::load(kb_path);
  auto g = load_grammar(grammar_path);
  auto table = load_embeddings(embeddings_path);
  Featurizer featurizer(table, EntityMatcher(g));
  auto train = Dataset::load(train_path, DatasetKind::Annotated);
  auto test = Dataset::load(test_path, DatasetKind::Natural);
  test.validate(kb.schema());
  ScorerModel similarity = model_path.empty() ? ScorerModel::s0() : ScorerModel::load(model_path);
  auto parser = train_parser(train, featurizer, kb.schema(), similarity);
  auto ev = evaluate(parser, test, kb);

  json out = {{"accuracy", ev.accuracy}, {"acc_cov", nullptr}, {"acc_disj", nullptr}, {"n", test.size()}};
  if (!split_path.empty()) {
    auto on = Dataset::load(split_path, DatasetKind::Generated);
    auto cov = template_coverage(test, on, kb.schema());
    auto split = split_accuracy(test, ev.predictions, kb, cov.partition);
    for (const auto& w : split.warnings) std::cerr << "warning: " << w << '\n';
    out["acc_cov"] = nan_as_null(split.acc_cov);
    out["acc_disj"] = nan_as_null(split.acc_disj);
    out["n_cov"] = split.n_cov;
    out["n_disj"] = split.n_disj;
  }
  std::cout << out.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grammar-driven paraphrase annotation"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "enumerate canonical utterances up to a depth");
  std::string gen_grammar, gen_out;
  size_t gen_depth = 0;
  bool gen_unlikely = false;
  gen->add_option("--grammar", gen_grammar, "grammar file")->required()->check(CLI::ExistingFile);
  gen->add_option("--max-depth", gen_depth, "maximum derivation depth")->required()->check(CLI::Range(1, 64));
  gen->add_flag("--prune-unlikely", gen_unlikely, "also drop forms flagged as unlikely");
  gen->add_option("--out", gen_out, "output JSON lines")->required();

  auto* ana = app.add_subcommand("analyze", "template coverage and mismatch report");
  std::string nat, on, ana_grammar, depths;
  bool ana_json = false;
  ana->add_option("--nat", nat, "natural dataset")->required()->check(CLI::ExistingFile);
  ana->add_option("--on", on, "generated dataset")->required()->check(CLI::ExistingFile);
  ana->add_option("--grammar", ana_grammar, "grammar file (schema, and the curve)")
      ->required()
      ->check(CLI::ExistingFile);
  ana->add_option("--depths", depths, "comma-separated depths for a coverage curve, e.g. 3,4,5");
  ana->add_flag("--json", ana_json, "print JSON instead of columns");

  auto* ann = app.add_subcommand("annotate", "run the detect-and-retrain loop");
  AnnotateArgs aa;
  ann->add_option("--pool", aa.pool, "generated pairs")->required()->check(CLI::ExistingFile);
  ann->add_option("--unlabeled", aa.unlabeled, "utterances, JSON lines with `utterance`")->check(CLI::ExistingFile);
  ann->add_option("--embeddings", aa.embeddings, "word vectors")->required()->check(CLI::ExistingFile);
  ann->add_option("--grammar", aa.grammar, "grammar file (schema and entity lexicon)")
      ->required()
      ->check(CLI::ExistingFile);
  ann->add_option("--worker", aa.worker, "oracle, noisy:p or serve")->capture_default_str();
  ann->add_option("--gold", aa.gold, "gold forms by utterance")->check(CLI::ExistingFile);
  ann->add_option("--k", aa.k, "candidates shown per task")->capture_default_str();
  ann->add_option("--m", aa.m, "candidates kept for negatives")->capture_default_str();
  ann->add_option("--max-iters", aa.max_iters, "iteration cap")->capture_default_str();
  ann->add_option("--seed", aa.seed, "task order and worker noise seed")->capture_default_str();
  ann->add_option("--out", aa.out, "annotated dataset")->required();
  ann->add_option("--snapshot", aa.snapshot, "state file (default <out>.state.json)");
  ann->add_flag("--resume", aa.resume, "continue from the snapshot if present");
  ann->add_option("--save-model", aa.model_out, "write the final scorer");
  ann->add_option("--host", aa.host, "serve: bind address")->capture_default_str();
  ann->add_option("--port", aa.port, "serve: port, 0 for any")->capture_default_str();
  ann->add_option("--static", aa.static_dir, "serve: directory served under /")->check(CLI::ExistingDirectory);
  ann->add_option("--timeout", aa.timeout_s, "serve: seconds to wait for one iteration")->capture_default_str();
  ann->add_option("--lease", aa.lease_s, "serve: seconds before an unanswered task is reoffered")
      ->capture_default_str();

  auto* ev = app.add_subcommand("evaluate", "denotation accuracy of the retrieval parser");
  std::string train, test, kb, split, ev_grammar, ev_embeddings, ev_model;
  ev->add_option("--train", train, "training dataset")->required()->check(CLI::ExistingFile);
  ev->add_option("--test", test, "test dataset")->required()->check(CLI::ExistingFile);
  ev->add_option("--kb", kb, "knowledge base JSON")->required()->check(CLI::ExistingFile);
  ev->add_option("--split-by-coverage", split, "generated pairs defining covered/disjoint")
      ->check(CLI::ExistingFile);
  ev->add_option("--grammar", ev_grammar, "grammar file (entity lexicon)")->required()->check(CLI::ExistingFile);
  ev->add_option("--embeddings", ev_embeddings, "word vectors")->required()->check(CLI::ExistingFile);
  ev->add_option("--model", ev_model, "scorer used as similarity (default s0)")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_generate(gen_grammar, gen_depth, gen_unlikely, gen_out);
    if (*ana) return run_analyze(nat, on, ana_grammar, depths, ana_json);
    if (*ann) {
      if (!aa.resume && aa.unlabeled.empty()) throw Error("--unlabeled is required unless resuming");
      return run_annotate(aa);
    }
    if (*ev) return run_evaluate(train, test, kb, split, ev_grammar, ev_embeddings, ev_model);
  } catch (const std::exception& e) {
    std::cerr << "granno: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
