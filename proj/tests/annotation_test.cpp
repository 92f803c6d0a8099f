#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "granno/analysis/coverage.hpp"
#include "granno/annotation/loop.hpp"
#include "granno/annotation/serve.hpp"
#include "granno/logic/template.hpp"
#include "granno/logic/typing.hpp"
#include "oracles/template_oracle.hpp"
#include "support/toy_grammar.hpp"

using namespace granno;
using namespace std::chrono_literals;
using granno::testing::data_path;
using granno::testing::toy_grammar;

namespace {

LogicalForm P(const char* s) { return LogicalForm::parse(s); }

const Schema& schema() { return toy_grammar().schema(); }

const Featurizer& featurizer() {
  static const EmbeddingTable table = load_embeddings(data_path("toy/embeddings.txt"));
  static const Featurizer f(table, EntityMatcher(toy_grammar()));
  return f;
}

const std::vector<GeneratedPair>& pairs5() {
  static const auto p = prune(generate(toy_grammar(), 5), schema());
  return p;
}

const CandidatePool& pool5() {
  static const CandidatePool pool(pairs5(), featurizer(), schema());
  return pool;
}

const Dataset& natural() {
  static const Dataset d = Dataset::load(data_path("toy/natural.jsonl"), DatasetKind::Natural);
  return d;
}

std::vector<UnlabeledItem> natural_items() {
  std::vector<UnlabeledItem> out;
  for (const auto& e : natural().examples) out.push_back({e.utterance, e.lf});
  return out;
}

std::map<std::string, LogicalForm> gold_of(const std::vector<UnlabeledItem>& items) {
  std::map<std::string, LogicalForm> g;
  for (const auto& i : items) g.emplace(i.utterance, *i.gold);
  return g;
}

std::map<std::string, std::string> entity_types() {
  std::map<std::string, std::string> out;
  for (const auto* c : schema().constants()) {
    if (c->kind == ConstantKind::Entity) out[c->id] = c->type();
  }
  return out;
}

Task task_with(std::string utterance, std::initializer_list<const char*> lfs) {
  Task t{"t0-0", std::move(utterance), {}, 0};
  for (const char* s : lfs) t.candidates.push_back({s, P(s)});
  return t;
}

// Replays OracleWorker answers but drops every third task.
class FlakyWorker : public Worker {
 public:
  explicit FlakyWorker(OracleWorker& inner) : inner_(&inner) {}
  std::vector<std::optional<WorkerResponse>> annotate(std::span<const Task> tasks) override {
    auto out = inner_->annotate(tasks);
    for (size_t i = 0; i < out.size(); i += 3) out[i].reset();
    return out;
  }

 private:
  OracleWorker* inner_;
};

class SilentWorker : public Worker {
 public:
  std::vector<std::optional<WorkerResponse>> annotate(std::span<const Task> tasks) override {
    return std::vector<std::optional<WorkerResponse>>(tasks.size());
  }
};

void check_state_invariants(const AnnotationState& s) {
  std::set<size_t> seen(s.unlabeled.begin(), s.unlabeled.end());
  for (const auto& l : s.labeled) CHECK(seen.insert(l.item).second);
  CHECK(seen.size() == s.items.size());
  CHECK(s.history.size() == s.t);
  for (size_t i = 1; i < s.history.size(); ++i) CHECK(s.history[i].cov >= s.history[i - 1].cov);
  std::set<std::pair<size_t, size_t>> pos;
  for (const auto& p : s.s_pos) pos.emplace(p.item, p.candidate);
  for (const auto& p : s.s_neg) CHECK_FALSE(pos.contains({p.item, p.candidate}));
  CHECK(s.s_pos.size() == s.labeled.size());
}

}  // namespace

TEST_CASE("categorize_detection") {
  const auto& s = schema();
  SUBCASE("examples") {
    CHECK(categorize_detection(P("(and (unary place) (join high_point (entity california)))"),
                               P("(join high_point (entity california))"), s) ==
          Detection::EquivalentUnder);
    CHECK(categorize_detection(P("(join high_point (entity california))"),
                               P("(and (unary place) (join high_point (entity california)))"), s) ==
          Detection::EquivalentOver);
    CHECK(categorize_detection(P("(join borders (entity texas))"),
                               P("(join borders (entity texas))"), s) == Detection::Exact);
    CHECK(categorize_detection(
              P("(argmax area (and (unary state) (join borders (entity texas))))"),
              P("(argmax population (and (unary state) (join borders (entity texas))))"), s) ==
          Detection::PartiallyWrong);
    CHECK(categorize_detection(P("(count (unary state))"), P("(sum length (unary river))"), s) ==
          Detection::Wrong);
    CHECK(categorize_detection(
              P("(and (unary state) (join borders (entity texas)))"),
              P("(and (unary state) (join borders (entity nevada)))"), s) == Detection::Exact);
    CHECK(categorize_detection(
              P("(and (unary state) (join borders (entity texas)))"),
              P("(and (unary state) (not (join borders (entity texas))))"), s) ==
          Detection::PartiallyWrong);
    CHECK(categorize_detection(P("(argmax area (unary state))"), P("(unary state)"), s) ==
          Detection::EquivalentUnder);
  }
  SUBCASE("agrees with the text-level oracle on generated pairs") {
    const auto& pool = pairs5();
    auto types = entity_types();
    std::mt19937 rng(21);
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    std::set<std::string> seen;
    auto check = [&](const LogicalForm& g, const LogicalForm& d) {
      std::string got = to_string(categorize_detection(g, d, schema()));
      CHECK_MESSAGE(got == oracle::categorize(g.str(), d.str(), types), g.str() << " vs " << d.str());
      seen.insert(got);
    };
    for (int i = 0; i < 3000; ++i) check(pool[pick(rng)].lf, pool[pick(rng)].lf);
    // Sub- and super-conjunctions are rare at random; add them directly.
    for (const auto& p : pool) {
      auto conj = flatten_conjunction(p.lf);
      if (conj.size() < 2) continue;
      auto part = build_conjunction(std::span(conj).subspan(1));
      if (!try_typecheck(part, schema())) continue;
      check(p.lf, part);
      check(part, p.lf);
    }
    for (const char* bucket : {"exact", "equivalent-under", "equivalent-over", "partially-wrong",
                               "wrong"}) {
      CHECK_MESSAGE(seen.contains(bucket), bucket);
    }
  }
}

TEST_CASE("oracle worker") {
  std::map<std::string, LogicalForm> gold{
      {"rivers in texas", P("(and (unary river) (join traverses (entity texas)))")},
      {"states next to oregon", P("(and (unary state) (join borders (entity oregon)))")}};
  OracleWorker perfect(gold, schema());
  SUBCASE("selects gold when shown") {
    auto t = task_with("rivers in texas", {"(unary river)",
                                           "(and (unary river) (join traverses (entity texas)))",
                                           "(count (unary river))"});
    CHECK(perfect.respond(t).selection == 1u);
  }
  SUBCASE("prefers the exact form over a template match") {
    auto t = task_with("rivers in texas",
                       {"(and (join traverses (entity texas)) (unary river))",
                        "(and (unary river) (join traverses (entity texas)))"});
    CHECK(perfect.respond(t).selection == 1u);
    auto u = task_with("rivers in texas",
                       {"(unary river)", "(and (join traverses (entity texas)) (unary river))"});
    CHECK(perfect.respond(u).selection == 1u);
  }
  SUBCASE("none when gold is absent") {
    auto t = task_with("rivers in texas", {"(unary river)", "(count (unary river))"});
    CHECK_FALSE(perfect.respond(t).selection.has_value());
  }
  SUBCASE("always wrong, gold alone") {
    OracleWorker bad(gold, schema(), 1.0);
    auto t = task_with("rivers in texas", {"(and (unary river) (join traverses (entity texas)))"});
    CHECK_FALSE(bad.respond(t).selection.has_value());
    auto u = task_with("rivers in texas", {"(and (unary river) (join traverses (entity texas)))",
                                           "(unary river)"});
    CHECK(bad.respond(u).selection == 1u);
  }
  SUBCASE("unknown utterance") {
    CHECK_THROWS_AS(perfect.respond(task_with("what", {"(unary river)"})), MissingGold);
  }
  SUBCASE("invalid error rate") {
    CHECK_THROWS_AS(OracleWorker(gold, schema(), 1.5), Error);
  }
  SUBCASE("error frequency and determinism") {
    const double p = 0.15;
    OracleWorker noisy(gold, schema(), p, 99);
    size_t n = 4000, errors = 0;
    for (size_t i = 0; i < n; ++i) {
      auto t = task_with("states next to oregon",
                         {"(unary state)", "(and (unary state) (join borders (entity oregon)))",
                          "(join borders (entity oregon))"});
      t.task_id = "t0-" + std::to_string(i);
      auto r = noisy.respond(t);
      REQUIRE(r.selection.has_value());
      errors += *r.selection != 1;
      CHECK(noisy.respond(t).selection == r.selection);
    }
    double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
    CHECK(std::abs(static_cast<double>(errors) / static_cast<double>(n) - p) < 4 * sigma);
  }
}

TEST_CASE("candidate pool") {
  const auto& pool = pool5();
  CHECK(pool.size() == pairs5().size());
  const auto& p = pairs5()[17];
  CHECK(pool.find(p.canonical, p.lf) == 17u);
  CHECK_FALSE(pool.find("no such canonical", p.lf));
  CHECK(pool.template_key(17) == template_key(p.lf, schema()));
  CHECK_THROWS_AS(CandidatePool({}, featurizer(), schema()), EmptyInput);
}

TEST_CASE("annotation loop on self-paraphrases") {
  // Utterances equal to canonical utterances: s0 ranks gold first.
  std::vector<UnlabeledItem> items;
  for (size_t i = 0; i < pairs5().size(); i += 97) {
    items.push_back({pairs5()[i].canonical, pairs5()[i].lf});
  }
  OracleWorker worker(gold_of(items), schema());
  SUBCASE("everything is labeled in one iteration") {
    AnnotationLoop loop(pool5(), featurizer(), schema(), AnnotationState::start(items, 3));
    const auto& m = loop.run_iteration(worker);
    CHECK(m.newly_labeled == items.size());
    CHECK(m.cov == 1.0);
    CHECK(m.cw_acc == 1.0);
    CHECK(loop.state().unlabeled.empty());
    CHECK(loop.state().converged);
    check_state_invariants(loop.state());
  }
  SUBCASE("a missing gold pair leaves its utterance unlabeled") {
    std::vector<GeneratedPair> reduced;
    for (const auto& p : pairs5()) {
      if (template_key(p.lf, schema()) != template_key(*items[0].gold, schema())) {
        reduced.push_back(p);
      }
    }
    CandidatePool pool(reduced, featurizer(), schema());
    AnnotationLoop loop(pool, featurizer(), schema(), AnnotationState::start(items, 3));
    loop.run_until_convergence(worker);
    REQUIRE(loop.state().unlabeled.size() == 1);
    CHECK(loop.state().unlabeled[0] == 0u);
    CHECK(loop.state().stop_reason == "no new labels");
    check_state_invariants(loop.state());
  }
  SUBCASE("negatives are the top M minus the selection") {
    LoopOptions opt;
    opt.m = 7;
    AnnotationLoop loop(pool5(), featurizer(), schema(), AnnotationState::start(items, 3), opt);
    loop.run_iteration(worker);
    size_t expect = 0;
    for (const auto& it : items) {
      auto x = featurizer().prepare(tokenize(it.utterance));
      expect += std::min(opt.m, entity_filtered(x.entities, pool5().entities()).size()) - 1;
    }
    CHECK(loop.state().s_neg.size() == expect);
    check_state_invariants(loop.state());
  }
  SUBCASE("tasks carry at most K distinct candidates") {
    LoopOptions opt;
    opt.k = 3;
    AnnotationLoop loop(pool5(), featurizer(), schema(), AnnotationState::start(items, 3), opt);
    auto tasks = loop.tasks();
    CHECK(tasks.size() == items.size());
    std::set<std::string> ids;
    for (const auto& t : tasks) {
      CHECK(ids.insert(t.task_id).second);
      CHECK(t.candidates.size() >= 1);
      CHECK(t.candidates.size() <= 3);
      std::set<std::string> c;
      for (const auto& cand : t.candidates) CHECK(c.insert(cand.canonical + cand.lf.str()).second);
    }
  }
}

TEST_CASE("annotation loop options and trivial runs") {
  CHECK_THROWS_AS(AnnotationLoop(pool5(), featurizer(), schema(), AnnotationState::start({}, 0),
                                 LoopOptions{6, 5, 15, true, {}}),
                  Error);
  CHECK_THROWS_AS(AnnotationLoop(pool5(), featurizer(), schema(), AnnotationState::start({}, 0),
                                 LoopOptions{0, 5, 15, true, {}}),
                  Error);
  AnnotationLoop empty(pool5(), featurizer(), schema(), AnnotationState::start({}, 0));
  OracleWorker w({}, schema());
  empty.run_until_convergence(w);
  CHECK(empty.state().converged);
  CHECK(empty.state().labeled.empty());
  CHECK(empty.state().t == 0);
}

TEST_CASE("annotation loop on the toy natural set") {
  auto items = natural_items();
  OracleWorker worker(gold_of(items), schema());
  auto run = [&](uint64_t seed) {
    AnnotationLoop loop(pool5(), featurizer(), schema(), AnnotationState::start(items, seed));
    loop.run_until_convergence(worker);
    return loop.state();
  };
  auto s = run(5);
  check_state_invariants(s);
  CHECK(s.converged);
  CHECK(s.t <= 10);
  for (const auto& m : s.history) {
    if (m.judged > 0) CHECK(m.cw_acc == 1.0);
    CHECK(m.false_positives.empty());
  }
  for (const auto& l : s.labeled) {
    CHECK(template_key(pool5().pair(l.candidate).lf, schema()) ==
          template_key(*s.items[l.item].gold, schema()));
  }
  double bound = template_coverage(natural(), Dataset::from_pairs(pairs5(), "on"), schema()).fraction;
  CHECK(s.cov() <= bound);
  CHECK(s.cov() > 0.5);
  SUBCASE("reruns are bit-identical") {
    CHECK(run(5).to_json(pool5()).dump() == s.to_json(pool5()).dump());
  }
  SUBCASE("export") {
    auto path = std::filesystem::temp_directory_path() / "granno_dga.jsonl";
    export_dataset(s, pool5(), path);
    auto back = Dataset::load(path, DatasetKind::Annotated);
    CHECK(back.size() == static_cast<size_t>(std::lround(s.cov() * static_cast<double>(s.items.size()))));
    auto d = s.dataset(pool5());
    REQUIRE(back.size() == d.size());
    for (size_t i = 0; i < d.size(); ++i) {
      CHECK(back.examples[i].utterance == d.examples[i].utterance);
      CHECK(back.examples[i].lf == d.examples[i].lf);
    }
    std::filesystem::remove(path);
  }
  SUBCASE("skipped tasks are retried") {
    FlakyWorker flaky(worker);
    AnnotationLoop loop(pool5(), featurizer(), schema(), AnnotationState::start(items, 5));
    const auto& m = loop.run_iteration(flaky);
    CHECK(m.skipped == (items.size() + 2) / 3);
    CHECK(loop.state().unlabeled.size() >= m.skipped);
    check_state_invariants(loop.state());
  }
  SUBCASE("an unanswered iteration stops without converging") {
    SilentWorker silent;
    AnnotationLoop loop(pool5(), featurizer(), schema(), AnnotationState::start(items, 5));
    loop.run_until_convergence(silent);
    CHECK_FALSE(loop.state().converged);
    CHECK(loop.state().stop_reason == "no responses");
    CHECK(loop.state().t == 1);
    CHECK(loop.state().last_tasks.empty());
    AnnotationLoop resumed(pool5(), featurizer(), schema(), loop.state());
    resumed.run_until_convergence(worker);
    CHECK(resumed.state().converged);
    CHECK(resumed.state().cov() == doctest::Approx(s.cov()));
  }
}

TEST_CASE("export and snapshots") {
  auto dir = std::filesystem::temp_directory_path();
  SUBCASE("empty export has only the header") {
    auto path = dir / "granno_empty.jsonl";
    export_dataset(AnnotationState::start({}, 0), pool5(), path);
    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line.rfind("#", 0) == 0);
    CHECK_FALSE(std::getline(in, line));
    CHECK(Dataset::load(path, DatasetKind::Annotated).empty());
    std::filesystem::remove(path);
  }
  SUBCASE("resume equals an uninterrupted run") {
    auto items = natural_items();
    OracleWorker worker(gold_of(items), schema());
    AnnotationLoop straight(pool5(), featurizer(), schema(), AnnotationState::start(items, 9));
    straight.run_until_convergence(worker);

    AnnotationLoop first(pool5(), featurizer(), schema(), AnnotationState::start(items, 9));
    first.run_iteration(worker);
    auto path = dir / "granno_state.json";
    first.state().save(path, pool5());
    AnnotationLoop resumed(pool5(), featurizer(), schema(), AnnotationState::load(path, pool5()));
    resumed.run_until_convergence(worker);
    CHECK(resumed.state().to_json(pool5()).dump() == straight.state().to_json(pool5()).dump());
    std::filesystem::remove(path);
  }
  SUBCASE("bad snapshot") {
    auto path = dir / "granno_bad_state.json";
    std::ofstream(path) << "{\"seed\": 1}";
    CHECK_THROWS_AS(AnnotationState::load(path, pool5()), FormatError);
    std::filesystem::remove(path);
  }
}

TEST_CASE("task queue") {
  TaskQueue q(50ms);
  auto tasks = std::vector<Task>{task_with("a", {"(unary river)", "(unary state)"}),
                                 task_with("b", {"(unary river)"})};
  tasks[1].task_id = "t0-1";
  q.publish(tasks);
  CHECK(q.size() == 2);
  auto first = q.lease();
  auto second = q.lease();
  REQUIRE(first);
  REQUIRE(second);
  CHECK(first->task_id != second->task_id);
  CHECK_FALSE(q.lease());
  std::this_thread::sleep_for(80ms);
  auto again = q.lease();
  REQUIRE(again);
  CHECK(again->task_id == "t0-0");

  CHECK(q.submit({"t0-0", 5}) == TaskQueue::Submit::BadSelection);
  CHECK(q.submit({"t0-0", 1}) == TaskQueue::Submit::Accepted);
  CHECK(q.submit({"t0-0", 0}) == TaskQueue::Submit::Duplicate);
  CHECK(q.submit({"nope", 0}) == TaskQueue::Submit::UnknownTask);
  CHECK(q.outstanding() == 1);
  auto got = q.collect(20ms);
  REQUIRE(got.size() == 2);
  CHECK(got[0]->selection == 1u);
  CHECK_FALSE(got[1]);
  CHECK(q.submit({"t0-1", std::nullopt}) == TaskQueue::Submit::UnknownTask);
}

TEST_CASE("closing the queue abandons the iteration") {
  TaskQueue queue;
  QueueWorker remote(queue, 60s);
  auto items = natural_items();
  AnnotationLoop loop(pool5(), featurizer(), schema(), AnnotationState::start(items, 3));
  auto before = loop.state().to_json(pool5()).dump();
  std::thread closer([&] {
    while (queue.size() == 0) std::this_thread::sleep_for(5ms);
    auto t = queue.lease();
    REQUIRE(t);
    queue.submit({t->task_id, 0});
    queue.close();
  });
  CHECK_THROWS_AS(loop.run_until_convergence(remote), Interrupted);
  closer.join();
  CHECK(loop.state().to_json(pool5()).dump() == before);
  CHECK_FALSE(queue.lease());
}

TEST_CASE("http api") {
  TaskQueue queue(1s);
  ProgressBoard progress;
  auto static_dir = std::filesystem::temp_directory_path() / "granno_static";
  std::filesystem::create_directories(static_dir);
  std::ofstream(static_dir / "index.html") << "<html>annotate</html>";
  AnnotationServer server(queue, progress, static_dir);
  int port = server.start("127.0.0.1", 0);
  httplib::Client cli("127.0.0.1", port);

  auto health = cli.Get("/api/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(nlohmann::json::parse(health->body)["status"] == "ok");

  auto idle = cli.Get("/api/task");
  REQUIRE(idle);
  CHECK(idle->status == 204);

  auto index = cli.Get("/");
  REQUIRE(index);
  CHECK(index->status == 200);
  CHECK(index->body.find("annotate") != std::string::npos);

  auto t = task_with("rivers in texas", {"(unary river)", "(count (unary river))"});
  queue.publish({t});
  progress.set({2, 0.25, 0.9});
  auto got = cli.Get("/api/task?worker_id=w1");
  REQUIRE(got);
  CHECK(got->status == 200);
  auto task = nlohmann::json::parse(got->body);
  CHECK(task["task_id"] == t.task_id);
  CHECK(task["utterance"] == "rivers in texas");
  CHECK(task["candidates"].size() == 2);
  CHECK(task["candidates"][1]["canonical"] == "(count (unary river))");
  CHECK(task["candidates"][1]["lf"] == "(count (unary river))");

  auto prog = cli.Get("/api/progress");
  REQUIRE(prog);
  auto pj = nlohmann::json::parse(prog->body);
  CHECK(pj["t"] == 2);
  CHECK(pj["cov"] == 0.25);
  CHECK(pj["remaining"] == 1);
  CHECK(pj["cwAcc"] == 0.9);

  auto post = [&](const std::string& body) {
    return cli.Post("/api/annotation", body, "application/json");
  };
  CHECK(post("not json")->status == 400);
  CHECK(post(R"({"task_id": "t0-0"})")->status == 400);
  CHECK(post(R"({"task_id": "t0-0", "selection": -1})")->status == 400);
  CHECK(post(R"({"task_id": "t0-0", "selection": 2})")->status == 400);
  CHECK(post(R"({"task_id": "zzz", "selection": 0})")->status == 404);
  auto ok = post(R"({"task_id": "t0-0", "selection": null})");
  REQUIRE(ok);
  CHECK(ok->status == 200);
  CHECK(nlohmann::json::parse(ok->body)["status"] == "accepted");
  auto dup = post(R"({"task_id": "t0-0", "selection": 1})");
  CHECK(dup->status == 200);
  CHECK(nlohmann::json::parse(dup->body)["status"] == "duplicate");
  auto answers = queue.collect(10ms);
  REQUIRE(answers.size() == 1);
  REQUIRE(answers[0]);
  CHECK_FALSE(answers[0]->selection);

  progress.set({3, 0.5, std::nullopt});
  CHECK_FALSE(nlohmann::json::parse(cli.Get("/api/progress")->body).contains("cwAcc"));
  server.stop();
  std::filesystem::remove_all(static_dir);
}

TEST_CASE("serve mode drives the loop like the direct oracle") {
  auto items = natural_items();
  OracleWorker oracle(gold_of(items), schema());

  AnnotationLoop direct(pool5(), featurizer(), schema(), AnnotationState::start(items, 4));
  direct.run_until_convergence(oracle);

  TaskQueue queue(5s);
  ProgressBoard progress;
  AnnotationServer server(queue, progress);
  int port = server.start("127.0.0.1", 0);
  QueueWorker remote(queue, 60s);
  AnnotationLoop served(pool5(), featurizer(), schema(), AnnotationState::start(items, 4));

  std::atomic<bool> done{false};
  std::thread client([&] {
    httplib::Client cli("127.0.0.1", port);
    while (!done) {
      auto res = cli.Get("/api/task");
      if (!res || res->status == 204) {
        std::this_thread::sleep_for(2ms);
        continue;
      }
      auto j = nlohmann::json::parse(res->body);
      Task t;
      t.task_id = j["task_id"];
      t.utterance = j["utterance"];
      for (const auto& c : j["candidates"]) {
        t.candidates.push_back({c["canonical"], LogicalForm::parse(c["lf"].get<std::string>())});
      }
      auto r = oracle.respond(t);
      nlohmann::json body = {{"task_id", r.task_id},
                             {"selection", r.selection ? nlohmann::json(*r.selection)
                                                       : nlohmann::json(nullptr)}};
      cli.Post("/api/annotation", body.dump(), "application/json");
    }
  });
  served.run_until_convergence(remote, [&](const AnnotationState& s) {
    progress.set({s.t, s.cov(), s.history.back().cw_acc});
  });
  done = true;
  client.join();
  server.stop();
  CHECK(served.state().to_json(pool5()).dump() == direct.state().to_json(pool5()).dump());
}
