#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "granno/grammar/entities.hpp"
#include "granno/grammar/generate.hpp"
#include "granno/grammar/pair_io.hpp"
#include "granno/logic/structure.hpp"
#include "granno/logic/typing.hpp"
#include "oracles/naive_generator.hpp"
#include "support/toy_grammar.hpp"

using namespace granno;
using granno::testing::data_path;
using granno::testing::toy_grammar;

namespace {

const char* kMiniSchema = R"({"types":["state"],"constants":[
  {"id":"ca","kind":"entity","type":"state"},
  {"id":"state","kind":"unary","type":"state"},
  {"id":"borders","kind":"relation","subject":"state","object":"state"}]})";

Schema mini_schema() { return Schema::from_json(nlohmann::json::parse(kMiniSchema)); }

std::set<oracle::PairTuple> as_tuples(const std::vector<GeneratedPair>& pairs) {
  std::set<oracle::PairTuple> out;
  for (const auto& p : pairs) out.emplace(p.canonical, p.lf.str(), p.depth);
  return out;
}

size_t count_lines_starting(const std::string& path, const std::string& prefix) {
  std::ifstream in(path);
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) n += line.rfind(prefix, 0) == 0;
  return n;
}

}  // namespace

TEST_CASE("tokenize lowercases and strips edge punctuation") {
  CHECK(tokenize("What is the capital of California?") ==
        Tokens{"what", "is", "the", "capital", "of", "california"});
  CHECK(tokenize("  ") == Tokens{});
  CHECK(join_tokens({"a", "b"}) == "a b");
}

TEST_CASE("toy grammar loads what the file declares") {
  const auto& g = toy_grammar();
  const auto path = data_path("toy/grammar.txt");
  CHECK(g.rules().size() == count_lines_starting(path, "rule "));
  CHECK(g.lexicon().size() == count_lines_starting(path, "lex "));
  CHECK(g.aliases().size() == count_lines_starting(path, "alias "));
  CHECK(g.root() == "$Set");
}

TEST_CASE("grammar load errors") {
  auto parse = [](const std::string& text) { return parse_grammar(text, mini_schema()); };
  const std::string head = "root $Set\nlex $Set:state \"state\" -> state\n";

  SUBCASE("undefined category") {
    try {
      parse(head + "rule $Set:state -> $Set:state $Foo:state { (and $1 $2) }\n");
      FAIL("expected UndefinedCategory");
    } catch (const UndefinedCategory& e) {
      CHECK(e.category() == "$Foo");
    }
  }
  SUBCASE("builder arity") {
    CHECK_THROWS_AS(parse(head + "rule $Set:state -> $Set:state and $Set:state { (count $1) }\n"),
                    ArityMismatch);
  }
  SUBCASE("syntax error carries the line") {
    try {
      parse(head + "\n# comment\nrule $Set:state $Set:state { $1 }\n");
      FAIL("expected GrammarSyntaxError");
    } catch (const GrammarSyntaxError& e) {
      CHECK(e.line() == 5);
    }
  }
  SUBCASE("lexicon type must match the constant") {
    CHECK_THROWS_AS(parse(head + "lex $Rel:state>number \"borders\" -> borders\n"),
                    GrammarSyntaxError);
  }
  SUBCASE("unknown constant") {
    CHECK_THROWS_AS(parse(head + "lex $Set:state \"x\" -> nowhere\n"), GrammarSyntaxError);
  }
  SUBCASE("missing root") {
    CHECK_THROWS_AS(parse("lex $Set:state \"state\" -> state\n"), FormatError);
  }
  SUBCASE("valid mini grammar") {
    auto g = parse(head + "lex $E:state \"ca\" -> ca\nlex $R:state>state \"borders\" -> borders\n" +
                   "rule $Set:S -> $Set:S that $R:S>O $E:O { (and $1 (join $2 $3)) }\n");
    auto pairs = generate(g, 2);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[1].canonical == "state that borders ca");
    CHECK(pairs[1].lf.str() == "(and (unary state) (join borders (entity ca)))");
    CHECK(pairs[1].depth == 2);
  }
}

TEST_CASE("depth 1 yields the root-typed unaries") {
  const auto& g = toy_grammar();
  size_t unaries = 0;
  for (const auto& e : g.lexicon()) {
    unaries += e.category.name == g.root() &&
               g.schema().at(e.constant).kind == ConstantKind::Unary;
  }
  auto pairs = generate(g, 1);
  CHECK(pairs.size() == unaries);
  for (const auto& p : pairs) CHECK(p.lf.op() == Op::Unary);
  CHECK(as_tuples(pairs) == oracle::naive_generate(g, 1));
}

TEST_CASE("generation equals the naive enumerator up to depth 5") {
  const auto& g = toy_grammar();
  for (size_t d = 1; d <= 5; ++d) {
    CAPTURE(d);
    auto got = as_tuples(generate(g, d));
    auto want = oracle::naive_generate(g, d);
    CHECK(got.size() == want.size());
    CHECK(got == want);
  }
}

TEST_CASE("generated forms type-check and grow monotonically with depth") {
  const auto& g = toy_grammar();
  Generator gen(g);
  std::vector<GeneratedPair> previous;
  for (size_t d = 1; d <= 6; ++d) {
    gen.step();
    auto pairs = gen.pairs();
    CHECK(pairs.size() >= previous.size());
    std::set<std::string> keys;
    for (const auto& p : pairs) keys.insert(p.key());
    for (const auto& p : previous) CHECK(keys.contains(p.key()));
    for (const auto& p : pairs) {
      CHECK(well_typed(p.lf, g.schema()));
      CHECK(p.depth <= d);
    }
    previous = std::move(pairs);
  }
}

TEST_CASE("prune keeps one form per conjunct-order class and drops contradictions") {
  const auto& g = toy_grammar();
  for (size_t d = 1; d <= 4; ++d) {
    auto pairs = generate(g, d);
    auto kept = prune(pairs, g.schema());
    std::set<std::string> kept_keys;
    for (const auto& p : kept) kept_keys.insert(p.key());

    std::map<std::string, std::set<std::string>> classes;  // order class -> surviving lfs
    std::set<std::string> all_classes;
    for (const auto& p : pairs) {
      std::string cls = canonical_conjunction_order(p.lf).str();
      if (detect_contradiction(p.lf)) {
        CHECK_FALSE(kept_keys.contains(p.key()));
        continue;
      }
      all_classes.insert(cls);
      if (kept_keys.contains(p.key())) classes[cls].insert(p.lf.str());
      if (p.lf.str().find("(and") == std::string::npos) CHECK(kept_keys.contains(p.key()));
    }
    for (const auto& cls : all_classes) {
      CAPTURE(cls);
      CHECK(classes[cls].size() == 1);
    }
  }
}

TEST_CASE("prune on a hand-built commutative pair") {
  auto a = LogicalForm::join("borders", LogicalForm::entity("california"));
  auto b = LogicalForm::unary("state");
  std::vector<GeneratedPair> pairs{{"x", LogicalForm::intersect(a, b), 3},
                                   {"y", LogicalForm::intersect(b, a), 3},
                                   {"z", LogicalForm::intersect(b, LogicalForm::negate(b)), 3},
                                   {"w", b, 1}};
  auto kept = prune(pairs, toy_grammar().schema());
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].lf == canonical_conjunction_order(kept[0].lf));
  CHECK(kept[1].canonical == "w");
}

TEST_CASE("prune_unlikely drops sums of non-summable attributes") {
  const auto& g = toy_grammar();
  auto pairs = generate(g, 3);
  auto plain = prune(pairs, g.schema());
  auto strict = prune(pairs, g.schema(), {.prune_unlikely = true});
  CHECK(strict.size() < plain.size());
  for (const auto& p : strict) CHECK_FALSE(flag_unlikely(p.lf, g.schema()));
}

TEST_CASE("extract_entities") {
  const auto& g = toy_grammar();
  CHECK(extract_entities(tokenize("what is the capital of california"), g) ==
        EntityMentions{"california"});
  CHECK(extract_entities(tokenize("texas and california rivers"), g) ==
        EntityMentions{"texas", "california"});
  CHECK(extract_entities(tokenize("how many states are there"), g).empty());
  // Longest match wins over a shorter prefix.
  CHECK(extract_entities(tokenize("how tall is mount whitney"), g) == EntityMentions{"whitney"});
  CHECK(extract_entities(tokenize("length of the colorado river"), g) ==
        EntityMentions{"colorado"});
  CHECK(extract_entities(tokenize("rio grande"), g) == EntityMentions{"rio_grande"});
  CHECK(same_entities({"texas", "california", "texas"}, {"texas", "texas", "california"}));
  CHECK_FALSE(same_entities({"texas", "california"}, {"texas", "california", "texas"}));

  EntityMatcher m(g);
  auto mask = m.mention_mask(tokenize("rivers in tx and ca"));
  CHECK(mask == std::vector<bool>{false, false, true, false, true});
}

TEST_CASE("pair files round-trip through a spilling sorted writer") {
  const auto& g = toy_grammar();
  auto pairs = generate(g, 4);
  auto dir = std::filesystem::temp_directory_path() / "granno_pair_io_test";
  std::filesystem::create_directories(dir);
  auto path = dir / "pairs.jsonl";

  SortedPairWriter writer(path, 37);
  // Reverse order plus a deeper duplicate of every tenth pair.
  for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) writer.add(*it);
  for (size_t i = 0; i < pairs.size(); i += 10) {
    auto dup = pairs[i];
    dup.depth += 3;
    writer.add(dup);
  }
  CHECK(writer.spilled_runs() > 1);
  CHECK(writer.finish() == pairs.size());
  CHECK(read_pairs(path) == pairs);
  std::filesystem::remove_all(dir);
}
