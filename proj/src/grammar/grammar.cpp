#include "granno/grammar/grammar.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace granno {

namespace {

TypeAtom parse_atom(const std::string& s) {
  if (s.empty()) throw FormatError("empty type");
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
      throw FormatError("bad type '" + s + "'");
    }
  }
  return {s, static_cast<bool>(std::isupper(static_cast<unsigned char>(s[0])))};
}

CategoryRef parse_category(const std::string& text) {
  if (text.size() < 2 || text[0] != '$') throw FormatError("expected category, got '" + text + "'");
  auto colon = text.find(':');
  if (colon == std::string::npos) throw FormatError("category '" + text + "' lacks a type");
  CategoryRef ref;
  ref.name = text.substr(0, colon);
  ref.type = TypeSpec::parse(text.substr(colon + 1));
  return ref;
}

/// Splits a grammar line into words; quoted strings stay one word with the
/// quotes kept so callers can tell terminals from keywords.
std::vector<std::string> split_words(const std::string& line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    size_t start = i;
    if (line[i] == '"') {
      auto close = line.find('"', i + 1);
      if (close == std::string::npos) throw FormatError("unterminated quote");
      i = close + 1;
    } else {
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    }
    out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool is_quoted(const std::string& w) { return w.size() >= 2 && w.front() == '"' && w.back() == '"'; }

std::string unquote(const std::string& w) {
  if (!is_quoted(w)) throw FormatError("expected quoted string, got '" + w + "'");
  return w.substr(1, w.size() - 2);
}

void parse_builder_node(const std::string& text, size_t& pos, LfBuilder::Node& node) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos >= text.size()) throw FormatError("unexpected end of builder");
  if (text[pos] == '(') {
    node.kind = LfBuilder::Node::Kind::List;
    ++pos;
    for (;;) {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos >= text.size()) throw FormatError("unbalanced builder");
      if (text[pos] == ')') {
        ++pos;
        break;
      }
      node.items.emplace_back();
      parse_builder_node(text, pos, node.items.back());
    }
    if (node.items.empty()) throw FormatError("empty list in builder");
    return;
  }
  if (text[pos] == ')') throw FormatError("unexpected ')' in builder");
  size_t start = pos;
  while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
         text[pos] != '(' && text[pos] != ')') {
    ++pos;
  }
  std::string atom = text.substr(start, pos - start);
  if (atom[0] == '$') {
    char* end = nullptr;
    long k = std::strtol(atom.c_str() + 1, &end, 10);
    if (*end != '\0' || k < 1) throw FormatError("bad hole '" + atom + "'");
    node.kind = LfBuilder::Node::Kind::Hole;
    node.hole = static_cast<size_t>(k);
  } else {
    node.kind = LfBuilder::Node::Kind::Atom;
    node.atom = std::move(atom);
  }
}

void collect_holes(const LfBuilder::Node& n, std::set<size_t>& holes) {
  if (n.kind == LfBuilder::Node::Kind::Hole) holes.insert(n.hole);
  for (const auto& c : n.items) collect_holes(c, holes);
}

void validate_builder_node(const LfBuilder::Node& n, bool top) {
  using Kind = LfBuilder::Node::Kind;
  if (n.kind != Kind::List) {
    if (top && n.kind == Kind::Atom) throw FormatError("builder must be a list or a hole");
    return;
  }
  if (n.items[0].kind != Kind::Atom) throw FormatError("builder list needs an operator head");
  auto op = op_from_name(n.items[0].atom);
  if (!op) throw FormatError("unknown operator '" + n.items[0].atom + "' in builder");
  size_t expected = 1 + op_arity(*op) + ((op_has_symbol(*op) || *op == Op::Literal) ? 1 : 0);
  if (n.items.size() != expected) {
    throw FormatError(std::string("operator ") + op_name(*op) + " expects " +
                      std::to_string(expected - 1) + " operand(s) in builder");
  }
  for (size_t i = 1; i < n.items.size(); ++i) validate_builder_node(n.items[i], false);
}

std::optional<Semantics> instantiate_node(const LfBuilder::Node& n,
                                          const std::vector<Semantics>& children) {
  using Kind = LfBuilder::Node::Kind;
  switch (n.kind) {
    case Kind::Hole:
      if (n.hole == 0 || n.hole > children.size()) return std::nullopt;
      return children[n.hole - 1];
    case Kind::Atom:
      return Semantics(n.atom);
    case Kind::List:
      break;
  }
  auto op = op_from_name(n.items[0].atom);
  if (!op) return std::nullopt;
  size_t next = 1;
  std::string symbol;
  double number = 0.0;
  if (*op == Op::Literal) {
    auto v = instantiate_node(n.items[next++], children);
    if (!v || !std::holds_alternative<std::string>(*v)) return std::nullopt;
    const auto& text = std::get<std::string>(*v);
    char* end = nullptr;
    number = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0') return std::nullopt;
  } else if (op_has_symbol(*op)) {
    auto v = instantiate_node(n.items[next++], children);
    if (!v || !std::holds_alternative<std::string>(*v)) return std::nullopt;
    symbol = std::get<std::string>(*v);
  }
  std::vector<LogicalForm> args;
  for (; next < n.items.size(); ++next) {
    auto v = instantiate_node(n.items[next], children);
    if (!v || !std::holds_alternative<LogicalForm>(*v)) return std::nullopt;
    args.push_back(std::get<LogicalForm>(*v));
  }
  try {
    return Semantics(LogicalForm::make(*op, std::move(symbol), number, std::move(args)));
  } catch (const Error&) {
    return std::nullopt;
  }
}

void check_lexicon_type(const SeedLexiconEntry& e, const KbConstant& c, size_t line) {
  const TypeSpec& t = e.category.type;
  if (!t.concrete()) throw GrammarSyntaxError(line, "lexicon types must be concrete");
  bool ok = false;
  switch (c.kind) {
    case ConstantKind::Entity:
    case ConstantKind::Unary:
      ok = !t.second && t.first.name == c.type();
      break;
    case ConstantKind::Relation:
    case ConstantKind::Attribute:
      ok = t.second && t.first.name == c.subject_type && t.second->name == c.object_type;
      break;
  }
  if (!ok) {
    throw GrammarSyntaxError(line, "type " + t.str() + " does not match constant '" + c.id + "'");
  }
}

struct RawGrammar {
  std::optional<std::string> schema_path;
  std::string root;
  std::vector<GrammarRule> rules;
  std::vector<std::pair<SeedLexiconEntry, size_t>> lexicon;
  std::vector<std::pair<EntityAlias, size_t>> aliases;
};

RawGrammar parse_lines(const std::string& text) {
  RawGrammar g;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside quotes.
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    try {
      std::string builder_text;
      if (auto open = line.find('{'); open != std::string::npos) {
        auto close = line.rfind('}');
        if (close == std::string::npos || close < open) throw FormatError("unbalanced '{'");
        builder_text = line.substr(open + 1, close - open - 1);
        if (line.find_first_not_of(" \t\r", close + 1) != std::string::npos) {
          throw FormatError("text after builder");
        }
        line.resize(open);
      }
      auto words = split_words(line);
      if (words.empty()) {
        if (!builder_text.empty()) throw FormatError("builder without a rule");
        continue;
      }
      const std::string& kw = words[0];
      if (kw != "rule" && !builder_text.empty()) throw FormatError("only rules take a builder");

      if (kw == "schema") {
        if (words.size() != 2) throw FormatError("usage: schema \"path\"");
        g.schema_path = unquote(words[1]);
      } else if (kw == "root") {
        if (words.size() != 2 || words[1][0] != '$') throw FormatError("usage: root $Category");
        g.root = words[1];
      } else if (kw == "lex") {
        if (words.size() != 5 || words[3] != "->") {
          throw FormatError("usage: lex $Cat:type \"phrase\" -> constant");
        }
        SeedLexiconEntry e{parse_category(words[1]), tokenize(unquote(words[2])), words[4]};
        if (e.phrase.empty()) throw FormatError("empty lexicon phrase");
        g.lexicon.emplace_back(std::move(e), lineno);
      } else if (kw == "alias") {
        if (words.size() != 4 || words[2] != "->") {
          throw FormatError("usage: alias \"phrase\" -> entity");
        }
        EntityAlias a{tokenize(unquote(words[1])), words[3]};
        if (a.phrase.empty()) throw FormatError("empty alias phrase");
        g.aliases.emplace_back(std::move(a), lineno);
      } else if (kw == "rule") {
        if (words.size() < 4 || words[2] != "->") {
          throw FormatError("usage: rule $Cat:type -> items... { builder }");
        }
        if (builder_text.empty()) throw FormatError("rule needs a { builder }");
        GrammarRule r;
        r.line = lineno;
        r.lhs = parse_category(words[1]);
        for (size_t i = 3; i < words.size(); ++i) {
          const auto& w = words[i];
          if (w[0] == '$') {
            r.rhs.emplace_back(parse_category(w));
          } else {
            for (auto& tok : tokenize(is_quoted(w) ? unquote(w) : w)) r.rhs.emplace_back(tok);
          }
        }
        r.builder = LfBuilder::parse(builder_text);
        g.rules.push_back(std::move(r));
      } else {
        throw FormatError("unknown directive '" + kw + "'");
      }
    } catch (const GrammarSyntaxError&) {
      throw;
    } catch (const FormatError& e) {
      throw GrammarSyntaxError(lineno, e.what());
    }
  }
  return g;
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema " + path.string());
  try {
    nlohmann::json doc;
    in >> doc;
    return Schema::from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace

TypeSpec TypeSpec::parse(const std::string& text) {
  TypeSpec t;
  auto gt = text.find('>');
  if (gt == std::string::npos) {
    t.first = parse_atom(text);
  } else {
    t.first = parse_atom(text.substr(0, gt));
    t.second = parse_atom(text.substr(gt + 1));
  }
  return t;
}

std::string TypeSpec::str() const {
  return second ? first.name + ">" + second->name : first.name;
}

bool TypeSpec::concrete() const { return !first.variable && !(second && second->variable); }

LfBuilder LfBuilder::parse(const std::string& text) {
  LfBuilder b;
  size_t pos = 0;
  parse_builder_node(text, pos, b.root);
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos != text.size()) throw FormatError("trailing text in builder");
  validate_builder_node(b.root, true);
  std::set<size_t> holes;
  collect_holes(b.root, holes);
  b.arity = holes.size();
  size_t expect = 1;
  for (size_t h : holes) {
    if (h != expect++) throw ArityMismatch("builder holes must be $1..$n without gaps");
  }
  return b;
}

std::string semantics_str(const Semantics& s) {
  return std::holds_alternative<LogicalForm>(s) ? std::get<LogicalForm>(s).str()
                                                : std::get<std::string>(s);
}

size_t GrammarRule::arity() const { return refs().size(); }

std::vector<const CategoryRef*> GrammarRule::refs() const {
  std::vector<const CategoryRef*> out;
  for (const auto& item : rhs) {
    if (const auto* ref = std::get_if<CategoryRef>(&item)) out.push_back(ref);
  }
  return out;
}

Grammar::Grammar(Schema schema, std::string root, std::vector<GrammarRule> rules,
                 std::vector<SeedLexiconEntry> lexicon, std::vector<EntityAlias> aliases)
    : schema_(std::make_shared<const Schema>(std::move(schema))),
      root_(std::move(root)),
      rules_(std::move(rules)),
      lexicon_(std::move(lexicon)),
      aliases_(std::move(aliases)) {}

Semantics Grammar::lexicon_semantics(const SeedLexiconEntry& entry) const {
  const KbConstant& c = schema_->at(entry.constant);
  switch (c.kind) {
    case ConstantKind::Entity: return LogicalForm::entity(c.id);
    case ConstantKind::Unary: return LogicalForm::unary(c.id);
    default: return c.id;
  }
}

std::optional<Semantics> Grammar::instantiate(const LfBuilder& builder,
                                              const std::vector<Semantics>& children) {
  return instantiate_node(builder.root, children);
}

Grammar parse_grammar(const std::string& text, Schema schema) {
  RawGrammar raw = parse_lines(text);

  std::set<std::string> defined;
  std::vector<SeedLexiconEntry> lexicon;
  for (auto& [entry, line] : raw.lexicon) {
    const KbConstant* c = schema.find(entry.constant);
    if (c == nullptr) {
      throw GrammarSyntaxError(line, "lexicon constant '" + entry.constant + "' not in schema");
    }
    check_lexicon_type(entry, *c, line);
    defined.insert(entry.category.name);
    lexicon.push_back(std::move(entry));
  }
  std::vector<EntityAlias> aliases;
  for (auto& [alias, line] : raw.aliases) {
    const KbConstant* c = schema.find(alias.entity);
    if (c == nullptr || c->kind != ConstantKind::Entity) {
      throw GrammarSyntaxError(line, "alias target '" + alias.entity + "' is not an entity");
    }
    aliases.push_back(std::move(alias));
  }
  for (const auto& r : raw.rules) defined.insert(r.lhs.name);

  for (const auto& r : raw.rules) {
    std::set<std::string> rhs_vars;
    for (const auto* ref : r.refs()) {
      if (!defined.contains(ref->name)) throw UndefinedCategory(ref->name);
      if (ref->type.first.variable) rhs_vars.insert(ref->type.first.name);
      if (ref->type.second && ref->type.second->variable) rhs_vars.insert(ref->type.second->name);
    }
    if (r.builder.arity != r.arity()) {
      throw ArityMismatch("line " + std::to_string(r.line) + ": builder uses " +
                          std::to_string(r.builder.arity) + " argument(s) but the rule has " +
                          std::to_string(r.arity()) + " category reference(s)");
    }
    auto check_var = [&](const TypeAtom& a) {
      if (a.variable && !rhs_vars.contains(a.name)) {
        throw GrammarSyntaxError(r.line, "type variable " + a.name + " is unbound");
      }
      if (!a.variable && a.name != kNumberType && !schema.has_type(a.name)) {
        throw GrammarSyntaxError(r.line, "unknown type '" + a.name + "'");
      }
    };
    check_var(r.lhs.type.first);
    if (r.lhs.type.second) check_var(*r.lhs.type.second);
  }
  if (raw.root.empty()) throw FormatError("grammar declares no root category");
  if (!defined.contains(raw.root)) throw UndefinedCategory(raw.root);

  return Grammar(std::move(schema), std::move(raw.root), std::move(raw.rules), std::move(lexicon),
                 std::move(aliases));
}

Grammar parse_grammar(const std::string& text, const std::filesystem::path& base_dir) {
  RawGrammar probe = parse_lines(text);
  if (!probe.schema_path) throw FormatError("grammar has no schema line");
  std::filesystem::path p = *probe.schema_path;
  if (p.is_relative()) p = base_dir / p;
  return parse_grammar(text, load_schema(p));
}

Grammar load_grammar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open grammar " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_grammar(ss.str(), path.parent_path());
}

}  // namespace granno
