#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "granno/grammar/tokenize.hpp"
#include "granno/logic/errors.hpp"
#include "granno/logic/logical_form.hpp"
#include "granno/logic/schema.hpp"

namespace granno {

/// Syntax error in a grammar file, carrying the 1-based line number.
class GrammarSyntaxError : public FormatError {
 public:
  GrammarSyntaxError(size_t line, const std::string& what)
      : FormatError("line " + std::to_string(line) + ": " + what), line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

class UndefinedCategory : public FormatError {
 public:
  explicit UndefinedCategory(const std::string& category)
      : FormatError("undefined category " + category), category_(category) {}
  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

class ArityMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

/// One side of a category's type parameter: a concrete semantic type (or
/// `number`) or a variable, written with a leading upper-case letter.
struct TypeAtom {
  std::string name;
  bool variable = false;

  bool operator==(const TypeAtom&) const = default;
};

/// `type` for sets and numbers, `subject>object` for relations/attributes.
struct TypeSpec {
  TypeAtom first;
  std::optional<TypeAtom> second;

  static TypeSpec parse(const std::string& text);  // throws FormatError
  std::string str() const;
  bool concrete() const;
  bool operator==(const TypeSpec&) const = default;
};

struct CategoryRef {
  std::string name;  // includes the leading '$'
  TypeSpec type;
  std::string str() const { return name + ":" + type.str(); }
};

/// S-expression template of a rule's logical-form builder; `$k` refers to
/// the k-th category reference of the rule (1-based).
struct LfBuilder {
  struct Node {
    enum class Kind { Hole, Atom, List } kind = Kind::Atom;
    size_t hole = 0;
    std::string atom;
    std::vector<Node> items;
  };

  Node root;
  size_t arity = 0;  // number of distinct holes

  static LfBuilder parse(const std::string& text);  // throws FormatError
};

/// What a grammar symbol denotes: a logical form, or a bare relation or
/// attribute constant waiting to be consumed by a parent builder.
using Semantics = std::variant<LogicalForm, std::string>;

std::string semantics_str(const Semantics& s);

struct GrammarRule {
  CategoryRef lhs;
  /// Terminal tokens and category references in surface order.
  std::vector<std::variant<std::string, CategoryRef>> rhs;
  LfBuilder builder;
  size_t line = 0;

  size_t arity() const;
  std::vector<const CategoryRef*> refs() const;
};

struct SeedLexiconEntry {
  CategoryRef category;
  Tokens phrase;
  std::string constant;
};

struct EntityAlias {
  Tokens phrase;
  std::string entity;
};

/// A validated synchronous grammar bound to its schema. Immutable.
class Grammar {
 public:
  Grammar(Schema schema, std::string root, std::vector<GrammarRule> rules,
          std::vector<SeedLexiconEntry> lexicon, std::vector<EntityAlias> aliases);

  const Schema& schema() const { return *schema_; }
  std::shared_ptr<const Schema> schema_ptr() const { return schema_; }
  const std::string& root() const { return root_; }
  const std::vector<GrammarRule>& rules() const { return rules_; }
  const std::vector<SeedLexiconEntry>& lexicon() const { return lexicon_; }
  const std::vector<EntityAlias>& aliases() const { return aliases_; }

  /// Semantics of a lexicon entry: entity/unary forms or the bare constant.
  Semantics lexicon_semantics(const SeedLexiconEntry& entry) const;

  /// Applies a builder to child semantics. Returns nullopt when the result
  /// does not form a valid node (e.g. a logical form where a symbol is due).
  static std::optional<Semantics> instantiate(const LfBuilder& builder,
                                              const std::vector<Semantics>& children);

 private:
  std::shared_ptr<const Schema> schema_;
  std::string root_;
  std::vector<GrammarRule> rules_;
  std::vector<SeedLexiconEntry> lexicon_;
  std::vector<EntityAlias> aliases_;
};

/// Parses a grammar file:
///
///   schema "<kb-or-schema.json>"           (path relative to the grammar file)
///   root $Category
///   lex $Cat:type "phrase" -> constant
///   alias "phrase" -> entity
///   rule $Cat:T -> word "quoted words" $Child:T ... { (builder $1 ...) }
///   # comment
///
/// Throws GrammarSyntaxError, UndefinedCategory, ArityMismatch, SchemaError.
Grammar load_grammar(const std::filesystem::path& path);

/// Same, from text; `base_dir` resolves the schema path.
Grammar parse_grammar(const std::string& text, const std::filesystem::path& base_dir);

/// Same, with an explicit schema (the file's `schema` line is then optional).
Grammar parse_grammar(const std::string& text, Schema schema);

}  // namespace granno
