#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "granno/logic/logical_form.hpp"
#include "granno/logic/schema.hpp"

namespace granno {

using EntitySet = std::set<std::string>;

/// Facts over a schema: relation triples, numeric attribute values and
/// unary memberships. Immutable once built.
class KnowledgeBase {
 public:
  explicit KnowledgeBase(Schema schema);

  /// Relation fact (subject, relation, object). Throws SchemaError when a
  /// constant is undeclared or mistyped.
  void add_fact(const std::string& subject, const std::string& relation,
                const std::string& object);
  /// Attribute value; a subject may hold at most one value per attribute.
  void set_value(const std::string& subject, const std::string& attribute, double value);
  /// Explicit unary membership. Unaries without explicit members contain
  /// every entity of their type.
  void add_member(const std::string& unary, const std::string& entity);

  const Schema& schema() const { return schema_; }
  const EntitySet& members(const std::string& unary) const;
  const EntitySet& entities_of_type(const std::string& type) const;
  const std::vector<std::pair<std::string, std::string>>& facts(const std::string& relation) const;
  std::optional<double> value(const std::string& entity, const std::string& attribute) const;
  EntitySet all_entities() const;

  static KnowledgeBase from_json(const nlohmann::json& doc);
  static KnowledgeBase load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

 private:
  const KbConstant& require(const std::string& id, ConstantKind kind) const;

  Schema schema_;
  std::map<std::string, EntitySet> explicit_members_;
  std::map<std::string, EntitySet> by_type_;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> facts_;
  std::map<std::string, std::map<std::string, double>> values_;
};

/// Execution result: a set of entities or a number.
class Denotation {
 public:
  Denotation(EntitySet set) : value_(std::move(set)) {}  // NOLINT
  Denotation(double number) : value_(number) {}          // NOLINT

  bool is_number() const { return std::holds_alternative<double>(value_); }
  const EntitySet& set() const { return std::get<EntitySet>(value_); }
  double number() const { return std::get<double>(value_); }

  /// Set equality, or numeric equality up to 1e-9 relative error.
  bool operator==(const Denotation& other) const;
  std::string str() const;

 private:
  std::variant<EntitySet, double> value_;
};

/// Evaluates `lf` with set semantics. Throws UnknownConstant when `lf`
/// names a constant the knowledge base lacks, TypeError when ill-typed.
Denotation execute(const LogicalForm& lf, const KnowledgeBase& kb);

}  // namespace granno
