#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace granno {

/// Reserved semantic type for numeric values (counts, sums, attribute values).
inline constexpr const char* kNumberType = "number";

enum class ConstantKind { Entity, Unary, Relation, Attribute };

const char* to_string(ConstantKind kind);
ConstantKind constant_kind_from_string(const std::string& s);

/// A schema-level symbol.
///
/// Entities and unaries carry a single semantic type in `subject_type`.
/// Relations hold facts (subject, relation, object) and are typed
/// subject_type -> object_type. Attributes map a subject to a number;
/// their object_type is always `number`.
struct KbConstant {
  std::string id;
  ConstantKind kind = ConstantKind::Entity;
  std::string subject_type;
  std::string object_type;
  bool summable = false;  // attributes only

  const std::string& type() const { return subject_type; }
  bool operator==(const KbConstant&) const = default;
};

/// The typed symbol table shared by grammars, datasets and knowledge bases.
class Schema {
 public:
  Schema() = default;

  /// Throws SchemaError on duplicate ids or malformed signatures.
  void add(KbConstant constant);

  const KbConstant* find(const std::string& id) const;
  const KbConstant& at(const std::string& id) const;  // throws UnknownConstant
  bool contains(const std::string& id) const { return find(id) != nullptr; }

  const std::vector<std::string>& types() const { return types_; }
  bool has_type(const std::string& type) const;
  std::vector<const KbConstant*> constants() const;
  std::vector<const KbConstant*> entities_of_type(const std::string& type) const;

  size_t size() const { return by_id_.size(); }
  bool operator==(const Schema& other) const { return by_id_ == other.by_id_; }

  static Schema from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

 private:
  void note_type(const std::string& type);

  std::map<std::string, KbConstant> by_id_;
  std::vector<std::string> types_;
};

}  // namespace granno
