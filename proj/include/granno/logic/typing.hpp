#pragma once

#include <optional>
#include <string>

#include "granno/logic/logical_form.hpp"
#include "granno/logic/schema.hpp"

namespace granno {

/// Result type of a logical form: a set of entities of one semantic type,
/// or a number.
struct LfType {
  bool numeric = false;
  std::string entity_type;

  static LfType number() { return {true, {}}; }
  static LfType set(std::string type) { return {false, std::move(type)}; }

  /// `number` or the entity type name.
  const std::string& name() const;
  bool operator==(const LfType&) const = default;
};

/// Type-checks `lf` against `schema`. Throws TypeError when ill-typed,
/// including references to constants the schema does not declare.
LfType typecheck(const LogicalForm& lf, const Schema& schema);

std::optional<LfType> try_typecheck(const LogicalForm& lf, const Schema& schema);

inline bool well_typed(const LogicalForm& lf, const Schema& schema) {
  return try_typecheck(lf, schema).has_value();
}

}  // namespace granno
