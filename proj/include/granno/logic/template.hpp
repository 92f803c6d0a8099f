#pragma once

#include <string>

#include "granno/logic/logical_form.hpp"
#include "granno/logic/schema.hpp"

namespace granno {

/// A logical form whose entity constants are abstracted to typed slots.
struct Template {
  LogicalForm skeleton;

  const std::string& str() const { return skeleton.str(); }
  bool operator==(const Template& other) const { return skeleton == other.skeleton; }
  bool operator<(const Template& other) const { return skeleton < other.skeleton; }
};

/// Replaces every Entity node with a Slot of its semantic type. Slots pass
/// through unchanged, so abstracting a template is the identity.
/// Throws TypeError on ill-typed input.
Template abstract_to_template(const LogicalForm& lf, const Schema& schema);

/// Identity key used when comparing templates across datasets: the
/// template with its conjunctions put in canonical order.
std::string template_key(const LogicalForm& lf, const Schema& schema);

}  // namespace granno

template <>
struct std::hash<granno::Template> {
  size_t operator()(const granno::Template& t) const noexcept {
    return std::hash<granno::LogicalForm>{}(t.skeleton);
  }
};
