#pragma once

#include <set>
#include <string>

#include "granno/logic/logical_form.hpp"
#include "granno/logic/schema.hpp"

namespace granno {

enum class Detection { Exact, EquivalentUnder, EquivalentOver, PartiallyWrong, Wrong };

const char* to_string(Detection d);

/// Flattened constraints of a form: the conjuncts of its top-level
/// conjunction (in canonical order), plus one token per enclosing
/// count/sum/argmax/argmin wrapper such as "argmax area".
std::set<std::string> constraint_set(const LogicalForm& lf);

/// How a detected form relates to gold. Exact when the templates match;
/// under/over when the detected constraints are a strict subset/superset
/// of gold's; partially wrong when they overlap and the root operators
/// agree; wrong otherwise.
Detection categorize_detection(const LogicalForm& gold, const LogicalForm& detected,
                               const Schema& schema);

}  // namespace granno
