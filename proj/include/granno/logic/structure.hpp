#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "granno/logic/logical_form.hpp"
#include "granno/logic/schema.hpp"

namespace granno {

/// Row names of the operator-frequency table, in presentation order.
const std::vector<std::string>& operator_rows();

/// Fraction of forms containing each operator at least once. Conjunction
/// rows bucket the largest flattened Intersect arity of a form; arities
/// above four fold into conj_4. Throws EmptyInput on an empty dataset.
std::map<std::string, double> operator_histogram(std::span<const LogicalForm> dataset);

/// Largest flattened conjunction arity anywhere in `lf` (0 if none).
size_t max_conjunction_arity(const LogicalForm& lf);

/// True iff some flattened conjunction holds both C and (not C).
bool detect_contradiction(const LogicalForm& lf);

/// Sorts the conjuncts of every flattened Intersect by their S-expression
/// and rebuilds each chain left-nested. Idempotent.
LogicalForm canonical_conjunction_order(const LogicalForm& lf);

/// Heuristic for forms users are unlikely to ask for: a sum over a
/// non-summable attribute, or a comparison against the extreme of the same
/// attribute over an unfiltered set.
bool flag_unlikely(const LogicalForm& lf, const Schema& schema);

}  // namespace granno
