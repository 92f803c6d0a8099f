#include "granno/annotation/categorize.hpp"

#include <algorithm>

#include "granno/logic/structure.hpp"
#include "granno/logic/template.hpp"

namespace granno {

const char* to_string(Detection d) {
  switch (d) {
    case Detection::Exact: return "exact";
    case Detection::EquivalentUnder: return "equivalent-under";
    case Detection::EquivalentOver: return "equivalent-over";
    case Detection::PartiallyWrong: return "partially-wrong";
    case Detection::Wrong: return "wrong";
  }
  return "?";
}

std::set<std::string> constraint_set(const LogicalForm& lf) {
  std::set<std::string> out;
  const LogicalForm* cur = &lf;
  while (true) {
    switch (cur->op()) {
      case Op::Count:
        out.insert("count");
        cur = &cur->arg(0);
        continue;
      case Op::Sum:
      case Op::Argmax:
      case Op::Argmin:
        out.insert(std::string(op_name(cur->op())) + " " + cur->symbol());
        cur = &cur->arg(0);
        continue;
      default:
        break;
    }
    break;
  }
  for (const auto& c : flatten_conjunction(*cur)) out.insert(canonical_conjunction_order(c).str());
  return out;
}

Detection categorize_detection(const LogicalForm& gold, const LogicalForm& detected,
                               const Schema& schema) {
  if (template_key(gold, schema) == template_key(detected, schema)) return Detection::Exact;
  auto g = constraint_set(gold), d = constraint_set(detected);
  bool d_in_g = std::includes(g.begin(), g.end(), d.begin(), d.end());
  bool g_in_d = std::includes(d.begin(), d.end(), g.begin(), g.end());
  if (d_in_g && !g_in_d) return Detection::EquivalentUnder;
  if (g_in_d && !d_in_g) return Detection::EquivalentOver;
  bool overlap = std::any_of(d.begin(), d.end(), [&](const auto& c) { return g.contains(c); });
  if (overlap && gold.op() == detected.op()) return Detection::PartiallyWrong;
  return Detection::Wrong;
}

}  // namespace granno
