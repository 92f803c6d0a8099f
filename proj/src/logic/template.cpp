#include "granno/logic/template.hpp"

#include "granno/logic/structure.hpp"
#include "granno/logic/typing.hpp"

namespace granno {

namespace {

LogicalForm abstract(const LogicalForm& lf, const Schema& schema) {
  if (lf.op() == Op::Entity) return LogicalForm::slot(schema.at(lf.symbol()).type());
  if (lf.args().empty()) return lf;
  std::vector<LogicalForm> args;
  args.reserve(lf.args().size());
  bool changed = false;
  for (const auto& a : lf.args()) {
    args.push_back(abstract(a, schema));
    changed = changed || !(args.back() == a);
  }
  if (!changed) return lf;
  return LogicalForm::make(lf.op(), lf.symbol(), lf.number(), std::move(args));
}

}  // namespace

Template abstract_to_template(const LogicalForm& lf, const Schema& schema) {
  typecheck(lf, schema);
  return Template{abstract(lf, schema)};
}

std::string template_key(const LogicalForm& lf, const Schema& schema) {
  return canonical_conjunction_order(abstract_to_template(lf, schema).skeleton).str();
}

}  // namespace granno
