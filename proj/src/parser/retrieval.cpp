#include "granno/parser/retrieval.hpp"

#include <algorithm>
#include <set>

#include "granno/analysis/coverage.hpp"

namespace granno {

namespace {

std::vector<std::string> slot_types(const LogicalForm& skeleton) {
  std::vector<std::string> out;
  skeleton.visit([&](const LogicalForm& n) {
    if (n.op() == Op::Slot) out.push_back(n.symbol());
  });
  std::sort(out.begin(), out.end());
  return out;
}

struct Filler {
  const Schema& schema;
  const EntityMentions& entities;
  std::vector<bool> used;
  bool fallback = false;

  // `tmpl` and `orig` have the same shape; slots in `tmpl` sit where
  // `orig` has entities.
  LogicalForm fill(const LogicalForm& tmpl, const LogicalForm& orig) {
    if (tmpl.op() == Op::Slot) {
      for (size_t i = 0; i < entities.size(); ++i) {
        if (used[i]) continue;
        const KbConstant* c = schema.find(entities[i]);
        if (c != nullptr && c->type() == tmpl.symbol()) {
          used[i] = true;
          return LogicalForm::entity(entities[i]);
        }
      }
      fallback = true;
      return orig;
    }
    if (tmpl.args().empty()) return tmpl;
    std::vector<LogicalForm> args;
    for (size_t i = 0; i < tmpl.args().size(); ++i) args.push_back(fill(tmpl.arg(i), orig.arg(i)));
    return LogicalForm::make(tmpl.op(), tmpl.symbol(), tmpl.number(), std::move(args));
  }
};

}  // namespace

RetrievalParser::RetrievalParser(std::vector<MemoryEntry> memory, const Featurizer& featurizer,
                                 const Schema& schema, ScorerModel similarity,
                                 ParserOptions options)
    : memory_(std::move(memory)),
      featurizer_(&featurizer),
      schema_(&schema),
      similarity_(std::move(similarity)),
      options_(options) {
  if (memory_.empty()) throw InsufficientData("parser memory is empty");
}

RetrievalParser::Parse RetrievalParser::parse_detail(const std::string& utterance) const {
  auto px = featurizer_->prepare(tokenize(utterance));
  std::vector<std::string> types;
  for (const auto& e : px.entities) {
    const KbConstant* c = schema_->find(e);
    if (c != nullptr) types.push_back(c->type());
  }
  std::sort(types.begin(), types.end());

  std::vector<size_t> eligible;
  if (options_.type_filter) {
    for (size_t i = 0; i < memory_.size(); ++i) {
      if (memory_[i].slot_types == types) eligible.push_back(i);
    }
  }
  if (eligible.empty()) {
    eligible.resize(memory_.size());
    for (size_t i = 0; i < memory_.size(); ++i) eligible[i] = i;
  }

  size_t best = eligible.front();
  double best_score = similarity_.score(featurizer_->featurize(px, memory_[best].prepared));
  for (size_t k = 1; k < eligible.size(); ++k) {
    size_t i = eligible[k];
    double s = similarity_.score(featurizer_->featurize(px, memory_[i].prepared));
    if (s > best_score || (s == best_score && memory_[i].utterance < memory_[best].utterance)) {
      best = i;
      best_score = s;
    }
  }

  const MemoryEntry& m = memory_[best];
  Filler filler{*schema_, px.entities, std::vector<bool>(px.entities.size(), false)};
  LogicalForm lf = filler.fill(m.tmpl.skeleton, m.lf);
  return {lf, best, filler.fallback};
}

RetrievalParser train_parser(const Dataset& dataset, const Featurizer& featurizer,
                             const Schema& schema, ScorerModel similarity,
                             ParserOptions options) {
  if (dataset.empty()) throw InsufficientData("cannot train a parser on an empty dataset");
  dataset.validate(schema);
  std::vector<MemoryEntry> memory;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : dataset.examples) {
    if (!seen.emplace(e.utterance, e.lf.str()).second) continue;
    auto tmpl = abstract_to_template(e.lf, schema);
    auto types = slot_types(tmpl.skeleton);
    memory.push_back({e.utterance, e.lf, std::move(tmpl), featurizer.prepare(tokenize(e.utterance)),
                      std::move(types)});
  }
  return RetrievalParser(std::move(memory), featurizer, schema, std::move(similarity), options);
}

Evaluation evaluate(const RetrievalParser& parser, const Dataset& test, const KnowledgeBase& kb) {
  if (test.empty()) throw EmptyInput("empty test set");
  Evaluation ev;
  size_t right = 0;
  for (const auto& e : test.examples) {
    ev.predictions.push_back(parser.parse(e.utterance));
    right += same_denotation(e.lf, ev.predictions.back(), kb);
  }
  ev.accuracy = static_cast<double>(right) / static_cast<double>(test.size());
  return ev;
}

}  // namespace granno
