#include "granno/analysis/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "granno/logic/errors.hpp"
#include "granno/logic/typing.hpp"

namespace granno {

const char* to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Natural: return "natural";
    case DatasetKind::Generated: return "generated";
    case DatasetKind::Annotated: return "annotated";
  }
  return "?";
}

std::vector<LogicalForm> Dataset::forms() const {
  std::vector<LogicalForm> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.lf);
  return out;
}

void Dataset::validate(const Schema& schema) const {
  for (size_t i = 0; i < examples.size(); ++i) {
    try {
      typecheck(examples[i].lf, schema);
    } catch (const TypeError& e) {
      throw SchemaError(name + " example " + std::to_string(i + 1) + ": " + e.what());
    }
  }
}

Dataset Dataset::load(const std::filesystem::path& path, DatasetKind kind) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  Dataset ds{path.stem().string(), kind, {}};
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    try {
      auto j = nlohmann::json::parse(line);
      std::string utt = j.contains("utterance") ? j.at("utterance").get<std::string>()
                                                : j.at("canonical").get<std::string>();
      ds.examples.push_back({std::move(utt), LogicalForm::parse(j.at("lf").get<std::string>())});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ds;
}

Dataset Dataset::from_pairs(std::span<const GeneratedPair> pairs, std::string name) {
  Dataset ds{std::move(name), DatasetKind::Generated, {}};
  ds.examples.reserve(pairs.size());
  for (const auto& p : pairs) ds.examples.push_back({p.canonical, p.lf});
  return ds;
}

void Dataset::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& e : examples) {
    out << nlohmann::json{{"utterance", e.utterance}, {"lf", e.lf.str()}}.dump() << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace granno
