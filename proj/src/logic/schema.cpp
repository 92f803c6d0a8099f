#include "granno/logic/schema.hpp"

#include <algorithm>

#include "granno/logic/errors.hpp"

namespace granno {

const char* to_string(ConstantKind kind) {
  switch (kind) {
    case ConstantKind::Entity: return "entity";
    case ConstantKind::Unary: return "unary";
    case ConstantKind::Relation: return "relation";
    case ConstantKind::Attribute: return "attribute";
  }
  return "?";
}

ConstantKind constant_kind_from_string(const std::string& s) {
  if (s == "entity") return ConstantKind::Entity;
  if (s == "unary") return ConstantKind::Unary;
  if (s == "relation") return ConstantKind::Relation;
  if (s == "attribute") return ConstantKind::Attribute;
  throw SchemaError("unknown constant kind '" + s + "'");
}

void Schema::note_type(const std::string& type) {
  if (type == kNumberType) return;
  if (std::find(types_.begin(), types_.end(), type) == types_.end()) types_.push_back(type);
}

void Schema::add(KbConstant c) {
  if (c.id.empty()) throw SchemaError("constant with empty id");
  if (by_id_.contains(c.id)) throw SchemaError("duplicate constant id '" + c.id + "'");
  if (c.subject_type.empty() || c.subject_type == kNumberType) {
    throw SchemaError("constant '" + c.id + "' needs a non-numeric semantic type");
  }
  switch (c.kind) {
    case ConstantKind::Entity:
    case ConstantKind::Unary:
      c.object_type.clear();
      break;
    case ConstantKind::Relation:
      if (c.object_type.empty() || c.object_type == kNumberType) {
        throw SchemaError("relation '" + c.id + "' needs an entity object type");
      }
      note_type(c.object_type);
      break;
    case ConstantKind::Attribute:
      c.object_type = kNumberType;
      break;
  }
  if (c.kind != ConstantKind::Attribute) c.summable = false;
  note_type(c.subject_type);
  std::string id = c.id;
  by_id_.emplace(std::move(id), std::move(c));
}

const KbConstant* Schema::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &it->second;
}

const KbConstant& Schema::at(const std::string& id) const {
  if (const auto* c = find(id)) return *c;
  throw UnknownConstant(id);
}

bool Schema::has_type(const std::string& type) const {
  return std::find(types_.begin(), types_.end(), type) != types_.end();
}

std::vector<const KbConstant*> Schema::constants() const {
  std::vector<const KbConstant*> out;
  out.reserve(by_id_.size());
  for (const auto& [id, c] : by_id_) out.push_back(&c);
  return out;
}

std::vector<const KbConstant*> Schema::entities_of_type(const std::string& type) const {
  std::vector<const KbConstant*> out;
  for (const auto& [id, c] : by_id_) {
    if (c.kind == ConstantKind::Entity && c.subject_type == type) out.push_back(&c);
  }
  return out;
}

Schema Schema::from_json(const nlohmann::json& doc) {
  Schema schema;
  if (doc.contains("types")) {
    for (const auto& t : doc.at("types")) schema.note_type(t.get<std::string>());
  }
  if (!doc.contains("constants") || !doc.at("constants").is_array()) {
    throw SchemaError("schema document needs a 'constants' array");
  }
  for (const auto& jc : doc.at("constants")) {
    KbConstant c;
    try {
      c.id = jc.at("id").get<std::string>();
      c.kind = constant_kind_from_string(jc.at("kind").get<std::string>());
      if (c.kind == ConstantKind::Entity || c.kind == ConstantKind::Unary) {
        c.subject_type = jc.at("type").get<std::string>();
      } else {
        c.subject_type = jc.at("subject").get<std::string>();
        if (c.kind == ConstantKind::Relation) c.object_type = jc.at("object").get<std::string>();
        c.summable = jc.value("summable", false);
      }
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("malformed constant: ") + e.what());
    }
    schema.add(std::move(c));
  }
  return schema;
}

nlohmann::json Schema::to_json() const {
  nlohmann::json doc;
  doc["types"] = types_;
  auto& arr = doc["constants"] = nlohmann::json::array();
  for (const auto& [id, c] : by_id_) {
    nlohmann::json jc{{"id", c.id}, {"kind", to_string(c.kind)}};
    if (c.kind == ConstantKind::Entity || c.kind == ConstantKind::Unary) {
      jc["type"] = c.subject_type;
    } else {
      jc["subject"] = c.subject_type;
      if (c.kind == ConstantKind::Relation) jc["object"] = c.object_type;
      if (c.kind == ConstantKind::Attribute) jc["summable"] = c.summable;
    }
    arr.push_back(std::move(jc));
  }
  return doc;
}

}  // namespace granno
