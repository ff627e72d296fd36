#include "seqbench/rpc/wire.hpp"

namespace seqbench::rpc {

std::string to_string(WireKind kind) {
  switch (kind) {
    case WireKind::null: return "null";
    case WireKind::boolean: return "bool";
    case WireKind::integer: return "int";
    case WireKind::decimal: return "decimal";
    case WireKind::text: return "text";
    case WireKind::list: return "list";
    case WireKind::map: return "map";
    case WireKind::enumeration: return "enum";
    case WireKind::handle: return "handle";
  }
  return "unknown";
}

WireValue WireValue::null() { return WireValue{}; }

WireValue WireValue::boolean(bool v) {
  WireValue out;
  out.kind_ = WireKind::boolean;
  out.bool_ = v;
  return out;
}

WireValue WireValue::integer(std::int64_t v) {
  WireValue out;
  out.kind_ = WireKind::integer;
  out.int_ = v;
  return out;
}

WireValue WireValue::decimal(std::string digits) {
  WireValue out;
  out.kind_ = WireKind::decimal;
  out.text_ = std::move(digits);
  return out;
}

WireValue WireValue::text(std::string v) {
  WireValue out;
  out.kind_ = WireKind::text;
  out.text_ = std::move(v);
  return out;
}

WireValue WireValue::list(std::vector<WireValue> items) {
  WireValue out;
  out.kind_ = WireKind::list;
  out.list_ = std::move(items);
  return out;
}

WireValue WireValue::map(std::map<std::string, WireValue> items) {
  WireValue out;
  out.kind_ = WireKind::map;
  out.map_ = std::move(items);
  return out;
}

WireValue WireValue::enumeration(std::string type_name, std::string variant) {
  WireValue out;
  out.kind_ = WireKind::enumeration;
  out.type_name_ = std::move(type_name);
  out.text_ = std::move(variant);
  return out;
}

WireValue WireValue::handle(WireHandle h) {
  WireValue out;
  out.kind_ = WireKind::handle;
  out.handle_ = std::move(h);
  return out;
}

namespace {

[[noreturn]] void kind_error(WireKind actual, const char* wanted) {
  throw std::invalid_argument("wire value is " + to_string(actual) + ", expected " + wanted);
}

}  // namespace

bool WireValue::as_bool() const {
  if (kind_ != WireKind::boolean) kind_error(kind_, "bool");
  return bool_;
}

std::int64_t WireValue::as_int() const {
  if (kind_ != WireKind::integer) kind_error(kind_, "int");
  return int_;
}

const std::string& WireValue::as_decimal() const {
  if (kind_ != WireKind::decimal) kind_error(kind_, "decimal");
  return text_;
}

const std::string& WireValue::as_text() const {
  if (kind_ != WireKind::text) kind_error(kind_, "text");
  return text_;
}

const std::vector<WireValue>& WireValue::as_list() const {
  if (kind_ != WireKind::list) kind_error(kind_, "list");
  return list_;
}

const std::map<std::string, WireValue>& WireValue::as_map() const {
  if (kind_ != WireKind::map) kind_error(kind_, "map");
  return map_;
}

const WireEnum& WireValue::as_enum() const {
  if (kind_ != WireKind::enumeration) kind_error(kind_, "enum");
  static thread_local WireEnum scratch;
  scratch = WireEnum{type_name_, text_};
  return scratch;
}

const WireHandle& WireValue::as_handle() const {
  if (kind_ != WireKind::handle) kind_error(kind_, "handle");
  return handle_;
}

Json WireValue::to_json() const {
  switch (kind_) {
    case WireKind::null:
      return Json{{"k", "null"}};
    case WireKind::boolean:
      return Json{{"k", "bool"}, {"v", bool_}};
    case WireKind::integer:
      return Json{{"k", "int"}, {"v", std::to_string(int_)}};
    case WireKind::decimal:
      return Json{{"k", "dec"}, {"v", text_}};
    case WireKind::text:
      return Json{{"k", "text"}, {"v", text_}};
    case WireKind::list: {
      Json items = Json::array();
      for (const auto& item : list_) items.push_back(item.to_json());
      return Json{{"k", "list"}, {"v", std::move(items)}};
    }
    case WireKind::map: {
      Json items = Json::object();
      for (const auto& [key, value] : map_) items[key] = value.to_json();
      return Json{{"k", "map"}, {"v", std::move(items)}};
    }
    case WireKind::enumeration:
      return Json{{"k", "enum"}, {"type", type_name_}, {"variant", text_}};
    case WireKind::handle:
      return Json{{"k", "handle"},
                  {"type", handle_.type_name},
                  {"id", handle_.instance_id},
                  {"addr", handle_.address}};
  }
  return Json{{"k", "null"}};
}

WireValue WireValue::from_json(const Json& j) {
  const std::string kind = j.at("k").get<std::string>();
  if (kind == "null") return null();
  if (kind == "bool") return boolean(j.at("v").get<bool>());
  if (kind == "int") return integer(std::stoll(j.at("v").get<std::string>()));
  if (kind == "dec") return decimal(j.at("v").get<std::string>());
  if (kind == "text") return text(j.at("v").get<std::string>());
  if (kind == "list") {
    std::vector<WireValue> items;
    for (const auto& item : j.at("v")) items.push_back(from_json(item));
    return list(std::move(items));
  }
  if (kind == "map") {
    std::map<std::string, WireValue> items;
    for (const auto& [key, value] : j.at("v").items()) items[key] = from_json(value);
    return map(std::move(items));
  }
  if (kind == "enum") {
    return enumeration(j.at("type").get<std::string>(), j.at("variant").get<std::string>());
  }
  if (kind == "handle") {
    return handle({j.at("type").get<std::string>(), j.at("id").get<std::int64_t>(),
                   j.at("addr").get<std::string>()});
  }
  throw std::invalid_argument("unsupported wire kind: " + kind);
}

bool WireValue::operator==(const WireValue& other) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case WireKind::null: return true;
    case WireKind::boolean: return bool_ == other.bool_;
    case WireKind::integer: return int_ == other.int_;
    case WireKind::decimal:
    case WireKind::text: return text_ == other.text_;
    case WireKind::list: return list_ == other.list_;
    case WireKind::map: return map_ == other.map_;
    case WireKind::enumeration: return type_name_ == other.type_name_ && text_ == other.text_;
    case WireKind::handle: return handle_ == other.handle_;
  }
  return false;
}

WireSchema WireSchema::any_value() {
  WireSchema s;
  s.any = true;
  return s;
}

namespace {

WireSchema schema_of(WireKind kind) {
  WireSchema s;
  s.kind = kind;
  return s;
}

}  // namespace

WireSchema WireSchema::null_value() { return schema_of(WireKind::null); }
WireSchema WireSchema::boolean() { return schema_of(WireKind::boolean); }
WireSchema WireSchema::integer() { return schema_of(WireKind::integer); }
WireSchema WireSchema::decimal() { return schema_of(WireKind::decimal); }
WireSchema WireSchema::text() { return schema_of(WireKind::text); }

WireSchema WireSchema::list_of(WireSchema element) {
  WireSchema s = schema_of(WireKind::list);
  s.element = std::make_shared<WireSchema>(std::move(element));
  return s;
}

WireSchema WireSchema::map_of(WireSchema element) {
  WireSchema s = schema_of(WireKind::map);
  s.element = std::make_shared<WireSchema>(std::move(element));
  return s;
}

WireSchema WireSchema::enumeration(std::string type_name) {
  WireSchema s = schema_of(WireKind::enumeration);
  s.type_name = std::move(type_name);
  return s;
}

WireSchema WireSchema::handle_to(std::string type_name) {
  WireSchema s = schema_of(WireKind::handle);
  s.type_name = std::move(type_name);
  return s;
}

Json WireSchema::to_json() const {
  if (any) return Json{{"kind", "any"}};
  Json j{{"kind", to_string(kind)}};
  if (!type_name.empty()) j["type"] = type_name;
  if (element) j["element"] = element->to_json();
  return j;
}

std::optional<std::string> validate_value(const WireValue& value, const WireSchema& schema) {
  if (schema.any) return std::nullopt;
  if (value.kind() != schema.kind) {
    return "expected " + to_string(schema.kind) + ", got " + to_string(value.kind());
  }
  switch (schema.kind) {
    case WireKind::list:
      if (schema.element) {
        const auto& items = value.as_list();
        for (std::size_t i = 0; i < items.size(); ++i) {
          if (auto err = validate_value(items[i], *schema.element)) {
            return "list element " + std::to_string(i) + ": " + *err;
          }
        }
      }
      break;
    case WireKind::map:
      if (schema.element) {
        for (const auto& [key, item] : value.as_map()) {
          if (auto err = validate_value(item, *schema.element)) {
            return "map entry '" + key + "': " + *err;
          }
        }
      }
      break;
    case WireKind::enumeration:
      if (!schema.type_name.empty() && value.as_enum().type_name != schema.type_name) {
        return "expected enum " + schema.type_name + ", got " + value.as_enum().type_name;
      }
      break;
    case WireKind::handle:
      if (!schema.type_name.empty() && value.as_handle().type_name != schema.type_name) {
        return "expected handle to " + schema.type_name + ", got " + value.as_handle().type_name;
      }
      break;
    default:
      break;
  }
  return std::nullopt;
}

std::string encode_value(const WireValue& value) { return value.to_json().dump(); }

WireValue decode_value(const std::string& bytes, const WireSchema& schema) {
  WireValue value;
  try {
    value = WireValue::from_json(Json::parse(bytes));
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("malformed wire value: ") + e.what());
  }
  if (auto err = validate_value(value, schema)) {
    throw std::invalid_argument("wire value rejected by schema: " + *err);
  }
  return value;
}

}  // namespace seqbench::rpc
