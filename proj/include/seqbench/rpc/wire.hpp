#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace seqbench::rpc {

using Json = nlohmann::json;

enum class WireKind { null, boolean, integer, decimal, text, list, map, enumeration, handle };

std::string to_string(WireKind kind);

struct WireHandle {
  std::string type_name;
  std::int64_t instance_id = 0;
  std::string address;  // host:port of the owning server; lets chained calls cross servers
  bool operator==(const WireHandle&) const = default;
};

struct WireEnum {
  std::string type_name;
  std::string variant;
  bool operator==(const WireEnum&) const = default;
};

// Tagged value the toolkit can move between processes. Integers are 64-bit;
// decimals travel as exact strings so numeric rows survive language borders
// unchanged. encode/decode round-trips every value bit-exact.
class WireValue {
 public:
  WireValue() = default;

  static WireValue null();
  static WireValue boolean(bool v);
  static WireValue integer(std::int64_t v);
  static WireValue decimal(std::string digits);
  static WireValue text(std::string v);
  static WireValue list(std::vector<WireValue> items);
  static WireValue map(std::map<std::string, WireValue> items);
  static WireValue enumeration(std::string type_name, std::string variant);
  static WireValue handle(WireHandle h);

  WireKind kind() const { return kind_; }
  bool is_null() const { return kind_ == WireKind::null; }

  bool as_bool() const;
  std::int64_t as_int() const;
  const std::string& as_decimal() const;
  const std::string& as_text() const;
  const std::vector<WireValue>& as_list() const;
  const std::map<std::string, WireValue>& as_map() const;
  const WireEnum& as_enum() const;
  const WireHandle& as_handle() const;

  Json to_json() const;
  static WireValue from_json(const Json& j);

  bool operator==(const WireValue& other) const;

 private:
  WireKind kind_ = WireKind::null;
  bool bool_ = false;
  std::int64_t int_ = 0;
  std::string text_;  // decimal digits, text, enum variant
  std::string type_name_;
  std::vector<WireValue> list_;
  std::map<std::string, WireValue> map_;
  WireHandle handle_;
};

// Value shape expected at a parameter or result position. `any` accepts every
// supported kind; lists and maps validate elements recursively.
struct WireSchema {
  WireKind kind = WireKind::null;
  bool any = false;
  std::string type_name;  // enumeration / handle
  std::shared_ptr<WireSchema> element;

  static WireSchema any_value();
  static WireSchema null_value();
  static WireSchema boolean();
  static WireSchema integer();
  static WireSchema decimal();
  static WireSchema text();
  static WireSchema list_of(WireSchema element);
  static WireSchema map_of(WireSchema element);
  static WireSchema enumeration(std::string type_name);
  static WireSchema handle_to(std::string type_name);

  Json to_json() const;
};

// Empty optional when the value fits the schema, else a description of the
// first mismatch.
std::optional<std::string> validate_value(const WireValue& value, const WireSchema& schema);

// Canonical byte encoding (JSON) of a wire value.
std::string encode_value(const WireValue& value);

// Decodes and validates; throws std::invalid_argument on malformed bytes or
// schema mismatch.
WireValue decode_value(const std::string& bytes, const WireSchema& schema);

}  // namespace seqbench::rpc
