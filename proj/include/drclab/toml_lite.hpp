#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace drclab::toml {

/// Scalar or flat array value of a key/value config file.
class Value {
  public:
    enum class Kind { Integer, Float, Boolean, String, Array };

    static Value integer(std::int64_t v);
    static Value real(double v);
    static Value boolean(bool v);
    static Value string(std::string v);
    static Value array(std::vector<Value> items);

    Kind kind() const { return kind_; }
    bool is_integer() const { return kind_ == Kind::Integer; }
    bool is_float() const { return kind_ == Kind::Float; }
    bool is_boolean() const { return kind_ == Kind::Boolean; }
    bool is_string() const { return kind_ == Kind::String; }
    bool is_array() const { return kind_ == Kind::Array; }

    std::int64_t as_integer() const;
    /// Accepts Integer values too (widening), so `rho = 1` reads as 1.0.
    double as_float() const;
    bool as_boolean() const;
    const std::string& as_string() const;
    const std::vector<Value>& as_array() const;

    bool operator==(const Value& other) const;

  private:
    Kind kind_ = Kind::Integer;
    std::int64_t int_ = 0;
    double float_ = 0.0;
    bool bool_ = false;
    std::string string_;
    std::vector<Value> items_;
};

/// Flat document: dotted key paths ("sweep.horizons") mapped to values,
/// kept sorted so serialization is canonical.
class Document {
  public:
    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    /// Throws std::out_of_range naming the key.
    const Value& at(const std::string& key) const;
    void set(const std::string& key, Value v) { entries_[key] = std::move(v); }
    const std::map<std::string, Value>& entries() const { return entries_; }
    bool operator==(const Document& other) const { return entries_ == other.entries_; }

  private:
    std::map<std::string, Value> entries_;
};

/// Supported syntax: `[table]` headers (dotted names allowed), `key = value`
/// pairs, `#` comments, blank lines. Values: integers, floats, booleans,
/// double-quoted strings with \" \\ \n \t \r escapes, and single-line arrays
/// of scalars. Throws std::runtime_error with the line number and offending
/// key on malformed input.
Document parse(const std::string& text);
Document parse_file(const std::string& path);

/// Canonical form: root keys first, then one [table] block per key prefix,
/// both sorted; floats printed with 17 significant digits and a forced
/// decimal marker so parse(serialize(doc)) == doc.
std::string serialize(const Document& doc);
void write_file(const std::string& path, const Document& doc);

}  // namespace drclab::toml
