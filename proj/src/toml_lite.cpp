#include "drclab/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace drclab::toml {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(long line, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

bool valid_name(const std::string& s, bool allow_dots) {
    if (s.empty()) return false;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') continue;
        if (allow_dots && c == '.') continue;
        return false;
    }
    return !(allow_dots && (s.front() == '.' || s.back() == '.' || s.find("..") != std::string::npos));
}

/// Strips a trailing # comment, respecting double-quoted strings.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

std::string parse_string_token(const std::string& token, long line) {
    if (token.size() < 2 || token.back() != '"') fail(line, "unterminated string " + token);
    std::string out;
    for (std::size_t i = 1; i + 1 < token.size(); ++i) {
        char c = token[i];
        if (c == '"') fail(line, "stray quote inside string " + token);
        if (c != '\\') {
            out += c;
            continue;
        }
        if (i + 2 >= token.size()) fail(line, "dangling escape in string " + token);
        const char e = token[++i];
        switch (e) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            default: fail(line, std::string("unsupported escape \\") + e);
        }
    }
    return out;
}

bool integer_shaped(const std::string& t) {
    std::size_t i = (t[0] == '+' || t[0] == '-') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    return true;
}

Value parse_scalar(const std::string& token, long line) {
    if (token.empty()) fail(line, "empty value");
    if (token.front() == '"') return Value::string(parse_string_token(token, line));
    if (token == "true") return Value::boolean(true);
    if (token == "false") return Value::boolean(false);
    // from_chars takes no leading '+'
    const char* begin = token.data() + (token.front() == '+' ? 1 : 0);
    const char* end = token.data() + token.size();
    if (begin == end) fail(line, "unrecognized value: " + token);
    if (integer_shaped(token)) {
        std::int64_t v = 0;
        const auto res = std::from_chars(begin, end, v);
        if (res.ec != std::errc{} || res.ptr != end)
            fail(line, "integer out of range: " + token);
        return Value::integer(v);
    }
    double d = 0.0;
    const auto res = std::from_chars(begin, end, d);
    if (res.ec != std::errc{} || res.ptr != end)
        fail(line, "unrecognized value: " + token);
    return Value::real(d);
}

/// Splits a single-line array body on top-level commas (strings may
/// contain commas). Trailing comma tolerated.
std::vector<std::string> split_array_items(const std::string& body, long line) {
    std::vector<std::string> items;
    std::string current;
    bool in_string = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
        const char c = body[i];
        if (in_string) {
            current += c;
            if (c == '\\' && i + 1 < body.size()) current += body[++i];
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            current += c;
            in_string = true;
        } else if (c == '[') {
            fail(line, "nested arrays are not supported");
        } else if (c == ',') {
            items.push_back(trim(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (in_string) fail(line, "unterminated string in array");
    const std::string last = trim(current);
    if (!last.empty()) items.push_back(last);
    return items;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (s.find_first_of(".eE") == std::string::npos && s.find("inf") == std::string::npos &&
        s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

std::string escape_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

std::string render_value(const Value& v) {
    switch (v.kind()) {
        case Value::Kind::Integer: return std::to_string(v.as_integer());
        case Value::Kind::Float: return fmt_double(v.as_float());
        case Value::Kind::Boolean: return v.as_boolean() ? "true" : "false";
        case Value::Kind::String: return escape_string(v.as_string());
        case Value::Kind::Array: {
            std::string out = "[";
            const auto& items = v.as_array();
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (i) out += ", ";
                out += render_value(items[i]);
            }
            return out + "]";
        }
    }
    return {};
}

}  // namespace

Value Value::integer(std::int64_t v) {
    Value out;
    out.kind_ = Kind::Integer;
    out.int_ = v;
    return out;
}

Value Value::real(double v) {
    Value out;
    out.kind_ = Kind::Float;
    out.float_ = v;
    return out;
}

Value Value::boolean(bool v) {
    Value out;
    out.kind_ = Kind::Boolean;
    out.bool_ = v;
    return out;
}

Value Value::string(std::string v) {
    Value out;
    out.kind_ = Kind::String;
    out.string_ = std::move(v);
    return out;
}

Value Value::array(std::vector<Value> items) {
    Value out;
    out.kind_ = Kind::Array;
    out.items_ = std::move(items);
    return out;
}

std::int64_t Value::as_integer() const {
    if (kind_ != Kind::Integer) throw std::runtime_error("value is not an integer");
    return int_;
}

double Value::as_float() const {
    if (kind_ == Kind::Integer) return static_cast<double>(int_);
    if (kind_ != Kind::Float) throw std::runtime_error("value is not a number");
    return float_;
}

bool Value::as_boolean() const {
    if (kind_ != Kind::Boolean) throw std::runtime_error("value is not a boolean");
    return bool_;
}

const std::string& Value::as_string() const {
    if (kind_ != Kind::String) throw std::runtime_error("value is not a string");
    return string_;
}

const std::vector<Value>& Value::as_array() const {
    if (kind_ != Kind::Array) throw std::runtime_error("value is not an array");
    return items_;
}

bool Value::operator==(const Value& other) const {
    if (kind_ != other.kind_) return false;
    switch (kind_) {
        case Kind::Integer: return int_ == other.int_;
        case Kind::Float: return float_ == other.float_;
        case Kind::Boolean: return bool_ == other.bool_;
        case Kind::String: return string_ == other.string_;
        case Kind::Array: return items_ == other.items_;
    }
    return false;
}

const Value& Document::at(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw std::out_of_range("missing configuration key '" + key + "'");
    return it->second;
}

Document parse(const std::string& text) {
    Document doc;
    std::string prefix;
    std::istringstream in(text);
    std::string raw;
    long line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string body = trim(strip_comment(raw));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') fail(line, "unterminated table header " + body);
            const std::string name = trim(body.substr(1, body.size() - 2));
            if (!valid_name(name, true)) fail(line, "invalid table name '" + name + "'");
            prefix = name + ".";
            continue;
        }
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + body + "'");
        const std::string key = trim(body.substr(0, eq));
        if (!valid_name(key, false)) fail(line, "invalid key '" + key + "'");
        const std::string token = trim(body.substr(eq + 1));
        if (token.empty()) fail(line, "missing value for key '" + key + "'");

        Value value;
        if (token.front() == '[') {
            if (token.back() != ']') fail(line, "unterminated array for key '" + key + "'");
            std::vector<Value> items;
            for (const auto& item : split_array_items(token.substr(1, token.size() - 2), line))
                items.push_back(parse_scalar(item, line));
            value = Value::array(std::move(items));
        } else {
            value = parse_scalar(token, line);
        }
        const std::string path = prefix + key;
        if (doc.has(path)) fail(line, "duplicate key '" + path + "'");
        doc.set(path, std::move(value));
    }
    return doc;
}

Document parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse(buf.str());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::string serialize(const Document& doc) {
    std::string out;
    for (const auto& [key, value] : doc.entries()) {
        if (key.rfind('.') != std::string::npos) continue;
        out += key + " = " + render_value(value) + "\n";
    }
    std::string table;
    bool in_table = false;
    for (const auto& [key, value] : doc.entries()) {
        const std::size_t dot = key.rfind('.');
        if (dot == std::string::npos) continue;
        const std::string block = key.substr(0, dot);
        if (!in_table || block != table) {
            if (!out.empty()) out += "\n";
            out += "[" + block + "]\n";
            table = block;
            in_table = true;
        }
        out += key.substr(dot + 1) + " = " + render_value(value) + "\n";
    }
    return out;
}

void write_file(const std::string& path, const Document& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << serialize(doc);
}

}  // namespace drclab::toml
