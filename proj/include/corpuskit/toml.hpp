#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace corpuskit::toml {

// Minimal TOML reader covering what the toolkit's config files use:
// comments, bare/quoted keys, [table] and [dotted.table] headers, and
// string / integer / float / boolean / flat-array values. Dates, inline
// tables, arrays-of-tables, and multiline strings are not supported.

class ParseError : public std::runtime_error {
public:
    ParseError(size_t line, const std::string& what)
        : std::runtime_error("toml: line " + std::to_string(line) + ": " + what), line_(line) {}
    size_t line() const { return line_; }

private:
    size_t line_;
};

class Value;
using Array = std::vector<Value>;

class Value {
public:
    Value() = default;
    explicit Value(bool b) : data_(b) {}
    explicit Value(int64_t i) : data_(i) {}
    explicit Value(double d) : data_(d) {}
    explicit Value(std::string s) : data_(std::move(s)) {}
    explicit Value(Array a) : data_(std::move(a)) {}

    bool is_bool() const { return std::holds_alternative<bool>(data_); }
    bool is_int() const { return std::holds_alternative<int64_t>(data_); }
    bool is_float() const { return std::holds_alternative<double>(data_); }
    bool is_string() const { return std::holds_alternative<std::string>(data_); }
    bool is_array() const { return std::holds_alternative<Array>(data_); }

    bool as_bool() const;
    int64_t as_int() const;
    double as_double() const;  // accepts int or float
    const std::string& as_string() const;
    const Array& as_array() const;

private:
    std::variant<std::monostate, bool, int64_t, double, std::string, Array> data_;
};

class Table {
public:
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    bool has_table(const std::string& key) const { return tables_.count(key) > 0; }

    const Value& at(const std::string& key) const;
    const Table& table(const std::string& key) const;

    std::string get_string(const std::string& key) const { return at(key).as_string(); }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    int64_t get_int(const std::string& key) const { return at(key).as_int(); }
    int64_t get_int(const std::string& key, int64_t fallback) const;
    double get_double(const std::string& key) const { return at(key).as_double(); }
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, Value>& values() const { return values_; }
    const std::map<std::string, Table>& tables() const { return tables_; }

    void set(const std::string& key, Value v) { values_[key] = std::move(v); }
    Table& open_table(const std::string& key) { return tables_[key]; }

private:
    std::map<std::string, Value> values_;
    std::map<std::string, Table> tables_;
};

Table parse(std::string_view text);
Table parse_file(const std::string& path);

}  // namespace corpuskit::toml
