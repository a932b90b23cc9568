#include "corpuskit/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace corpuskit::toml {

namespace {

[[noreturn]] void type_error(const char* wanted) {
    throw std::runtime_error(std::string("toml: value is not a ") + wanted);
}

struct Cursor {
    std::string_view text;
    size_t pos = 0;
    size_t line = 1;

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char take() {
        char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }
    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos;
    }
    void skip_ws_and_comment() {
        skip_ws();
        if (!eof() && peek() == '#') {
            while (!eof() && peek() != '\n') ++pos;
        }
    }
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(line, what); }
};

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_basic_string(Cursor& cur) {
    size_t start_line = cur.line;
    cur.take();  // opening quote
    std::string out;
    while (true) {
        if (cur.eof()) throw ParseError(start_line, "unterminated string");
        char c = cur.take();
        if (c == '"') break;
        if (c == '\n') throw ParseError(start_line, "newline in string");
        if (c == '\\') {
            if (cur.eof()) throw ParseError(start_line, "unterminated escape");
            char e = cur.take();
            switch (e) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default:
                    throw ParseError(start_line, std::string("unsupported escape \\") + e);
            }
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string parse_literal_string(Cursor& cur) {
    size_t start_line = cur.line;
    cur.take();  // opening quote
    std::string out;
    while (true) {
        if (cur.eof()) throw ParseError(start_line, "unterminated string");
        char c = cur.take();
        if (c == '\'') break;
        if (c == '\n') throw ParseError(start_line, "newline in string");
        out.push_back(c);
    }
    return out;
}

std::string parse_key_part(Cursor& cur) {
    cur.skip_ws();
    if (cur.eof()) cur.fail("expected key");
    if (cur.peek() == '"') return parse_basic_string(cur);
    if (cur.peek() == '\'') return parse_literal_string(cur);
    std::string out;
    while (!cur.eof() && is_bare_key_char(cur.peek())) out.push_back(cur.take());
    if (out.empty()) cur.fail("expected key");
    return out;
}

Value parse_value(Cursor& cur);

Value parse_number_or_bool(Cursor& cur) {
    size_t start_line = cur.line;
    std::string tok;
    while (!cur.eof()) {
        char c = cur.peek();
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '#' || c == ',' || c == ']') break;
        tok.push_back(cur.take());
    }
    if (tok.empty()) throw ParseError(start_line, "expected value");
    if (tok == "true") return Value(true);
    if (tok == "false") return Value(false);

    std::string digits;
    digits.reserve(tok.size());
    for (char c : tok) {
        if (c != '_') digits.push_back(c);
    }
    bool looks_float = false;
    for (char c : digits) {
        if (c == '.' || c == 'e' || c == 'E') {
            looks_float = true;
            break;
        }
    }
    if (digits == "inf" || digits == "+inf" || digits == "-inf" || digits == "nan") looks_float = true;

    if (!looks_float) {
        int64_t iv = 0;
        const char* first = digits.data();
        const char* last = digits.data() + digits.size();
        if (!digits.empty() && digits[0] == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, iv);
        if (ec == std::errc() && ptr == last) return Value(iv);
    }
    try {
        size_t consumed = 0;
        double dv = std::stod(digits, &consumed);
        if (consumed == digits.size()) return Value(dv);
    } catch (const std::exception&) {
    }
    throw ParseError(start_line, "bad value '" + tok + "'");
}

Value parse_array(Cursor& cur) {
    size_t start_line = cur.line;
    cur.take();  // '['
    Array items;
    while (true) {
        // Arrays may span lines, so newlines count as padding here.
        while (!cur.eof()) {
            cur.skip_ws_and_comment();
            if (!cur.eof() && (cur.peek() == '\n' || cur.peek() == '\r')) {
                cur.take();
                continue;
            }
            break;
        }
        if (cur.eof()) throw ParseError(start_line, "unterminated array");
        if (cur.peek() == ']') {
            cur.take();
            break;
        }
        items.push_back(parse_value(cur));
        while (!cur.eof()) {
            cur.skip_ws_and_comment();
            if (!cur.eof() && (cur.peek() == '\n' || cur.peek() == '\r')) {
                cur.take();
                continue;
            }
            break;
        }
        if (cur.eof()) throw ParseError(start_line, "unterminated array");
        if (cur.peek() == ',') {
            cur.take();
        } else if (cur.peek() != ']') {
            cur.fail("expected ',' or ']' in array");
        }
    }
    return Value(std::move(items));
}

Value parse_value(Cursor& cur) {
    cur.skip_ws();
    if (cur.eof()) cur.fail("expected value");
    char c = cur.peek();
    if (c == '"') return Value(parse_basic_string(cur));
    if (c == '\'') return Value(parse_literal_string(cur));
    if (c == '[') return parse_array(cur);
    return parse_number_or_bool(cur);
}

std::vector<std::string> parse_dotted_key(Cursor& cur, char terminator) {
    std::vector<std::string> parts;
    parts.push_back(parse_key_part(cur));
    cur.skip_ws();
    while (!cur.eof() && cur.peek() == '.') {
        cur.take();
        parts.push_back(parse_key_part(cur));
        cur.skip_ws();
    }
    if (cur.eof() || cur.peek() != terminator) {
        cur.fail(std::string("expected '") + terminator + "' after key");
    }
    cur.take();
    return parts;
}

void expect_line_end(Cursor& cur) {
    cur.skip_ws_and_comment();
    if (cur.eof()) return;
    char c = cur.peek();
    if (c == '\n') {
        cur.take();
        return;
    }
    if (c == '\r') {
        cur.take();
        if (!cur.eof() && cur.peek() == '\n') cur.take();
        return;
    }
    cur.fail("unexpected trailing characters");
}

}  // namespace

bool Value::as_bool() const {
    if (!is_bool()) type_error("boolean");
    return std::get<bool>(data_);
}

int64_t Value::as_int() const {
    if (!is_int()) type_error("integer");
    return std::get<int64_t>(data_);
}

double Value::as_double() const {
    if (is_int()) return static_cast<double>(std::get<int64_t>(data_));
    if (!is_float()) type_error("float");
    return std::get<double>(data_);
}

const std::string& Value::as_string() const {
    if (!is_string()) type_error("string");
    return std::get<std::string>(data_);
}

const Array& Value::as_array() const {
    if (!is_array()) type_error("array");
    return std::get<Array>(data_);
}

const Value& Table::at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error("toml: missing key '" + key + "'");
    return it->second;
}

const Table& Table::table(const std::string& key) const {
    auto it = tables_.find(key);
    if (it == tables_.end()) throw std::runtime_error("toml: missing table '" + key + "'");
    return it->second;
}

std::string Table::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? at(key).as_string() : fallback;
}

int64_t Table::get_int(const std::string& key, int64_t fallback) const {
    return has(key) ? at(key).as_int() : fallback;
}

double Table::get_double(const std::string& key, double fallback) const {
    return has(key) ? at(key).as_double() : fallback;
}

bool Table::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? at(key).as_bool() : fallback;
}

Table parse(std::string_view text) {
    Table root;
    Table* current = &root;
    Cursor cur{text};
    while (!cur.eof()) {
        cur.skip_ws_and_comment();
        if (cur.eof()) break;
        char c = cur.peek();
        if (c == '\n' || c == '\r') {
            cur.take();
            continue;
        }
        if (c == '[') {
            cur.take();
            auto parts = parse_dotted_key(cur, ']');
            current = &root;
            for (const auto& part : parts) current = &current->open_table(part);
            expect_line_end(cur);
            continue;
        }
        auto parts = parse_dotted_key(cur, '=');
        Table* target = current;
        for (size_t i = 0; i + 1 < parts.size(); ++i) target = &target->open_table(parts[i]);
        Value v = parse_value(cur);
        if (target->has(parts.back())) cur.fail("duplicate key '" + parts.back() + "'");
        target->set(parts.back(), std::move(v));
        expect_line_end(cur);
    }
    return root;
}

Table parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("toml: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

}  // namespace corpuskit::toml
