#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cylint/errors.hpp"

namespace cylint {

/// Parsed configuration tree. Scenario files use a TOML-style surface:
/// `#` comments, `[section]` and `[[list-of-tables]]` headers, and
/// `key = value` lines where a value is a number, bool, "string", array,
/// or inline table `{ k = v, ... }`. Arrays may span lines. Every node
/// remembers the line it came from so lookups can point at the file.
class ConfigNode {
public:
    enum class Kind { number, boolean, string, array, table };

    Kind kind = Kind::table;
    int line = 0;
    double number_value = 0.0;
    bool bool_value = false;
    std::string string_value;
    std::vector<ConfigNode> array_items;
    std::map<std::string, ConfigNode> table_entries;

    static const char* kind_name(Kind k) {
        switch (k) {
        case Kind::number: return "number";
        case Kind::boolean: return "bool";
        case Kind::string: return "string";
        case Kind::array: return "array";
        case Kind::table: return "table";
        }
        return "?";
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw config_error("line " + std::to_string(line) + ": " + message);
    }

    [[nodiscard]] bool has(const std::string& key) const {
        return kind == Kind::table && table_entries.count(key) > 0;
    }

    [[nodiscard]] const ConfigNode& at(const std::string& key) const {
        if (kind != Kind::table)
            fail("expected a table, found " + std::string(kind_name(kind)));
        const auto it = table_entries.find(key);
        if (it == table_entries.end())
            fail("missing key '" + key + "'");
        return it->second;
    }

    [[nodiscard]] double as_number() const {
        if (kind != Kind::number)
            fail("expected a number, found " + std::string(kind_name(kind)));
        return number_value;
    }

    [[nodiscard]] bool as_bool() const {
        if (kind != Kind::boolean)
            fail("expected a bool, found " + std::string(kind_name(kind)));
        return bool_value;
    }

    [[nodiscard]] const std::string& as_string() const {
        if (kind != Kind::string)
            fail("expected a string, found " + std::string(kind_name(kind)));
        return string_value;
    }

    /// Unsigned integer; accepts an exactly-integral number or a decimal
    /// digit string (for values beyond the 53-bit float range, e.g. seeds).
    [[nodiscard]] std::uint64_t as_u64() const {
        if (kind == Kind::string) {
            if (string_value.empty() ||
                string_value.find_first_not_of("0123456789") != std::string::npos)
                fail("expected an unsigned integer string");
            try {
                return std::stoull(string_value);
            } catch (const std::exception&) {
                fail("unsigned integer out of range");
            }
        }
        const double x = as_number();
        if (!(x >= 0.0) || x != std::floor(x) || x > 9007199254740992.0)
            fail("expected a nonnegative integer");
        return static_cast<std::uint64_t>(x);
    }

    [[nodiscard]] const std::vector<ConfigNode>& as_array() const {
        if (kind != Kind::array)
            fail("expected an array, found " + std::string(kind_name(kind)));
        return array_items;
    }

    [[nodiscard]] Eigen::VectorXd as_vector() const {
        const auto& items = as_array();
        Eigen::VectorXd v(static_cast<Eigen::Index>(items.size()));
        for (std::size_t i = 0; i < items.size(); ++i)
            v[static_cast<Eigen::Index>(i)] = items[i].as_number();
        return v;
    }

    /// Rectangular array-of-arrays.
    [[nodiscard]] Eigen::MatrixXd as_matrix() const {
        const auto& rows = as_array();
        if (rows.empty()) fail("matrix must have at least one row");
        const Eigen::VectorXd first = rows[0].as_vector();
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), first.size());
        m.row(0) = first;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const Eigen::VectorXd row = rows[i].as_vector();
            if (row.size() != first.size())
                rows[i].fail("matrix rows must have equal length");
            m.row(static_cast<Eigen::Index>(i)) = row;
        }
        return m;
    }

    [[nodiscard]] double number_or(const std::string& key, double fallback) const {
        return has(key) ? at(key).as_number() : fallback;
    }
    [[nodiscard]] std::uint64_t u64_or(const std::string& key, std::uint64_t fallback) const {
        return has(key) ? at(key).as_u64() : fallback;
    }
    [[nodiscard]] std::string string_or(const std::string& key, std::string fallback) const {
        return has(key) ? at(key).as_string() : fallback;
    }
    [[nodiscard]] bool bool_or(const std::string& key, bool fallback) const {
        return has(key) ? at(key).as_bool() : fallback;
    }
};

namespace detail {

class ConfigParser {
public:
    explicit ConfigParser(const std::string& text) : in_(text) {
        root_.kind = ConfigNode::Kind::table;
        root_.line = 0;
        current_ = &root_;
    }

    ConfigNode run() {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_;
            std::string stripped = strip_comment(raw);
            const std::string trimmed = trim(stripped);
            if (trimmed.empty()) continue;
            if (trimmed.rfind("[[", 0) == 0)
                open_list_table(trimmed);
            else if (trimmed[0] == '[')
                open_table(trimmed);
            else
                read_key_value(trimmed);
        }
        return std::move(root_);
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw config_error("line " + std::to_string(line_) + ": " + message);
    }

    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    /// Cut an unquoted '#' and everything after it.
    std::string strip_comment(const std::string& s) const {
        bool in_string = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const char c = s[i];
            if (in_string) {
                if (c == '\\') ++i;
                else if (c == '"') in_string = false;
            } else if (c == '"') {
                in_string = true;
            } else if (c == '#') {
                return s.substr(0, i);
            }
        }
        if (in_string) fail("unterminated string");
        return s;
    }

    /// Bracket depth outside strings; negative depth is malformed.
    int net_depth(const std::string& s) const {
        bool in_string = false;
        int depth = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const char c = s[i];
            if (in_string) {
                if (c == '\\') ++i;
                else if (c == '"') in_string = false;
            } else if (c == '"') {
                in_string = true;
            } else if (c == '[' || c == '{') {
                ++depth;
            } else if (c == ']' || c == '}') {
                --depth;
            }
        }
        return depth;
    }

    std::vector<std::string> split_path(const std::string& inner) const {
        std::vector<std::string> parts;
        std::string part;
        for (char c : inner) {
            if (c == '.') {
                part = trim(part);
                if (part.empty()) fail("empty path component in header");
                parts.push_back(part);
                part.clear();
            } else {
                part += c;
            }
        }
        part = trim(part);
        if (part.empty()) fail("empty path component in header");
        parts.push_back(part);
        return parts;
    }

    ConfigNode* descend(ConfigNode* node, const std::string& key) {
        auto [it, inserted] = node->table_entries.try_emplace(key);
        ConfigNode& child = it->second;
        if (inserted) {
            child.kind = ConfigNode::Kind::table;
            child.line = line_;
            return &child;
        }
        if (child.kind == ConfigNode::Kind::table) return &child;
        if (child.kind == ConfigNode::Kind::array && !child.array_items.empty() &&
            child.array_items.back().kind == ConfigNode::Kind::table)
            return &child.array_items.back();
        fail("'" + key + "' is not a table");
    }

    void open_table(const std::string& trimmed) {
        if (trimmed.back() != ']') fail("malformed section header");
        const auto parts = split_path(trimmed.substr(1, trimmed.size() - 2));
        ConfigNode* node = &root_;
        for (const auto& key : parts) node = descend(node, key);
        current_ = node;
    }

    void open_list_table(const std::string& trimmed) {
        if (trimmed.size() < 5 || trimmed.substr(trimmed.size() - 2) != "]]")
            fail("malformed list-of-tables header");
        const auto parts = split_path(trimmed.substr(2, trimmed.size() - 4));
        ConfigNode* node = &root_;
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = descend(node, parts[i]);
        auto [it, inserted] = node->table_entries.try_emplace(parts.back());
        ConfigNode& list = it->second;
        if (inserted) {
            list.kind = ConfigNode::Kind::array;
            list.line = line_;
        } else if (list.kind != ConfigNode::Kind::array) {
            fail("'" + parts.back() + "' is not a list of tables");
        }
        ConfigNode table;
        table.kind = ConfigNode::Kind::table;
        table.line = line_;
        list.array_items.push_back(std::move(table));
        current_ = &list.array_items.back();
    }

    void read_key_value(const std::string& first_line) {
        const std::size_t eq = find_unquoted_eq(first_line);
        if (eq == std::string::npos) fail("expected key = value");
        std::string key = trim(first_line.substr(0, eq));
        if (key.size() >= 2 && key.front() == '"' && key.back() == '"')
            key = key.substr(1, key.size() - 2);
        if (key.empty()) fail("empty key");
        if (key.find('.') != std::string::npos)
            fail("dotted keys are not supported; use a section header");
        if (current_->table_entries.count(key))
            fail("duplicate key '" + key + "'");

        std::string value_text = first_line.substr(eq + 1);
        const int start_line = line_;
        while (net_depth(value_text) > 0) {
            std::string raw;
            if (!std::getline(in_, raw)) fail("unterminated value");
            ++line_;
            value_text += '\n';
            value_text += strip_comment(raw);
        }

        std::size_t pos = 0;
        ConfigNode value = parse_value(value_text, pos, start_line);
        skip_ws(value_text, pos);
        if (pos != value_text.size()) fail("trailing characters after value");
        current_->table_entries.emplace(std::move(key), std::move(value));
    }

    static std::size_t find_unquoted_eq(const std::string& s) {
        bool in_string = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const char c = s[i];
            if (in_string) {
                if (c == '\\') ++i;
                else if (c == '"') in_string = false;
            } else if (c == '"') {
                in_string = true;
            } else if (c == '=') {
                return i;
            }
        }
        return std::string::npos;
    }

    static void skip_ws(const std::string& s, std::size_t& pos) {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    ConfigNode parse_value(const std::string& s, std::size_t& pos, int at_line) {
        skip_ws(s, pos);
        if (pos >= s.size()) fail("missing value");
        ConfigNode node;
        node.line = at_line;
        const char c = s[pos];
        if (c == '"') {
            node.kind = ConfigNode::Kind::string;
            node.string_value = parse_string(s, pos);
            return node;
        }
        if (c == '[') {
            node.kind = ConfigNode::Kind::array;
            ++pos;
            skip_ws(s, pos);
            if (pos < s.size() && s[pos] == ']') {
                ++pos;
                return node;
            }
            for (;;) {
                node.array_items.push_back(parse_value(s, pos, at_line));
                skip_ws(s, pos);
                if (pos >= s.size()) fail("unterminated array");
                if (s[pos] == ',') {
                    ++pos;
                    skip_ws(s, pos);
                    if (pos < s.size() && s[pos] == ']') { ++pos; return node; }
                    continue;
                }
                if (s[pos] == ']') { ++pos; return node; }
                fail("expected ',' or ']' in array");
            }
        }
        if (c == '{') {
            node.kind = ConfigNode::Kind::table;
            ++pos;
            skip_ws(s, pos);
            if (pos < s.size() && s[pos] == '}') {
                ++pos;
                return node;
            }
            for (;;) {
                skip_ws(s, pos);
                std::string key = parse_bare_or_quoted_key(s, pos);
                skip_ws(s, pos);
                if (pos >= s.size() || s[pos] != '=') fail("expected '=' in inline table");
                ++pos;
                if (node.table_entries.count(key)) fail("duplicate key '" + key + "'");
                node.table_entries.emplace(std::move(key), parse_value(s, pos, at_line));
                skip_ws(s, pos);
                if (pos >= s.size()) fail("unterminated inline table");
                if (s[pos] == ',') { ++pos; continue; }
                if (s[pos] == '}') { ++pos; return node; }
                fail("expected ',' or '}' in inline table");
            }
        }
        if (s.compare(pos, 4, "true") == 0 && is_value_end(s, pos + 4)) {
            node.kind = ConfigNode::Kind::boolean;
            node.bool_value = true;
            pos += 4;
            return node;
        }
        if (s.compare(pos, 5, "false") == 0 && is_value_end(s, pos + 5)) {
            node.kind = ConfigNode::Kind::boolean;
            node.bool_value = false;
            pos += 5;
            return node;
        }
        // number: consume until a delimiter, then require a full strtod parse
        std::size_t end = pos;
        while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end])) &&
               s[end] != ',' && s[end] != ']' && s[end] != '}')
            ++end;
        const std::string token = s.substr(pos, end - pos);
        char* parse_end = nullptr;
        const double x = std::strtod(token.c_str(), &parse_end);
        if (token.empty() || parse_end != token.c_str() + token.size() || !std::isfinite(x))
            fail("invalid value '" + token + "'");
        node.kind = ConfigNode::Kind::number;
        node.number_value = x;
        pos = end;
        return node;
    }

    static bool is_value_end(const std::string& s, std::size_t pos) {
        return pos >= s.size() || std::isspace(static_cast<unsigned char>(s[pos])) ||
               s[pos] == ',' || s[pos] == ']' || s[pos] == '}';
    }

    std::string parse_string(const std::string& s, std::size_t& pos) {
        ++pos; // opening quote
        std::string out;
        while (pos < s.size()) {
            const char c = s[pos++];
            if (c == '"') return out;
            if (c == '\\') {
                if (pos >= s.size()) fail("dangling escape in string");
                const char e = s[pos++];
                switch (e) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                default: fail(std::string("unknown escape '\\") + e + "'");
                }
            } else {
                out += c;
            }
        }
        fail("unterminated string");
    }

    std::string parse_bare_or_quoted_key(const std::string& s, std::size_t& pos) {
        if (pos < s.size() && s[pos] == '"') return parse_string(s, pos);
        std::size_t end = pos;
        while (end < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_' ||
                s[end] == '-'))
            ++end;
        if (end == pos) fail("expected a key");
        std::string key = s.substr(pos, end - pos);
        pos = end;
        return key;
    }

    std::istringstream in_;
    int line_ = 0;
    ConfigNode root_;
    ConfigNode* current_ = nullptr;
};

} // namespace detail

inline ConfigNode parse_config_text(const std::string& text) {
    return detail::ConfigParser(text).run();
}

inline ConfigNode parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open())
        throw config_error("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

} // namespace cylint
