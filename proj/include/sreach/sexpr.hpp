#pragma once

#include "sreach/errors.hpp"

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace sreach::sexpr {

/// One s-expression node: an atom or a parenthesised list.
struct Node {
    bool is_list = false;
    std::string atom;
    std::vector<Node> items;
    std::size_t line = 1;
    std::size_t column = 1;

    [[nodiscard]] bool is_atom() const noexcept { return !is_list; }

    // (head ...) with an atom head
    [[nodiscard]] bool is_form(std::string_view head) const {
        return is_list && !items.empty() && items.front().is_atom() && items.front().atom == head;
    }

    [[nodiscard]] std::string_view head() const {
        return (is_list && !items.empty() && items.front().is_atom()) ? std::string_view(items.front().atom)
                                                                      : std::string_view{};
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line, column); }
};

namespace detail {

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    std::vector<Node> read_all() {
        std::vector<Node> out;
        skip_space();
        while (pos_ < text_.size()) {
            out.push_back(read());
            skip_space();
        }
        return out;
    }

private:
    Node read() {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", line_, col_);
        Node node;
        node.line = line_;
        node.column = col_;
        char c = text_[pos_];
        if (c == ')') throw ParseError("unexpected ')'", line_, col_);
        if (c == '(') {
            node.is_list = true;
            advance();
            for (;;) {
                skip_space();
                if (pos_ >= text_.size()) throw ParseError("unterminated list", node.line, node.column);
                if (text_[pos_] == ')') {
                    advance();
                    break;
                }
                node.items.push_back(read());
            }
            return node;
        }
        std::size_t start = pos_;
        while (pos_ < text_.size() && !is_delim(text_[pos_])) advance();
        node.atom.assign(text_.substr(start, pos_ - start));
        return node;
    }

    static bool is_delim(char c) {
        return c == '(' || c == ')' || c == ';' || c == ' ' || c == '\t' || c == '\n' || c == '\r';
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                advance();
            } else {
                break;
            }
        }
    }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

} // namespace detail

/// Parses every top-level form in `text`.
inline std::vector<Node> read_all(std::string_view text) { return detail::Reader(text).read_all(); }

/// Parses exactly one top-level form.
inline Node read_one(std::string_view text) {
    auto forms = read_all(text);
    if (forms.empty()) throw ParseError("empty document", 1, 1);
    if (forms.size() > 1) forms[1].fail("trailing content after top-level form");
    return std::move(forms.front());
}

inline double to_real(const Node& n) {
    if (!n.is_atom()) n.fail("expected a number");
    double v = 0.0;
    const char* first = n.atom.data();
    const char* last = first + n.atom.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) n.fail("invalid number '" + n.atom + "'");
    return v;
}

inline long long to_integer(const Node& n) {
    if (!n.is_atom()) n.fail("expected an integer");
    long long v = 0;
    const char* first = n.atom.data();
    const char* last = first + n.atom.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) n.fail("invalid integer '" + n.atom + "'");
    return v;
}

/// Shortest round-tripping decimal form of a double.
inline std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, ptr);
    if (s == "-0") s = "0";
    return s;
}

} // namespace sreach::sexpr
