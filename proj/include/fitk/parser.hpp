#ifndef FITK_PARSER_HPP
#define FITK_PARSER_HPP

#include <set>
#include <stdexcept>
#include <string>

#include "fitk/expr.hpp"

namespace fitk {

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
    std::size_t position;
};

// Grammar (whitespace insensitive):
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?          right-associative
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
// Function names exp, ln, sqrt, sin, cos are reserved; `^` exponents must
// reduce to rational constants. Any other identifier must be declared.
Expr parse_expr(const std::string& text, const std::set<std::string>& known_names);

}  // namespace fitk

#endif
