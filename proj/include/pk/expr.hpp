#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>

#include "pk/jets.hpp"

namespace pk::expr {

// Arithmetic expressions over named symbols, evaluated on jets.
//
// Grammar (operators by precedence, '^' binds tightest and is right
// associative):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//
// Recognized functions: log, exp, sqrt.  An exponent must evaluate to a
// constant using parameters only; symbols bound to jets cannot appear in it.
class Expr {
  public:
    // Throws ParseError on malformed input.
    static Expr parse(std::string_view text);

    // env binds symbols to jets (all of one shape), params binds symbols to
    // constants.  A name present in both resolves to the jet.  Throws
    // ConfigError for an unbound symbol or an empty env.
    jets::Jet eval(const std::map<std::string, jets::Jet>& env,
                   const std::map<std::string, double>& params) const;

    // Symbols referenced by the expression (function names excluded).
    std::set<std::string> symbols() const;

    const std::string& text() const { return text_; }

    struct Node;  // AST detail, defined in the implementation file

  private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace pk::expr
