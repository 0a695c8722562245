// Text form of formulas.
//
//   formula := disj
//   disj    := conj ('|' conj)*
//   conj    := unary ('&' unary)*
//   unary   := ('G'|'F') '[' INT ',' INT ']' unary | '!' unary | atom
//   atom    := '(' formula ')' | pred | 'TRUE'
//   pred    := linexpr CMP NUMBER        CMP := '>=' | '>' | '<=' | '<'
//   linexpr := term (('+'|'-') term)*
//   term    := NUMBER '*' IDENT | IDENT
//
// `>` and `>=` build Pred(a.x >= c); `<` and `<=` build Not(Pred(a.x >= c)).
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stlgail/stl/formula.hpp"

namespace stlgail::stl {

/// Throws SyntaxError (with byte position) or UnknownVariable.
Formula parse(std::string_view text, const std::vector<std::string>& dim_names);

/// Canonical text; parse(print(f), names) == f.
std::string print(const Formula& f, const std::vector<std::string>& dim_names);

/// Shortest decimal string that reads back to the same double.
std::string format_number(double v);

}  // namespace stlgail::stl
