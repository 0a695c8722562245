#include "stlgail/stl/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

#include "stlgail/error.hpp"

namespace stlgail::stl {
namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& names)
      : text_(text), names_(names) {}

  Formula parse_all() {
    Formula f = parse_disj();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(msg, pos_);
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  static bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  // Identifier at the cursor without consuming it.
  std::string_view peek_ident() {
    skip_ws();
    std::size_t end = pos_;
    if (end < text_.size() && ident_start(text_[end])) {
      while (end < text_.size() && ident_char(text_[end])) ++end;
    }
    return text_.substr(pos_, end - pos_);
  }

  Formula parse_disj() {
    std::vector<Formula> parts;
    parts.push_back(parse_conj());
    while (peek() == '|') {
      ++pos_;
      parts.push_back(parse_conj());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return Formula::disjunction(std::move(parts));
  }

  Formula parse_conj() {
    std::vector<Formula> parts;
    parts.push_back(parse_unary());
    while (peek() == '&') {
      ++pos_;
      parts.push_back(parse_unary());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return Formula::conjunction(std::move(parts));
  }

  Formula parse_unary() {
    if (peek() == '!') {
      ++pos_;
      return Formula::negate(parse_unary());
    }
    const auto id = peek_ident();
    if (id == "G" || id == "F") {
      const std::size_t save = pos_;
      pos_ += 1;
      if (peek() == '[') {
        ++pos_;
        const std::size_t at = pos_;
        const int t1 = parse_int();
        expect(",");
        const int t2 = parse_int();
        expect("]");
        if (t2 < t1) {
          throw SyntaxError("interval lower bound exceeds upper bound", at);
        }
        Formula child = parse_unary();
        const TimeInterval w{t1, t2};
        return id == "G" ? Formula::always(w, std::move(child))
                         : Formula::eventually(w, std::move(child));
      }
      pos_ = save;  // a variable that happens to be called G or F
    }
    return parse_atom();
  }

  Formula parse_atom() {
    if (peek() == '(') {
      ++pos_;
      Formula f = parse_disj();
      expect(")");
      return f;
    }
    if (peek_ident() == "TRUE") {
      pos_ += 4;
      return Formula::truth();
    }
    return parse_pred();
  }

  Formula parse_pred() {
    const std::size_t start = pos_;
    Predicate p;
    p.a.assign(names_.size(), 0.0);
    parse_term(p.a, 1.0);
    for (;;) {
      const char c = peek();
      if (c == '+' || c == '-') {
        ++pos_;
        parse_term(p.a, c == '-' ? -1.0 : 1.0);
      } else {
        break;
      }
    }
    bool negated = false;
    if (accept(">=") || accept(">")) {
      negated = false;
    } else if (accept("<=") || accept("<")) {
      negated = true;
    } else {
      fail("expected comparison operator");
    }
    p.b = parse_number();
    if (p.is_degenerate()) throw SyntaxError("degenerate predicate", start);
    Formula f = Formula::pred(std::move(p));
    return negated ? Formula::negate(std::move(f)) : f;
  }

  void parse_term(std::vector<double>& a, double sign) {
    double coeff = 1.0;
    const char c = peek();
    if (!ident_start(c)) {
      coeff = parse_number();
      expect("*");
    }
    const auto id = peek_ident();
    if (id.empty()) fail("expected variable name");
    std::size_t index = names_.size();
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == id) {
        index = i;
        break;
      }
    }
    if (index == names_.size()) throw UnknownVariable(std::string(id));
    pos_ += id.size();
    a[index] += sign * coeff;
  }

  int parse_int() {
    skip_ws();
    int v = 0;
    const auto* first = text_.data() + pos_;
    const auto* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || v < 0) fail("expected non-negative integer");
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

  double parse_number() {
    skip_ws();
    std::size_t p = pos_;
    bool negative = false;
    if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) {
      negative = text_[p] == '-';
      ++p;
    }
    double v = 0.0;
    const auto* first = text_.data() + p;
    const auto* last = text_.data() + text_.size();
    if (first == last || !(std::isdigit(static_cast<unsigned char>(*first)) ||
                           *first == '.')) {
      fail("expected number");
    }
    auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
    if (ec != std::errc{}) fail("malformed number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return negative ? -v : v;
  }

  std::string_view text_;
  const std::vector<std::string>& names_;
  std::size_t pos_ = 0;
};

void print_linexpr(std::string& out, const Predicate& p,
                   const std::vector<std::string>& names) {
  bool first = true;
  for (std::size_t d = 0; d < p.a.size(); ++d) {
    const double c = p.a[d];
    if (c == 0.0) continue;
    const std::string& name = d < names.size() ? names[d] : "x" + std::to_string(d);
    if (first) {
      out += c == 1.0 ? name : format_number(c) + "*" + name;
      first = false;
      continue;
    }
    if (c == 1.0) {
      out += " + " + name;
    } else if (c == -1.0) {
      out += " - " + name;
    } else if (c < 0.0) {
      out += " - " + format_number(-c) + "*" + name;
    } else {
      out += " + " + format_number(c) + "*" + name;
    }
  }
}

void print_into(std::string& out, const Formula& f,
                const std::vector<std::string>& names);

bool is_pred_like(const Formula& f) {
  return f.kind() == Kind::Pred ||
         (f.kind() == Kind::Not && f.child().kind() == Kind::Pred);
}

// Operand of '!' or a temporal operator.
void print_operand(std::string& out, const Formula& f,
                   const std::vector<std::string>& names) {
  const bool bare = f.kind() == Kind::True || f.is_temporal() ||
                    (f.kind() == Kind::Not && !is_pred_like(f));
  if (bare) {
    print_into(out, f, names);
  } else {
    out += '(';
    print_into(out, f, names);
    out += ')';
  }
}

void print_into(std::string& out, const Formula& f,
                const std::vector<std::string>& names) {
  switch (f.kind()) {
    case Kind::True:
      out += "TRUE";
      return;
    case Kind::Pred:
      print_linexpr(out, f.predicate(), names);
      out += " >= " + format_number(f.predicate().b);
      return;
    case Kind::Not:
      if (f.child().kind() == Kind::Pred) {
        print_linexpr(out, f.child().predicate(), names);
        out += " < " + format_number(f.child().predicate().b);
      } else {
        out += '!';
        print_operand(out, f.child(), names);
      }
      return;
    case Kind::And:
    case Kind::Or: {
      const bool is_and = f.kind() == Kind::And;
      bool first = true;
      for (const auto& c : f.children()) {
        if (!first) out += is_and ? " & " : " | ";
        first = false;
        const bool wrap = c.kind() == Kind::Or || (is_and && c.kind() == Kind::And);
        if (wrap) out += '(';
        print_into(out, c, names);
        if (wrap) out += ')';
      }
      return;
    }
    case Kind::Eventually:
    case Kind::Always:
      out += f.kind() == Kind::Always ? "G[" : "F[";
      out += std::to_string(f.window().t1) + "," + std::to_string(f.window().t2) + "]";
      print_operand(out, f.child(), names);
      return;
  }
}

}  // namespace

Formula parse(std::string_view text, const std::vector<std::string>& dim_names) {
  return Parser(text, dim_names).parse_all();
}

std::string print(const Formula& f, const std::vector<std::string>& dim_names) {
  std::string out;
  print_into(out, f, dim_names);
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace stlgail::stl
