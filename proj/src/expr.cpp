#include "gkflow/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace gkflow {

namespace {

struct Lexer {
  const std::string& text;
  std::size_t pos = 0;

  explicit Lexer(const std::string& t) : text(t) {}

  void skip_space() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  bool eof() {
    skip_space();
    return pos >= text.size();
  }

  char peek() {
    skip_space();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) fail(std::string("expected '") + c + "' " + what);
  }

  [[noreturn]] void fail(const std::string& msg) {
    std::ostringstream os;
    os << "expression error at offset " << pos << " in \"" << text
       << "\": " << msg;
    throw ConfigError(os.str());
  }

  bool number_ahead() {
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return true;
    return false;
  }

  double number() {
    skip_space();
    const char* start = text.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(start, &end);
    if (end == start) fail("expected a number");
    pos += static_cast<std::size_t>(end - start);
    return v;
  }

  std::string word() {
    skip_space();
    std::size_t s = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos]))))
      ++pos;
    if (pos == s) fail("expected a name");
    return text.substr(s, pos - s);
  }
};

int axis_of(Lexer& lx, const std::string& w) {
  if (w.size() == 2 && w[0] == 'x' && w[1] >= '1' && w[1] <= '4')
    return w[1] - '1';
  lx.fail("unknown variable '" + w + "' (expected x1..x4)");
}

ExprFactor parse_factor(Lexer& lx) {
  ExprFactor f;
  const std::string w = lx.word();
  if (w == "sin")
    f.is_sin = true;
  else if (w == "cos")
    f.is_sin = false;
  else
    lx.fail("unknown function '" + w + "' (expected sin or cos)");
  lx.expect('(', "after function name");
  if (lx.number_ahead()) {
    f.wavenumber = lx.number();
    lx.expect('*', "between wavenumber and variable");
  }
  f.axis = axis_of(lx, lx.word());
  lx.expect(')', "to close the factor");
  return f;
}

ExprTerm parse_term(Lexer& lx) {
  ExprTerm t;
  bool saw_factor = false;
  if (lx.number_ahead()) {
    t.coef = lx.number();
  } else {
    t.factors.push_back(parse_factor(lx));
    saw_factor = true;
  }
  while (lx.accept('*')) {
    t.factors.push_back(parse_factor(lx));
    saw_factor = true;
  }
  (void)saw_factor;
  return t;
}

}  // namespace

FieldExpr parse_field_expr(const std::string& text) {
  Lexer lx(text);
  if (lx.eof()) throw ConfigError("empty expression");
  FieldExpr e;
  e.source = text;
  double sign = 1.0;
  if (lx.accept('-')) sign = -1.0;
  else lx.accept('+');
  while (true) {
    ExprTerm t = parse_term(lx);
    t.coef *= sign;
    e.terms.push_back(std::move(t));
    if (lx.eof()) break;
    if (lx.accept('+'))
      sign = 1.0;
    else if (lx.accept('-'))
      sign = -1.0;
    else
      lx.fail("expected '+', '-' or end of expression");
  }
  return e;
}

ScalarField evaluate(const FieldExpr& e, const GridSpec& g) {
  for (const ExprTerm& t : e.terms) {
    for (const ExprFactor& f : t.factors) {
      if (!g.axis_present(f.axis)) {
        std::ostringstream os;
        os << "expression \"" << e.source << "\" references suppressed axis x"
           << f.axis + 1;
        throw ConfigError(os.str());
      }
      const double cycles = f.wavenumber * g.period[f.axis] / kTwoPi;
      if (std::abs(cycles - std::round(cycles)) > 1e-9) {
        std::ostringstream os;
        os << "expression \"" << e.source << "\": wavenumber " << f.wavenumber
           << " is not periodic on axis x" << f.axis + 1 << " with period "
           << g.period[f.axis];
        throw ConfigError(os.str());
      }
    }
  }
  return ScalarField::sample(g, [&](double x1, double x2, double x3, double x4) {
    const double x[4] = {x1, x2, x3, x4};
    double acc = 0.0;
    for (const ExprTerm& t : e.terms) {
      double v = t.coef;
      for (const ExprFactor& f : t.factors) {
        const double arg = f.wavenumber * x[f.axis];
        v *= f.is_sin ? std::sin(arg) : std::cos(arg);
      }
      acc += v;
    }
    return acc;
  });
}

}  // namespace gkflow
