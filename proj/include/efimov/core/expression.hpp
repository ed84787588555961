#pragma once
// Arithmetic expressions over named variables, compiled to a stack program
// that evaluates on doubles or dual numbers.
//
// Grammar: + - * / ^ (right associative), unary minus, parentheses,
// numbers, pi, named constants, and the functions
// cosh sinh tanh exp ln sin cos sqrt.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "efimov/core/dual.hpp"
#include "efimov/core/error.hpp"

namespace efimov {

class Expression {
 public:
  enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, PowConst, Pow, Cosh, Sinh, Tanh, Exp, Ln, Sin, Cos, Sqrt };
  struct Instr {
    Op op;
    double value = 0.0;
    int index = 0;
  };

  Expression() = default;

  static Expression parse(const std::string& text, const std::vector<std::string>& variables,
                          const std::map<std::string, double>& constants = {}) {
    Expression e;
    e.text_ = text;
    e.vars_ = variables;
    Parser p{text, variables, constants, e.code_, 0};
    p.skip();
    if (p.pos >= text.size()) p.error("empty expression");
    p.expr();
    p.skip();
    if (p.pos != text.size()) p.error("unexpected character");
    return e;
  }

  const std::string& text() const { return text_; }
  const std::vector<std::string>& variables() const { return vars_; }
  const std::vector<Instr>& code() const { return code_; }

  bool depends_on(int var) const {
    for (const auto& i : code_)
      if (i.op == Op::Var && i.index == var) return true;
    return false;
  }
  bool is_constant() const {
    for (const auto& i : code_)
      if (i.op == Op::Var) return false;
    return true;
  }

  // `x` must hold one entry per variable.
  template <class T>
  T eval(const T* x) const {
    using namespace efimov::math;
    std::vector<T> st;
    st.reserve(16);
    auto pop = [&st] {
      T v = st.back();
      st.pop_back();
      return v;
    };
    for (const auto& in : code_) {
      switch (in.op) {
        case Op::Const: st.push_back(T(in.value)); break;
        case Op::Var: st.push_back(x[in.index]); break;
        case Op::Add: { T b = pop(); st.back() = st.back() + b; break; }
        case Op::Sub: { T b = pop(); st.back() = st.back() - b; break; }
        case Op::Mul: { T b = pop(); st.back() = st.back() * b; break; }
        case Op::Div: {
          T b = pop();
          if (value_of(b) == 0.0) domain_error("division by zero", x);
          st.back() = st.back() / b;
          break;
        }
        case Op::Neg: st.back() = -st.back(); break;
        case Op::PowConst: {
          double p = in.value;
          if (p == std::floor(p) && std::abs(p) <= 64.0) {
            if (p < 0 && value_of(st.back()) == 0.0) domain_error("division by zero", x);
            st.back() = ipow(st.back(), static_cast<int>(p));
          } else {
            if (value_of(st.back()) < 0.0 || (p < 0 && value_of(st.back()) == 0.0))
              domain_error("non-integer power of a non-positive base", x);
            st.back() = pow(st.back(), p);
          }
          break;
        }
        case Op::Pow: {
          T b = pop();
          if (!(value_of(st.back()) > 0.0)) domain_error("variable power of a non-positive base", x);
          st.back() = exp(b * log(st.back()));
          break;
        }
        case Op::Cosh: st.back() = cosh(st.back()); break;
        case Op::Sinh: st.back() = sinh(st.back()); break;
        case Op::Tanh: st.back() = tanh(st.back()); break;
        case Op::Exp: st.back() = exp(st.back()); break;
        case Op::Ln:
          if (!(value_of(st.back()) > 0.0)) domain_error("logarithm of a non-positive value", x);
          st.back() = log(st.back());
          break;
        case Op::Sin: st.back() = sin(st.back()); break;
        case Op::Cos: st.back() = cos(st.back()); break;
        case Op::Sqrt:
          if (value_of(st.back()) < 0.0) domain_error("square root of a negative value", x);
          st.back() = sqrt(st.back());
          break;
      }
    }
    return st.back();
  }

  double operator()(const std::vector<double>& x) const { return eval(x.data()); }

 private:
  template <class T>
  [[noreturn]] void domain_error(const char* what, const T* x) const {
    std::string at;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (i) at += ", ";
      at += vars_[i] + "=" + std::to_string(ad::value_of(x[i]));
    }
    fail(ErrorCode::EvaluationError, what, " in '", text_, "' at ", at);
  }

  struct Parser {
    const std::string& s;
    const std::vector<std::string>& vars;
    const std::map<std::string, double>& consts;
    std::vector<Instr>& out;
    std::size_t pos;

    [[noreturn]] void error(const std::string& msg) const {
      fail(ErrorCode::ParseError, msg, " at column ", pos + 1, " in '", s, "'");
    }
    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    void expr() {
      term();
      for (;;) {
        if (accept('+')) {
          term();
          out.push_back({Op::Add});
        } else if (accept('-')) {
          term();
          out.push_back({Op::Sub});
        } else {
          return;
        }
      }
    }
    void term() {
      unary();
      for (;;) {
        if (accept('*')) {
          unary();
          out.push_back({Op::Mul});
        } else if (accept('/')) {
          unary();
          out.push_back({Op::Div});
        } else {
          return;
        }
      }
    }
    void unary() {
      if (accept('-')) {
        unary();
        out.push_back({Op::Neg});
      } else if (accept('+')) {
        unary();
      } else {
        power();
      }
    }
    void power() {
      primary();
      if (accept('^')) {
        std::size_t start = out.size();
        unary();
        bool constant = true;
        for (std::size_t i = start; i < out.size(); ++i)
          if (out[i].op == Op::Var) constant = false;
        if (constant) {
          Expression tmp;
          tmp.code_.assign(out.begin() + static_cast<long>(start), out.end());
          double p = tmp.eval<double>(nullptr);
          out.resize(start);
          out.push_back({Op::PowConst, p});
        } else {
          out.push_back({Op::Pow});
        }
      }
    }
    void primary() {
      skip();
      if (pos >= s.size()) error("unexpected end of expression");
      char c = s[pos];
      if (accept('(')) {
        expr();
        if (!accept(')')) error("expected ')'");
        return;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const char* begin = s.c_str() + pos;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) error("malformed number");
        pos += static_cast<std::size_t>(end - begin);
        out.push_back({Op::Const, v});
        return;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t b = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        std::string id = s.substr(b, pos - b);
        static const std::map<std::string, Op> funcs = {{"cosh", Op::Cosh}, {"sinh", Op::Sinh}, {"tanh", Op::Tanh},
                                                        {"exp", Op::Exp},   {"ln", Op::Ln},     {"sin", Op::Sin},
                                                        {"cos", Op::Cos},   {"sqrt", Op::Sqrt}};
        auto f = funcs.find(id);
        if (f != funcs.end()) {
          if (!accept('(')) error("expected '(' after " + id);
          expr();
          if (!accept(')')) error("expected ')'");
          out.push_back({f->second});
          return;
        }
        for (std::size_t i = 0; i < vars.size(); ++i)
          if (vars[i] == id) {
            out.push_back({Op::Var, 0.0, static_cast<int>(i)});
            return;
          }
        if (id == "pi") {
          out.push_back({Op::Const, M_PI});
          return;
        }
        auto k = consts.find(id);
        if (k != consts.end()) {
          out.push_back({Op::Const, k->second});
          return;
        }
        pos = b;
        error("unknown identifier '" + id + "'");
      }
      error(std::string("unexpected character '") + c + "'");
    }
  };

  std::string text_;
  std::vector<std::string> vars_;
  std::vector<Instr> code_;
};

}  // namespace efimov
