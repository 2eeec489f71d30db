#pragma once

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sprego/ast.hpp"

namespace sprego {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t offset, const std::string& msg)
      : std::runtime_error(msg + " at offset " + std::to_string(offset)), offset_(offset), message_(msg) {}
  std::size_t offset() const { return offset_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t offset_;
  std::string message_;
};

enum class TokenKind { Number, String, Error, Ident, Ref, Range, Op, LParen, RParen, Comma, Colon, LBrace, RBrace, End };

struct Token {
  TokenKind kind;
  std::string text;  // operator spelling, identifier, decoded string body, or reference text
  std::size_t offset;
  double number = 0;
};

namespace detail {

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$';
}

// True when `w` is [$]letters[$]digits.
inline bool looks_like_cell(std::string_view w) {
  std::size_t i = 0;
  if (i < w.size() && w[i] == '$') ++i;
  const std::size_t letters = i;
  while (i < w.size() && std::isalpha(static_cast<unsigned char>(w[i]))) ++i;
  if (i == letters) return false;
  if (i < w.size() && w[i] == '$') ++i;
  const std::size_t digits = i;
  while (i < w.size() && std::isdigit(static_cast<unsigned char>(w[i]))) ++i;
  return i > digits && i == w.size();
}

inline std::size_t skip_space(std::string_view s, std::size_t i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return i;
}

}  // namespace detail

/// Splits formula text into tokens. A leading '=' (optionally after '{') is consumed.
inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = detail::skip_space(src, 0);
  if (i < src.size() && src[i] == '{') {
    out.push_back({TokenKind::LBrace, "{", i});
    i = detail::skip_space(src, i + 1);
  }
  if (i < src.size() && src[i] == '=') ++i;

  while (true) {
    i = detail::skip_space(src, i);
    if (i >= src.size()) break;
    const char c = src[i];
    const std::size_t start = i;

    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
          i = j;
        }
      }
      const std::string text(src.substr(start, i - start));
      auto d = parse_number(text);
      if (!d) throw SyntaxError(start, "number out of range");
      out.push_back({TokenKind::Number, text, start, *d});
      continue;
    }

    if (c == '"') {
      std::string body;
      ++i;
      bool closed = false;
      while (i < src.size()) {
        if (src[i] == '"') {
          if (i + 1 < src.size() && src[i + 1] == '"') {
            body.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        body.push_back(src[i++]);
      }
      if (!closed) throw SyntaxError(start, "unterminated string");
      out.push_back({TokenKind::String, std::move(body), start});
      continue;
    }

    if (c == '#') {
      std::optional<ErrorKind> best;
      for (auto e : {ErrorKind::ValueErr, ErrorKind::DivZero, ErrorKind::NumErr, ErrorKind::NotAvailable,
                     ErrorKind::RefErr, ErrorKind::NameErr}) {
        if (src.substr(i).starts_with(to_string(e))) best = e;
      }
      if (!best) throw SyntaxError(start, "illegal character '#'");
      i += to_string(*best).size();
      out.push_back({TokenKind::Error, std::string(to_string(*best)), start});
      continue;
    }

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      while (i < src.size() && detail::is_word_char(src[i])) ++i;
      const std::string word(src.substr(start, i - start));
      const std::size_t next = detail::skip_space(src, i);
      const bool call = next < src.size() && src[next] == '(';
      if (!call && detail::looks_like_cell(word)) {
        // A reference immediately followed by ':' and another reference is one range token.
        if (i < src.size() && src[i] == ':') {
          std::size_t j = i + 1;
          while (j < src.size() && detail::is_word_char(src[j])) ++j;
          const std::string_view second = src.substr(i + 1, j - i - 1);
          if (detail::looks_like_cell(second)) {
            const std::string text(src.substr(start, j - start));
            try {
              (void)parse_a1(text);
            } catch (const A1Error& e) {
              throw SyntaxError(start + e.offset(), "reference out of range");
            }
            out.push_back({TokenKind::Range, text, start});
            i = j;
            continue;
          }
        }
        try {
          (void)parse_a1(word);
        } catch (const A1Error& e) {
          throw SyntaxError(start + e.offset(), "reference out of range");
        }
        out.push_back({TokenKind::Ref, word, start});
        continue;
      }
      if (word.find('$') != std::string::npos) throw SyntaxError(start, "malformed reference '" + word + "'");
      out.push_back({TokenKind::Ident, word, start});
      continue;
    }

    auto two = src.substr(i, 2);
    if (two == "<=" || two == ">=" || two == "<>") {
      out.push_back({TokenKind::Op, std::string(two), start});
      i += 2;
      continue;
    }
    switch (c) {
      case '=': case '<': case '>': case '&': case '+': case '-': case '*': case '/': case '^': case '%':
        out.push_back({TokenKind::Op, std::string(1, c), start});
        break;
      case '(': out.push_back({TokenKind::LParen, "(", start}); break;
      case ')': out.push_back({TokenKind::RParen, ")", start}); break;
      case ',': out.push_back({TokenKind::Comma, ",", start}); break;
      case ':': out.push_back({TokenKind::Colon, ":", start}); break;
      case '{': out.push_back({TokenKind::LBrace, "{", start}); break;
      case '}': out.push_back({TokenKind::RBrace, "}", start}); break;
      default: throw SyntaxError(start, std::string("illegal character '") + c + "'");
    }
    ++i;
  }
  out.push_back({TokenKind::End, "", src.size()});
  return out;
}

namespace detail {

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  ExprPtr parse_all() {
    ExprPtr e = comparison();
    if (peek().kind != TokenKind::End) throw SyntaxError(peek().offset, "unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }
  bool at_op(std::string_view op) const { return peek().kind == TokenKind::Op && peek().text == op; }

  ExprPtr comparison() {
    ExprPtr lhs = concat();
    while (peek().kind == TokenKind::Op) {
      const auto& t = peek().text;
      BinaryOp op;
      if (t == "=") op = BinaryOp::Eq;
      else if (t == "<>") op = BinaryOp::Ne;
      else if (t == "<") op = BinaryOp::Lt;
      else if (t == "<=") op = BinaryOp::Le;
      else if (t == ">") op = BinaryOp::Gt;
      else if (t == ">=") op = BinaryOp::Ge;
      else break;
      take();
      lhs = make_binary(op, lhs, concat());
    }
    return lhs;
  }

  ExprPtr concat() {
    ExprPtr lhs = additive();
    while (at_op("&")) {
      take();
      lhs = make_binary(BinaryOp::Concat, lhs, additive());
    }
    return lhs;
  }

  ExprPtr additive() {
    ExprPtr lhs = multiplicative();
    while (at_op("+") || at_op("-")) {
      const auto op = take().text == "+" ? BinaryOp::Add : BinaryOp::Sub;
      lhs = make_binary(op, lhs, multiplicative());
    }
    return lhs;
  }

  ExprPtr multiplicative() {
    ExprPtr lhs = power();
    while (at_op("*") || at_op("/")) {
      const auto op = take().text == "*" ? BinaryOp::Mul : BinaryOp::Div;
      lhs = make_binary(op, lhs, power());
    }
    return lhs;
  }

  ExprPtr power() {
    ExprPtr lhs = postfix();
    while (at_op("^")) {
      take();
      lhs = make_binary(BinaryOp::Pow, lhs, postfix());
    }
    return lhs;
  }

  ExprPtr postfix() {
    ExprPtr e = unary();
    while (at_op("%")) {
      take();
      e = make_unary(UnaryOp::Percent, e);
    }
    return e;
  }

  ExprPtr unary() {
    if (at_op("-")) {
      take();
      return make_unary(UnaryOp::Negate, unary());
    }
    if (at_op("+")) {
      take();
      return unary();
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Number: take(); return make_literal(Scalar::number(t.number));
      case TokenKind::String: take(); return make_literal(Scalar::text(t.text));
      case TokenKind::Error: take(); return make_literal(Scalar::error(*parse_error_kind(t.text)));
      case TokenKind::Ref: take(); return make_ref(std::get<CellAddress>(parse_a1(t.text)));
      case TokenKind::Range: take(); return make_range(parse_range(t.text));
      case TokenKind::LParen: {
        take();
        ExprPtr e = comparison();
        expect(TokenKind::RParen, "expected ')'");
        return e;
      }
      case TokenKind::Ident: return identifier();
      case TokenKind::End: throw SyntaxError(t.offset, "unexpected end of formula");
      case TokenKind::LBrace:
      case TokenKind::RBrace: throw SyntaxError(t.offset, "array constants are not supported");
      default: throw SyntaxError(t.offset, "unexpected '" + t.text + "'");
    }
  }

  ExprPtr identifier() {
    const Token& t = take();
    std::string upper = t.text;
    for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (peek().kind != TokenKind::LParen) {
      if (upper == "TRUE") return make_literal(Scalar::boolean(true));
      if (upper == "FALSE") return make_literal(Scalar::boolean(false));
      throw SyntaxError(t.offset, "unknown name '" + t.text + "'");
    }
    take();
    std::vector<ExprPtr> args;
    if (peek().kind == TokenKind::RParen) {
      take();
      return make_call(std::move(upper), std::move(args));
    }
    while (true) {
      if (peek().kind == TokenKind::Comma || peek().kind == TokenKind::RParen) {
        args.push_back(make_literal(Scalar::omitted()));
      } else {
        args.push_back(comparison());
      }
      if (peek().kind == TokenKind::Comma) {
        take();
        continue;
      }
      expect(TokenKind::RParen, "expected ',' or ')'");
      break;
    }
    return make_call(std::move(upper), std::move(args));
  }

  void expect(TokenKind k, const char* msg) {
    if (peek().kind != k) throw SyntaxError(peek().offset, msg);
    take();
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a token stream (as produced by tokenize, without braces).
inline ExprPtr parse(std::vector<Token> tokens) { return detail::Parser(std::move(tokens)).parse_all(); }

/// Formula text as typed. Surrounding braces mark array entry.
struct FormulaSource {
  std::string text;
  bool array_entered = false;
};

struct ParsedFormula {
  ExprPtr expr;
  bool array_entered = false;
};

inline ParsedFormula parse_formula(std::string_view src) {
  auto tokens = tokenize(src);
  bool array_entered = false;
  if (!tokens.empty() && tokens.front().kind == TokenKind::LBrace) {
    // tokens always end with End, so the closing brace sits at size() - 2
    if (tokens.size() < 3 || tokens[tokens.size() - 2].kind != TokenKind::RBrace)
      throw SyntaxError(tokens.back().offset, "expected '}' closing array formula");
    tokens.erase(tokens.end() - 2);
    tokens.erase(tokens.begin());
    array_entered = true;
  }
  return {parse(std::move(tokens)), array_entered};
}

inline ParsedFormula parse_formula(const FormulaSource& src) {
  auto p = parse_formula(std::string_view(src.text));
  p.array_entered = p.array_entered || src.array_entered;
  return p;
}

inline ExprPtr parse(std::string_view src) { return parse_formula(src).expr; }

// ---------------------------------------------------------------------------
// Unparse

namespace detail {

enum Level { kCompare = 1, kConcat, kAdd, kMul, kPow, kPercent, kNegate, kPrimary };

inline Level level_of(BinaryOp op) {
  switch (op) {
    case BinaryOp::Concat: return kConcat;
    case BinaryOp::Add:
    case BinaryOp::Sub: return kAdd;
    case BinaryOp::Mul:
    case BinaryOp::Div: return kMul;
    case BinaryOp::Pow: return kPow;
    default: return kCompare;
  }
}

inline Level level_of(const Expr& e) {
  if (const auto* b = std::get_if<Binary>(&e.node)) return level_of(b->op);
  if (const auto* u = std::get_if<Unary>(&e.node)) return u->op == UnaryOp::Percent ? kPercent : kNegate;
  if (const auto* l = std::get_if<Literal>(&e.node); l && l->value.is_number() && l->value.as_number() < 0)
    return kNegate;
  return kPrimary;
}

inline std::string_view spelling(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Pow: return "^";
    case BinaryOp::Concat: return "&";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "<>";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
  }
  return "?";
}

inline void unparse_into(const Expr& e, std::string& out);

inline void unparse_child(const Expr& e, bool parens, std::string& out) {
  if (parens) out.push_back('(');
  unparse_into(e, out);
  if (parens) out.push_back(')');
}

inline void unparse_literal(const Scalar& v, std::string& out) {
  if (v.is_text()) {
    out.push_back('"');
    for (char c : v.as_text()) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    out.push_back('"');
  } else if (v.is_number()) {
    out += format_number_roundtrip(v.as_number());
  } else if (!v.is_omitted() && !v.is_blank()) {
    out += render(v);
  }
}

inline void unparse_into(const Expr& e, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          unparse_literal(n.value, out);
        } else if constexpr (std::is_same_v<T, Ref>) {
          out += to_string(n.address);
        } else if constexpr (std::is_same_v<T, RangeLit>) {
          out += to_string(n.range.top_left) + ":" + to_string(n.range.bottom_right);
        } else if constexpr (std::is_same_v<T, Unary>) {
          if (n.op == UnaryOp::Negate) {
            out.push_back('-');
            unparse_child(*n.operand, level_of(*n.operand) < kNegate, out);
          } else {
            unparse_child(*n.operand, level_of(*n.operand) < kPercent, out);
            out.push_back('%');
          }
        } else if constexpr (std::is_same_v<T, Binary>) {
          const Level lv = level_of(n.op);
          unparse_child(*n.lhs, level_of(*n.lhs) < lv, out);
          out += spelling(n.op);
          unparse_child(*n.rhs, level_of(*n.rhs) <= lv, out);
        } else {
          out += n.name;
          out.push_back('(');
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out.push_back(',');
            unparse_into(*n.args[i], out);
          }
          out.push_back(')');
        }
      },
      e.node);
}

}  // namespace detail

/// Canonical formula text (no leading '=', no '$' markers).
inline std::string unparse(const Expr& e) {
  std::string out;
  detail::unparse_into(e, out);
  return out;
}

inline std::string unparse(const ExprPtr& e) { return unparse(*e); }

}  // namespace sprego
