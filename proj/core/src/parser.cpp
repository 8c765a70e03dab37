#include "encpol/parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>

namespace encpol {

namespace {

bool is_reserved(char c) {
  return c == ',' || c == '<' || c == '>' || c == '(' || c == ')' || c == '=' ||
         c == '#';
}

bool is_word_char(char c) {
  return !std::isspace(static_cast<unsigned char>(c)) && !is_reserved(c);
}

struct Lexeme {
  enum class Kind {
    Word,   // bare identifier/value/keyword/integer
    LParen, RParen, Comma, Lt, Gt, Le, Ge, Eq, Hash,
    End,
  };
  Kind kind = Kind::End;
  std::string text;
  int line = 1;
  int column = 1;
};

class Scanner {
 public:
  explicit Scanner(std::string_view src) : src_(src) {}

  [[noreturn]] void fail(const std::string& message, int line, int column) const {
    throw ParseError(message, line, column);
  }
  [[noreturn]] void fail_here(const std::string& message) const {
    fail(message, line_, column_);
  }

  const Lexeme& peek() {
    if (!lookahead_) lookahead_ = scan();
    return *lookahead_;
  }

  Lexeme next() {
    if (lookahead_) {
      Lexeme l = std::move(*lookahead_);
      lookahead_.reset();
      return l;
    }
    return scan();
  }

  /// Raw mode for tuple items: consumes text until one of `stops`, which is
  /// left in the stream. Newlines and end of input are errors here.
  std::string raw_until(std::string_view stops) {
    if (lookahead_) {
      // Re-scan the lookahead token as raw text.
      pos_ = offset_of_lookahead_;
      line_ = lookahead_->line;
      column_ = lookahead_->column;
      lookahead_.reset();
    }
    std::string out;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (stops.find(c) != std::string_view::npos) return out;
      if (c == '\n') fail_here("unterminated tuple item");
      out.push_back(c);
      advance();
    }
    fail_here("unexpected end of input in tuple");
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  Lexeme scan() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
      advance();
    offset_of_lookahead_ = pos_;
    Lexeme l;
    l.line = line_;
    l.column = column_;
    if (pos_ >= src_.size()) return l;

    char c = src_[pos_];
    if (is_reserved(c)) {
      advance();
      switch (c) {
        case '(': l.kind = Lexeme::Kind::LParen; break;
        case ')': l.kind = Lexeme::Kind::RParen; break;
        case ',': l.kind = Lexeme::Kind::Comma; break;
        case '=': l.kind = Lexeme::Kind::Eq; break;
        case '#': l.kind = Lexeme::Kind::Hash; break;
        case '<':
        case '>':
          if (pos_ < src_.size() && src_[pos_] == '=') {
            advance();
            l.kind = c == '<' ? Lexeme::Kind::Le : Lexeme::Kind::Ge;
          } else {
            l.kind = c == '<' ? Lexeme::Kind::Lt : Lexeme::Kind::Gt;
          }
          break;
      }
      l.text = std::string(src_.substr(offset_of_lookahead_, pos_ - offset_of_lookahead_));
      return l;
    }

    l.kind = Lexeme::Kind::Word;
    while (pos_ < src_.size() && is_word_char(src_[pos_])) advance();
    l.text = std::string(src_.substr(offset_of_lookahead_, pos_ - offset_of_lookahead_));
    return l;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t offset_of_lookahead_ = 0;
  int line_ = 1;
  int column_ = 1;
  std::optional<Lexeme> lookahead_;
};

bool is_integer(const std::string& text) {
  if (text.empty()) return false;
  for (char c : text)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

std::uint64_t parse_u64(const Lexeme& l, Scanner& s) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(l.text.data(), l.text.data() + l.text.size(), value);
  if (ec != std::errc() || ptr != l.text.data() + l.text.size())
    s.fail("integer out of range: \"" + l.text + "\"", l.line, l.column);
  return value;
}

class PolicyParser {
 public:
  explicit PolicyParser(std::string_view src) : scanner_(src) {}

  PolicyAst parse() {
    expect_keyword("IF");
    ConditionExpr cond = parse_or();
    expect_keyword("THEN");
    expect_keyword("CAN");
    expect(Lexeme::Kind::Lt, "'<'");
    Token subject = tuple_item(",");
    expect(Lexeme::Kind::Comma, "','");
    Token action = tuple_item(",");
    expect(Lexeme::Kind::Comma, "','");
    Token target = tuple_item(">");
    expect(Lexeme::Kind::Gt, "'>'");
    const Lexeme& end = scanner_.peek();
    if (end.kind != Lexeme::Kind::End)
      scanner_.fail("trailing input after policy", end.line, end.column);
    return PolicyAst{std::move(cond), SatTuple{std::move(subject), std::move(action),
                                               std::move(target)}};
  }

 private:
  void expect_keyword(std::string_view kw) {
    Lexeme l = scanner_.next();
    if (l.kind != Lexeme::Kind::Word || l.text != kw)
      scanner_.fail("expected \"" + std::string(kw) + "\"", l.line, l.column);
  }

  Lexeme expect(Lexeme::Kind kind, std::string_view what) {
    Lexeme l = scanner_.next();
    if (l.kind != kind)
      scanner_.fail("expected " + std::string(what), l.line, l.column);
    return l;
  }

  Token tuple_item(std::string_view stops) {
    std::string raw = scanner_.raw_until(stops);
    const Lexeme& at = scanner_.peek();
    try {
      return Token::normalize(raw);
    } catch (const std::invalid_argument&) {
      scanner_.fail("empty tuple item", at.line, at.column);
    }
  }

  bool peek_keyword(std::string_view kw) {
    const Lexeme& l = scanner_.peek();
    return l.kind == Lexeme::Kind::Word && l.text == kw;
  }

  ConditionExpr parse_or() {
    std::vector<ConditionExpr> terms;
    terms.push_back(parse_and());
    while (peek_keyword("OR")) {
      scanner_.next();
      terms.push_back(parse_and());
    }
    if (terms.size() == 1) return std::move(terms.front());
    return ConditionExpr::disjunction(std::move(terms));
  }

  ConditionExpr parse_and() {
    std::vector<ConditionExpr> factors;
    factors.push_back(parse_factor());
    while (peek_keyword("AND")) {
      scanner_.next();
      factors.push_back(parse_factor());
    }
    if (factors.size() == 1) return std::move(factors.front());
    return ConditionExpr::conjunction(std::move(factors));
  }

  ConditionExpr parse_factor() {
    const Lexeme& l = scanner_.peek();
    if (l.kind == Lexeme::Kind::LParen) {
      scanner_.next();
      ConditionExpr inner = parse_or();
      expect(Lexeme::Kind::RParen, "')'");
      return inner;
    }
    if (l.kind != Lexeme::Kind::Word)
      scanner_.fail("expected a comparison or '('", l.line, l.column);

    Lexeme head = scanner_.next();
    if (is_integer(head.text) && peek_keyword("OF")) return parse_k_of(head);
    return parse_comparison(head);
  }

  ConditionExpr parse_k_of(const Lexeme& count) {
    scanner_.next();  // OF
    std::uint64_t k = parse_u64(count, scanner_);
    expect(Lexeme::Kind::LParen, "'('");
    std::vector<ConditionExpr> kids;
    kids.push_back(parse_or());
    while (scanner_.peek().kind == Lexeme::Kind::Comma) {
      scanner_.next();
      kids.push_back(parse_or());
    }
    expect(Lexeme::Kind::RParen, "')'");
    if (kids.size() < 2)
      scanner_.fail("threshold expression needs at least two alternatives",
                    count.line, count.column);
    if (k < 1 || k > kids.size())
      scanner_.fail("threshold " + std::to_string(k) + " out of range for " +
                        std::to_string(kids.size()) + " alternatives",
                    count.line, count.column);
    return ConditionExpr::k_of(static_cast<unsigned>(k), std::move(kids));
  }

  ConditionExpr parse_comparison(const Lexeme& name) {
    Lexeme op = scanner_.next();
    switch (op.kind) {
      case Lexeme::Kind::Eq: {
        Lexeme value = scanner_.next();
        if (value.kind != Lexeme::Kind::Word)
          scanner_.fail("expected a value after '='", value.line, value.column);
        // "name=3#2" is a numeric equality; "name=3" stays a string match.
        if (is_integer(value.text) && scanner_.peek().kind == Lexeme::Kind::Hash)
          return numeric_comparison(name, CmpOp::Equal, value);
        return ConditionExpr::compare(StringEq{name.text, value.text});
      }
      case Lexeme::Kind::Lt:
      case Lexeme::Kind::Gt:
      case Lexeme::Kind::Le:
      case Lexeme::Kind::Ge: {
        Lexeme constant = expect(Lexeme::Kind::Word, "an integer constant");
        if (!is_integer(constant.text))
          scanner_.fail("expected an integer constant", constant.line, constant.column);
        CmpOp cmp = op.kind == Lexeme::Kind::Lt   ? CmpOp::Less
                    : op.kind == Lexeme::Kind::Gt ? CmpOp::Greater
                    : op.kind == Lexeme::Kind::Le ? CmpOp::LessEq
                                                  : CmpOp::GreaterEq;
        return numeric_comparison(name, cmp, constant);
      }
      default:
        scanner_.fail("expected a comparison operator", op.line, op.column);
    }
  }

  ConditionExpr numeric_comparison(const Lexeme& name, CmpOp cmp,
                                   const Lexeme& constant) {
    std::uint64_t k = parse_u64(constant, scanner_);
    expect(Lexeme::Kind::Hash, "'#' and a bit width");
    Lexeme width = expect(Lexeme::Kind::Word, "a bit width");
    if (!is_integer(width.text))
      scanner_.fail("expected a bit width", width.line, width.column);
    std::uint64_t bits = parse_u64(width, scanner_);
    if (bits < 1 || bits > 64)
      scanner_.fail("bit width must be in 1..64", width.line, width.column);
    std::uint64_t max = bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
    if (k > max)
      scanner_.fail("constant " + std::to_string(k) + " does not fit in " +
                        std::to_string(bits) + " bits",
                    constant.line, constant.column);
    return ConditionExpr::compare(
        NumericCmp{name.text, cmp, k, static_cast<unsigned>(bits)});
  }

  Scanner scanner_;
};

void render_cond(const ConditionExpr& e, std::string& out, bool parenthesize) {
  if (parenthesize) out.push_back('(');
  switch (e.kind) {
    case ConditionExpr::Kind::Compare:
      if (const auto* eq = std::get_if<StringEq>(&e.comparison)) {
        out += eq->name;
        out.push_back('=');
        out += eq->value;
      } else {
        const auto& cmp = std::get<NumericCmp>(e.comparison);
        out += cmp.name;
        out += to_string(cmp.op);
        out += std::to_string(cmp.constant);
        out.push_back('#');
        out += std::to_string(cmp.bits);
      }
      break;
    case ConditionExpr::Kind::And:
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += " AND ";
        const auto& c = e.children[i];
        render_cond(c, out,
                    c.kind == ConditionExpr::Kind::And ||
                        c.kind == ConditionExpr::Kind::Or);
      }
      break;
    case ConditionExpr::Kind::Or:
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += " OR ";
        render_cond(e.children[i], out,
                    e.children[i].kind == ConditionExpr::Kind::Or);
      }
      break;
    case ConditionExpr::Kind::KOf:
      out += std::to_string(e.k);
      out += " OF (";
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += ", ";
        render_cond(e.children[i], out, false);
      }
      out.push_back(')');
      break;
  }
  if (parenthesize) out.push_back(')');
}

}  // namespace

PolicyAst parse_policy(std::string_view text) { return PolicyParser(text).parse(); }

std::vector<PolicyAst> parse_policy_file(std::string_view text) {
  std::vector<PolicyAst> out;
  std::size_t start = 0;
  int lineno = 1;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (!blank) {
      try {
        out.push_back(parse_policy(line));
      } catch (const ParseError& e) {
        throw ParseError(e.message(), lineno, e.column());
      }
    }
    start = end + 1;
    ++lineno;
  }
  return out;
}

AttributeAssignment parse_attributes(std::string_view text) {
  AttributeAssignment attrs;
  std::size_t start = 0;
  int lineno = 1;
  auto column_of = [](std::size_t offset) { return static_cast<int>(offset) + 1; };
  auto check_chars = [](std::string_view part, int lineno) {
    std::size_t bad = part.find_first_of(",<>");
    if (bad != std::string_view::npos)
      throw ParseError(std::string("character '") + part[bad] +
                           "' is not allowed in attribute names or values",
                       lineno, static_cast<int>(bad) + 1);
  };
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) {
      start = end + 1;
      ++lineno;
      continue;
    }
    check_chars(line, lineno);

    std::size_t numeric_sep = line.find(":=");
    std::size_t string_sep = line.find('=');
    try {
      if (numeric_sep != std::string_view::npos &&
          (string_sep == std::string_view::npos || numeric_sep < string_sep)) {
        std::string_view name = line.substr(0, numeric_sep);
        std::string_view rest = line.substr(numeric_sep + 2);
        std::size_t hash = rest.find('#');
        if (hash == std::string_view::npos)
          throw ParseError("numeric attribute needs a '#bits' width", lineno,
                           column_of(numeric_sep + 2));
        Token value_text = Token::normalize(rest.substr(0, hash));
        Token bits_text = Token::normalize(rest.substr(hash + 1));
        if (!is_integer(value_text.text()) || !is_integer(bits_text.text()))
          throw ParseError("malformed numeric attribute", lineno,
                           column_of(numeric_sep + 2));
        std::uint64_t value = 0;
        std::uint64_t bits = 0;
        std::from_chars(value_text.text().data(),
                        value_text.text().data() + value_text.text().size(), value);
        std::from_chars(bits_text.text().data(),
                        bits_text.text().data() + bits_text.text().size(), bits);
        if (bits < 1 || bits > 64)
          throw ParseError("bit width must be in 1..64", lineno,
                           column_of(numeric_sep + 2 + hash + 1));
        Token name_token = Token::normalize(name);
        if (attrs.entries().contains(name_token.text()))
          throw ParseError("duplicate attribute \"" + name_token.text() + "\"",
                           lineno, 1);
        attrs.set_numeric(name_token.text(), value, static_cast<unsigned>(bits));
      } else if (string_sep != std::string_view::npos) {
        Token name_token = Token::normalize(line.substr(0, string_sep));
        if (attrs.entries().contains(name_token.text()))
          throw ParseError("duplicate attribute \"" + name_token.text() + "\"",
                           lineno, 1);
        attrs.set_string(name_token.text(), line.substr(string_sep + 1));
      } else {
        throw ParseError("expected \"name=value\" or \"name:=value#bits\"", lineno, 1);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), lineno, 1);
    }
    start = end + 1;
    ++lineno;
  }
  return attrs;
}

std::string render_policy(const PolicyAst& ast) {
  std::string out = "IF ";
  render_cond(ast.condition, out, false);
  out += " THEN CAN <";
  out += ast.sat.subject.text();
  out += ", ";
  out += ast.sat.action.text();
  out += ", ";
  out += ast.sat.target.text();
  out.push_back('>');
  return out;
}

}  // namespace encpol
