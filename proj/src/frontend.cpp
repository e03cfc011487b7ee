#include "wordver/frontend.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace wordver {

namespace {

struct Token {
  enum class Type { Ident, LParen, RParen, Comma, Semi, Equals, NotEquals,
                    Underscore, End };
  Type type = Type::End;
  std::string text;
  int line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return cur_; }
  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

private:
  void advance() {
    skipSpace();
    cur_.line = line_;
    cur_.col = col_;
    if (pos_ >= text_.size()) {
      cur_.type = Token::Type::End;
      cur_.text.clear();
      return;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string id;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '\'')) {
        id += text_[pos_];
        bump();
      }
      cur_.type = Token::Type::Ident;
      cur_.text = id;
      return;
    }
    switch (c) {
      case '(': bump(); cur_.type = Token::Type::LParen; return;
      case ')': bump(); cur_.type = Token::Type::RParen; return;
      case ',': bump(); cur_.type = Token::Type::Comma; return;
      case ';': bump(); cur_.type = Token::Type::Semi; return;
      case '_': bump(); cur_.type = Token::Type::Underscore; return;
      case '=': bump(); cur_.type = Token::Type::Equals; return;
      case '!':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
          bump();
          bump();
          cur_.type = Token::Type::NotEquals;
          return;
        }
        break;
      default: break;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_,
                     col_);
  }

  void skipSpace() {
    for (;;) {
      while (pos_ < text_.size() &&
             std::isspace(static_cast<unsigned char>(text_[pos_])))
        bump();
      if (pos_ < text_.size() && text_[pos_] == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') bump();
        continue;
      }
      break;
    }
  }

  void bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token cur_;
};

enum class LowerMode { Vars, Params };

bool isUpper(const std::string& s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

Item lowerItem(const Token& t, LowerMode mode) {
  char c = t.text[0];
  if (mode == LowerMode::Vars) {
    if (c == 'x' || c == 'y' || c == 'z') return Item::var(t.text, Kind::String);
    if (c == 'c') return Item::var(t.text, Kind::Symbol);
    throw ParseError("unknown variable '" + t.text +
                         "' (string vars x,y,z..., symbol vars c...)",
                     t.line, t.col);
  }
  if (c == 'u' || c == 'v' || c == 'w') return Item::param(t.text, Kind::String);
  if (c == 's') return Item::param(t.text, Kind::Symbol);
  throw ParseError("unknown parameter '" + t.text +
                       "' (string params u,v,w..., symbol params s...)",
                   t.line, t.col);
}

// Sequence of tokens up to a delimiter; `allowCalls` admits F(...) items.
Expression parseSeq(Lexer& lx, const Alphabet& alphabet, LowerMode mode,
                    bool allowCalls) {
  Expression e;
  for (;;) {
    const Token& t = lx.peek();
    if (t.type != Token::Type::Ident) return e;
    Token id = lx.take();
    if (isUpper(id.text)) {
      if (alphabet.has(id.text)) {
        e.append(Item::letter(id.text));
        continue;
      }
      if (lx.peek().type == Token::Type::LParen) {
        if (!allowCalls)
          throw ParseError("calls are not allowed here: " + id.text, id.line,
                           id.col);
        lx.take();  // (
        std::vector<Expression> args;
        if (lx.peek().type == Token::Type::RParen) {
          lx.take();
          // a single empty argument
          args.push_back(Expression::empty());
        } else {
          for (;;) {
            args.push_back(parseSeq(lx, alphabet, mode, allowCalls));
            if (lx.peek().type == Token::Type::Comma) {
              lx.take();
              continue;
            }
            if (lx.peek().type == Token::Type::RParen) {
              lx.take();
              break;
            }
            throw ParseError("expected ',' or ')' in call arguments",
                             lx.peek().line, lx.peek().col);
          }
        }
        e.append(Item::call(id.text, std::move(args)));
        continue;
      }
      throw ParseError("unknown letter '" + id.text +
                           "' (declare it in the alphabet)",
                       id.line, id.col);
    }
    e.append(lowerItem(id, mode));
  }
}

}  // namespace

std::vector<const Rule*> Program::rulesFor(const std::string& fn) const {
  std::vector<const Rule*> out;
  for (const Rule& r : rules)
    if (r.fn == fn) out.push_back(&r);
  return out;
}

Program parseProgram(const std::string& text) {
  Lexer lx(text);
  Program p;
  bool haveAlphabet = false;

  while (lx.peek().type != Token::Type::End) {
    Token head = lx.take();
    if (head.type != Token::Type::Ident)
      throw ParseError("expected a rule or declaration", head.line, head.col);
    if (head.text == "alphabet") {
      if (haveAlphabet)
        throw ParseError("duplicate alphabet declaration", head.line, head.col);
      // re-lex from the keyword: parseAlphabetDecl consumed nothing yet
      Alphabet a;
      while (lx.peek().type == Token::Type::Ident) {
        Token t = lx.take();
        if (!isUpper(t.text))
          throw ParseError("letters must be uppercase: " + t.text, t.line,
                           t.col);
        a.add(t.text);
      }
      if (lx.peek().type != Token::Type::Semi)
        throw ParseError("expected ';' after alphabet declaration",
                         lx.peek().line, lx.peek().col);
      lx.take();
      p.alphabet = a;
      haveAlphabet = true;
      continue;
    }
    if (!isUpper(head.text))
      throw ParseError("function names start uppercase: " + head.text,
                       head.line, head.col);
    if (p.alphabet.has(head.text))
      throw ParseError("function name collides with letter: " + head.text,
                       head.line, head.col);
    if (lx.peek().type != Token::Type::LParen)
      throw ParseError("expected '(' after function name", lx.peek().line,
                       lx.peek().col);
    lx.take();
    Rule r;
    r.fn = head.text;
    if (lx.peek().type == Token::Type::RParen) {
      lx.take();
      r.patterns.push_back(Expression::empty());
    } else {
      for (;;) {
        r.patterns.push_back(parseSeq(lx, p.alphabet, LowerMode::Vars, false));
        if (lx.peek().type == Token::Type::Comma) {
          lx.take();
          continue;
        }
        if (lx.peek().type == Token::Type::RParen) {
          lx.take();
          break;
        }
        throw ParseError("expected ',' or ')' in rule pattern", lx.peek().line,
                         lx.peek().col);
      }
    }
    if (lx.peek().type != Token::Type::Equals)
      throw ParseError("expected '=' in rule", lx.peek().line, lx.peek().col);
    lx.take();
    r.body = parseSeq(lx, p.alphabet, LowerMode::Vars, true);
    if (lx.peek().type != Token::Type::Semi)
      throw ParseError("expected ';' after rule body", lx.peek().line,
                       lx.peek().col);
    Token semi = lx.take();

    // body variables must be bound by the pattern
    std::set<Var> bound;
    for (const Expression& pat : r.patterns)
      for (const Var& v : vars(pat)) bound.insert(v);
    for (const Var& v : vars(r.body))
      if (!bound.count(v))
        throw ParseError("body variable '" + v.name + "' not bound in pattern",
                         semi.line, semi.col);

    auto it = p.arities.find(r.fn);
    if (it == p.arities.end()) {
      if (!p.rules.empty() && p.hasFunction(r.fn))
        throw ParseError("rules for " + r.fn + " must be contiguous", semi.line,
                         semi.col);
      p.arities[r.fn] = r.patterns.size();
    } else {
      if (it->second != r.patterns.size())
        throw ParseError("arity mismatch for " + r.fn, semi.line, semi.col);
      if (!p.rules.empty() && p.rules.back().fn != r.fn)
        throw ParseError("rules for " + r.fn + " must be contiguous", semi.line,
                         semi.col);
    }
    int index = 1;
    for (const Rule& prev : p.rules)
      if (prev.fn == r.fn) ++index;
    r.index = index;
    p.rules.push_back(std::move(r));
  }

  // dangling calls and repeated-variable placement are reported, not fatal
  for (const Rule& r : p.rules) {
    std::function<void(const Expression&)> scan = [&](const Expression& e) {
      for (const Item& it : e.items)
        if (it.isCall()) {
          if (!p.hasFunction(it.name))
            p.warnings.push_back("call to undefined function " + it.name);
          for (const Expression& a : it.args) scan(a);
        }
    };
    scan(r.body);
    std::set<Var> seen;
    for (const Expression& pat : r.patterns) {
      for (size_t i = 0; i < pat.size(); ++i) {
        const Item& it = pat.items[i];
        if (it.isVar() && it.kind == Kind::String) {
          Var v{it.name, it.kind};
          if (seen.count(v) && i + 1 != pat.size())
            p.warnings.push_back(
                "repeated string variable " + v.name + " in " + r.fn +
                " is not in tail position; symbolic driving will reject it");
          seen.insert(v);
        }
      }
    }
  }
  if (!p.hasFunction("Go")) p.warnings.push_back("no input point Go defined");
  return p;
}

std::string printProgram(const Program& p) {
  std::ostringstream os;
  os << "alphabet";
  for (const std::string& l : p.alphabet.letters()) os << ' ' << l;
  os << ";\n";
  auto seq = [](const Expression& e) { return e.isEmpty() ? "" : e.str(); };
  for (const Rule& r : p.rules) {
    os << r.fn << '(';
    for (size_t i = 0; i < r.patterns.size(); ++i) {
      if (i) os << ", ";
      os << seq(r.patterns[i]);
    }
    os << ") = " << seq(r.body) << ";\n";
  }
  return os.str();
}

Expression parseGoal(const std::string& text, const Program& program) {
  Lexer lx(text);
  Token head = lx.take();
  if (head.type != Token::Type::Ident || !isUpper(head.text))
    throw ParseError("goal must be a call like Go(u, v)", head.line, head.col);
  if (!program.hasFunction(head.text))
    throw ParseError("unknown function in goal: " + head.text, head.line,
                     head.col);
  if (lx.peek().type != Token::Type::LParen)
    throw ParseError("expected '(' in goal", lx.peek().line, lx.peek().col);
  lx.take();
  std::vector<Expression> args;
  if (lx.peek().type == Token::Type::RParen) {
    lx.take();
    args.push_back(Expression::empty());
  } else {
    for (;;) {
      args.push_back(parseSeq(lx, program.alphabet, LowerMode::Params, false));
      if (lx.peek().type == Token::Type::Comma) {
        lx.take();
        continue;
      }
      if (lx.peek().type == Token::Type::RParen) {
        lx.take();
        break;
      }
      throw ParseError("expected ',' or ')' in goal", lx.peek().line,
                       lx.peek().col);
    }
  }
  if (args.size() != program.arities.at(head.text))
    throw ParseError("goal arity mismatch for " + head.text, head.line,
                     head.col);

  // inline a trivial entry definition so the root matches the defining body
  auto rules = program.rulesFor(head.text);
  if (rules.size() == 1) {
    const Rule& r = *rules[0];
    bool plain = true;
    std::set<Var> seen;
    for (const Expression& pat : r.patterns) {
      if (pat.size() != 1 || !pat.items[0].isVar() ||
          pat.items[0].kind != Kind::String || seen.count(Var{pat.items[0].name, Kind::String}))
        plain = false;
      else
        seen.insert(Var{pat.items[0].name, Kind::String});
    }
    if (plain) {
      VarSubst sigma;
      for (size_t i = 0; i < r.patterns.size(); ++i)
        sigma.bind(Var{r.patterns[i].items[0].name, Kind::String}, args[i]);
      return sigma.apply(r.body);
    }
  }
  return Expression::single(Item::call(head.text, std::move(args)));
}

Expression parseTarget(const std::string& text, const Program& program) {
  Lexer lx(text);
  Expression e;
  while (lx.peek().type == Token::Type::Ident) {
    Token t = lx.take();
    if (!program.alphabet.has(t.text))
      throw ParseError("target must be a word over the alphabet, got '" +
                           t.text + "'",
                       t.line, t.col);
    e.append(Item::letter(t.text));
  }
  if (lx.peek().type != Token::Type::End)
    throw ParseError("unexpected token in target", lx.peek().line,
                     lx.peek().col);
  return e;
}

Expression parseGroundCall(const std::string& text, const Program& program) {
  Lexer lx(text);
  Token head = lx.take();
  if (head.type != Token::Type::Ident || !isUpper(head.text) ||
      !program.hasFunction(head.text))
    throw ParseError("expected a call to a program function", head.line,
                     head.col);
  if (lx.peek().type != Token::Type::LParen)
    throw ParseError("expected '('", lx.peek().line, lx.peek().col);
  lx.take();
  std::vector<Expression> args;
  if (lx.peek().type == Token::Type::RParen) {
    lx.take();
    args.push_back(Expression::empty());
  } else {
    for (;;) {
      Expression a = parseSeq(lx, program.alphabet, LowerMode::Params, false);
      if (!a.isGround())
        throw ParseError("interpreter arguments must be ground words",
                         lx.peek().line, lx.peek().col);
      args.push_back(a);
      if (lx.peek().type == Token::Type::Comma) {
        lx.take();
        continue;
      }
      if (lx.peek().type == Token::Type::RParen) {
        lx.take();
        break;
      }
      throw ParseError("expected ',' or ')'", lx.peek().line, lx.peek().col);
    }
  }
  if (args.size() != program.arities.at(head.text))
    throw ParseError("arity mismatch for " + head.text, head.line, head.col);
  return Expression::single(Item::call(head.text, std::move(args)));
}

ConstraintFile parseConstraintFile(const std::string& text) {
  ConstraintFile out;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);

  // default letters so the implication checks stay enabled
  bool declared = false;
  std::vector<WordEquation> eqs;
  std::vector<LinearInequality> negs;

  int lineNo = 0;
  for (const std::string& raw : lines) {
    ++lineNo;
    std::string stripped = raw;
    size_t hash = stripped.find('#');
    if (hash != std::string::npos) stripped = stripped.substr(0, hash);
    bool blank = true;
    for (char c : stripped)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;

    Lexer lx(stripped);
    if (lx.peek().type == Token::Type::Ident && lx.peek().text == "alphabet") {
      lx.take();
      Alphabet a;
      while (lx.peek().type == Token::Type::Ident) a.add(lx.take().text);
      if (lx.peek().type == Token::Type::Semi) lx.take();
      out.alphabet = a;
      declared = true;
      continue;
    }

    // pre-scan uppercase identifiers as letters when no declaration given
    Alphabet scanAlpha = out.alphabet;
    if (!declared) {
      Lexer scan(stripped);
      while (scan.peek().type != Token::Type::End) {
        Token t = scan.take();
        if (t.type == Token::Type::Ident && isUpper(t.text))
          scanAlpha.add(t.text);
      }
    }

    Lexer body(stripped);
    Expression first = parseSeq(body, scanAlpha, LowerMode::Params, false);
    if (body.peek().type == Token::Type::Equals) {
      body.take();
      Expression rhs = parseSeq(body, scanAlpha, LowerMode::Params, false);
      eqs.push_back(WordEquation{first, rhs});
    } else if (body.peek().type == Token::Type::NotEquals) {
      body.take();
      std::vector<Expression> segs;
      Expression seg;
      bool sawAny = false;
      for (;;) {
        if (body.peek().type == Token::Type::Underscore) {
          body.take();
          segs.push_back(seg);
          seg = Expression{};
          sawAny = true;
          continue;
        }
        if (body.peek().type == Token::Type::Ident) {
          Token t = body.take();
          if (isUpper(t.text)) {
            if (!scanAlpha.has(t.text))
              throw ParseError("unknown letter " + t.text, t.line, t.col);
            seg.append(Item::letter(t.text));
          } else {
            Item item = lowerItem(t, LowerMode::Params);
            if (item.kind != Kind::Symbol)
              throw ParseError(
                  "pattern segments may hold letters and symbol params only",
                  t.line, t.col);
            seg.append(item);
          }
          sawAny = true;
          continue;
        }
        break;
      }
      segs.push_back(seg);
      if (!sawAny)
        throw ParseError("empty inequality pattern", lineNo, 1);
      negs.push_back(LinearInequality{first, NegPattern::normalized(segs)});
    } else {
      throw ParseError("expected '=' or '!=' in constraint", body.peek().line,
                       body.peek().col);
    }
    if (!declared) out.alphabet = scanAlpha;
  }

  if (eqs.empty()) throw ParseError("constraint file has no equation", 1, 1);
  // pad so the inequality implication check keeps its precondition
  for (const char* l : {"A", "B", "C", "D"})
    if (out.alphabet.size() < 4 && !out.alphabet.has(l)) out.alphabet.add(l);

  out.config.goal = eqs.front();
  out.config.sideEqs.assign(eqs.begin() + 1, eqs.end());
  out.config.negs = negs;
  if (!isQuadraticEq(out.config.goal))
    throw ParseError("the goal equation must be quadratic", 1, 1);
  return out;
}

}  // namespace wordver
