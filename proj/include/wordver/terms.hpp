#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace wordver {

// Kind of an unknown: string unknowns range over Sigma*, symbol unknowns
// over single letters of Sigma.
enum class Kind { String, Symbol };

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Expression;

// One token of an expression. Letters are alphabet constants, params are
// configuration unknowns, vars occur only in program rules, calls carry a
// function name and argument expressions.
struct Item {
  enum class Tag { Letter, Param, Var, Call };
  Tag tag = Tag::Letter;
  std::string name;
  Kind kind = Kind::String;          // for Param / Var
  std::vector<Expression> args;      // for Call

  static Item letter(std::string n);
  static Item param(std::string n, Kind k);
  static Item var(std::string n, Kind k);
  static Item call(std::string fn, std::vector<Expression> args);

  bool isLetter() const { return tag == Tag::Letter; }
  bool isParam() const { return tag == Tag::Param; }
  bool isVar() const { return tag == Tag::Var; }
  bool isCall() const { return tag == Tag::Call; }
  bool isStringParam() const { return isParam() && kind == Kind::String; }
  bool isSymbolParam() const { return isParam() && kind == Kind::Symbol; }
};

struct Param {
  std::string name;
  Kind kind = Kind::String;
  bool operator==(const Param& o) const { return name == o.name && kind == o.kind; }
  bool operator!=(const Param& o) const { return !(*this == o); }
  bool operator<(const Param& o) const {
    if (name != o.name) return name < o.name;
    return kind < o.kind;
  }
  Item item() const { return Item::param(name, kind); }
};

struct Var {
  std::string name;
  Kind kind = Kind::String;
  bool operator==(const Var& o) const { return name == o.name && kind == o.kind; }
  bool operator<(const Var& o) const {
    if (name != o.name) return name < o.name;
    return kind < o.kind;
  }
  Item item() const { return Item::var(name, kind); }
};

// A flat sequence of items; concatenation stays normalized, the empty
// sequence is epsilon.
class Expression {
public:
  std::vector<Item> items;

  Expression() = default;
  explicit Expression(std::vector<Item> it) : items(std::move(it)) {}
  static Expression empty() { return Expression{}; }
  static Expression single(Item it) { return Expression{{std::move(it)}}; }

  bool isEmpty() const { return items.empty(); }
  size_t size() const { return items.size(); }

  Expression& append(const Expression& e) {
    items.insert(items.end(), e.items.begin(), e.items.end());
    return *this;
  }
  Expression& append(const Item& it) {
    items.push_back(it);
    return *this;
  }
  Expression slice(size_t from, size_t to) const {
    Expression r;
    r.items.assign(items.begin() + from, items.begin() + to);
    return r;
  }
  Expression slice(size_t from) const { return slice(from, items.size()); }

  bool isPassive() const;   // no calls, no vars
  bool isGround() const;    // letters only
  std::string str() const;  // canonical text
};

int cmp(const Item& a, const Item& b);
int cmp(const Expression& a, const Expression& b);
bool operator==(const Item& a, const Item& b);
bool operator==(const Expression& a, const Expression& b);
inline bool operator!=(const Expression& a, const Expression& b) { return !(a == b); }
inline bool operator<(const Expression& a, const Expression& b) { return cmp(a, b) < 0; }

std::set<Param> pars(const Expression& e);
std::set<Var> vars(const Expression& e);

// Type-respecting map from params to passive-or-not expressions. Unbound
// params map to themselves; application is a morphism preserving letters.
class Subst {
public:
  std::map<Param, Expression> bindings;

  Subst() = default;
  static Subst identity() { return Subst{}; }

  bool empty() const { return bindings.empty(); }

  // Rejects a symbol param bound to anything but a single letter or
  // symbol param.
  void bind(const Param& p, const Expression& image);
  const Expression* lookup(const Param& p) const;

  Expression apply(const Expression& e) const;

  // apply(e, a.then(b)) == apply(apply(e, a), b)
  Subst then(const Subst& next) const;

  std::string str() const;
};

// Substitution over rule variables, used while matching rules.
class VarSubst {
public:
  std::map<Var, Expression> bindings;
  void bind(const Var& v, const Expression& image);
  const Expression* lookup(const Var& v) const;
  Expression apply(const Expression& e) const;
};

// Issues parameters never seen before in the current run.
class NameSupply {
public:
  void reserve(const std::string& name) { used_.insert(name); }
  void reserveAll(const Expression& e);
  Param fresh(Kind kind, const std::string& hint);

private:
  std::set<std::string> used_;
  std::map<std::string, int> counters_;
};

class Alphabet {
public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> letters);

  void add(const std::string& name);
  bool has(const std::string& name) const { return set_.count(name) != 0; }
  size_t size() const { return letters_.size(); }
  const std::vector<std::string>& letters() const { return letters_; }

  static const std::string kDelimiter;  // "()", reserved for generalization

private:
  std::vector<std::string> letters_;  // sorted
  std::set<std::string> set_;
};

}  // namespace wordver
