#include "wordver/terms.hpp"

#include <algorithm>
#include <sstream>

namespace wordver {

Item Item::letter(std::string n) {
  Item it;
  it.tag = Tag::Letter;
  it.name = std::move(n);
  return it;
}

Item Item::param(std::string n, Kind k) {
  Item it;
  it.tag = Tag::Param;
  it.name = std::move(n);
  it.kind = k;
  return it;
}

Item Item::var(std::string n, Kind k) {
  Item it;
  it.tag = Tag::Var;
  it.name = std::move(n);
  it.kind = k;
  return it;
}

Item Item::call(std::string fn, std::vector<Expression> args) {
  Item it;
  it.tag = Tag::Call;
  it.name = std::move(fn);
  it.args = std::move(args);
  return it;
}

bool Expression::isPassive() const {
  for (const Item& it : items)
    if (it.isCall() || it.isVar()) return false;
  return true;
}

bool Expression::isGround() const {
  for (const Item& it : items)
    if (!it.isLetter()) return false;
  return true;
}

int cmp(const Item& a, const Item& b) {
  if (a.tag != b.tag) return a.tag < b.tag ? -1 : 1;
  if (a.name != b.name) return a.name < b.name ? -1 : 1;
  if (a.tag == Item::Tag::Param || a.tag == Item::Tag::Var) {
    if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  }
  if (a.tag == Item::Tag::Call) {
    if (a.args.size() != b.args.size())
      return a.args.size() < b.args.size() ? -1 : 1;
    for (size_t i = 0; i < a.args.size(); ++i) {
      int c = cmp(a.args[i], b.args[i]);
      if (c != 0) return c;
    }
  }
  return 0;
}

int cmp(const Expression& a, const Expression& b) {
  size_t n = std::min(a.items.size(), b.items.size());
  for (size_t i = 0; i < n; ++i) {
    int c = cmp(a.items[i], b.items[i]);
    if (c != 0) return c;
  }
  if (a.items.size() != b.items.size())
    return a.items.size() < b.items.size() ? -1 : 1;
  return 0;
}

bool operator==(const Item& a, const Item& b) { return cmp(a, b) == 0; }
bool operator==(const Expression& a, const Expression& b) { return cmp(a, b) == 0; }

static void printItem(std::ostringstream& os, const Item& it) {
  switch (it.tag) {
    case Item::Tag::Letter:
    case Item::Tag::Param:
    case Item::Tag::Var:
      os << it.name;
      break;
    case Item::Tag::Call: {
      os << it.name << '(';
      for (size_t i = 0; i < it.args.size(); ++i) {
        if (i) os << ", ";
        os << it.args[i].str();
      }
      os << ')';
      break;
    }
  }
}

std::string Expression::str() const {
  if (items.empty()) return "ε";
  std::ostringstream os;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) os << ' ';
    printItem(os, items[i]);
  }
  return os.str();
}

static void collectPars(const Expression& e, std::set<Param>& out) {
  for (const Item& it : e.items) {
    if (it.isParam()) out.insert(Param{it.name, it.kind});
    if (it.isCall())
      for (const Expression& a : it.args) collectPars(a, out);
  }
}

std::set<Param> pars(const Expression& e) {
  std::set<Param> out;
  collectPars(e, out);
  return out;
}

static void collectVars(const Expression& e, std::set<Var>& out) {
  for (const Item& it : e.items) {
    if (it.isVar()) out.insert(Var{it.name, it.kind});
    if (it.isCall())
      for (const Expression& a : it.args) collectVars(a, out);
  }
}

std::set<Var> vars(const Expression& e) {
  std::set<Var> out;
  collectVars(e, out);
  return out;
}

void Subst::bind(const Param& p, const Expression& image) {
  if (p.kind == Kind::Symbol) {
    bool ok = image.size() == 1 &&
              (image.items[0].isLetter() || image.items[0].isSymbolParam());
    if (!ok)
      throw Error("symbol parameter " + p.name +
                  " bound to non-symbol image: " + image.str());
  }
  bindings[p] = image;
}

const Expression* Subst::lookup(const Param& p) const {
  auto it = bindings.find(p);
  return it == bindings.end() ? nullptr : &it->second;
}

Expression Subst::apply(const Expression& e) const {
  Expression out;
  for (const Item& it : e.items) {
    if (it.isParam()) {
      auto found = bindings.find(Param{it.name, it.kind});
      if (found != bindings.end()) {
        out.append(found->second);
        continue;
      }
      out.append(it);
    } else if (it.isCall()) {
      std::vector<Expression> args;
      args.reserve(it.args.size());
      for (const Expression& a : it.args) args.push_back(apply(a));
      out.append(Item::call(it.name, std::move(args)));
    } else {
      out.append(it);
    }
  }
  return out;
}

Subst Subst::then(const Subst& next) const {
  Subst out;
  for (const auto& [p, img] : bindings) out.bind(p, next.apply(img));
  for (const auto& [p, img] : next.bindings)
    if (!bindings.count(p)) out.bind(p, img);
  return out;
}

std::string Subst::str() const {
  if (bindings.empty()) return "id";
  std::ostringstream os;
  bool first = true;
  for (const auto& [p, img] : bindings) {
    if (!first) os << ", ";
    first = false;
    os << p.name << " -> " << img.str();
  }
  return os.str();
}

void VarSubst::bind(const Var& v, const Expression& image) { bindings[v] = image; }

const Expression* VarSubst::lookup(const Var& v) const {
  auto it = bindings.find(v);
  return it == bindings.end() ? nullptr : &it->second;
}

Expression VarSubst::apply(const Expression& e) const {
  Expression out;
  for (const Item& it : e.items) {
    if (it.isVar()) {
      auto found = bindings.find(Var{it.name, it.kind});
      if (found != bindings.end()) {
        out.append(found->second);
        continue;
      }
      out.append(it);
    } else if (it.isCall()) {
      std::vector<Expression> args;
      for (const Expression& a : it.args) args.push_back(apply(a));
      out.append(Item::call(it.name, std::move(args)));
    } else {
      out.append(it);
    }
  }
  return out;
}

void NameSupply::reserveAll(const Expression& e) {
  for (const Param& p : pars(e)) reserve(p.name);
}

Param NameSupply::fresh(Kind kind, const std::string& hint) {
  std::string base;
  for (char c : hint) {
    if (c >= '0' && c <= '9') break;
    if (c == '\'') break;
    base += c;
  }
  if (base.empty()) base = kind == Kind::Symbol ? "s" : "u";
  for (;;) {
    int n = ++counters_[base];
    std::string cand = base + std::to_string(n);
    if (!used_.count(cand)) {
      used_.insert(cand);
      return Param{cand, kind};
    }
  }
}

const std::string Alphabet::kDelimiter = "()";

Alphabet::Alphabet(std::vector<std::string> letters) {
  for (auto& l : letters) add(l);
}

void Alphabet::add(const std::string& name) {
  if (set_.insert(name).second) {
    letters_.push_back(name);
    std::sort(letters_.begin(), letters_.end());
  }
}

}  // namespace wordver
