#include "wordver/engine.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace wordver {

std::string Configuration::str() const {
  std::ostringstream os;
  os << expr.str();
  for (const WordEquation& e : eqs) os << " | " << e.str();
  for (const LinearInequality& n : negs) os << " | " << n.str();
  return os.str();
}

// ---------------------------------------------------------------------------
// homeomorphic embedding

namespace {

bool seqEmbed(const std::vector<Item>& s1, size_t i, const std::vector<Item>& s2,
              size_t j);

bool itemEmbed(const Item& a, const Item& b) {
  if (a.isLetter() && b.isLetter()) return a.name == b.name;
  if (a.isParam() && b.isParam()) return a.kind == b.kind;
  if (a.isCall() && b.isCall() && a.name == b.name &&
      a.args.size() == b.args.size()) {
    for (size_t i = 0; i < a.args.size(); ++i)
      if (!seqEmbed(a.args[i].items, 0, b.args[i].items, 0)) return false;
    return true;
  }
  return false;
}

bool seqEmbed(const std::vector<Item>& s1, size_t i, const std::vector<Item>& s2,
              size_t j) {
  if (i == s1.size()) return true;
  if (j == s2.size()) return false;
  if (itemEmbed(s1[i], s2[j]) && seqEmbed(s1, i + 1, s2, j + 1)) return true;
  // dive the whole remainder into an argument of a call
  if (s2[j].isCall())
    for (const Expression& arg : s2[j].args)
      if (seqEmbed(s1, i, arg.items, 0)) return true;
  return seqEmbed(s1, i, s2, j + 1);
}

}  // namespace

bool embed(const Expression& e1, const Expression& e2) {
  return seqEmbed(e1.items, 0, e2.items, 0);
}

// ---------------------------------------------------------------------------
// instance matching (params of the pattern as match variables)

namespace {

using MatchCont = std::function<bool()>;

bool matchSeq(const std::vector<Item>& pat, size_t pi,
              const std::vector<Item>& tgt, size_t ti, Subst& xi,
              const MatchCont& k);

bool matchArgsList(const std::vector<Expression>& pa,
                   const std::vector<Expression>& ta, size_t idx, Subst& xi,
                   const MatchCont& k) {
  if (idx == pa.size()) return k();
  return matchSeq(pa[idx].items, 0, ta[idx].items, 0, xi, [&]() {
    return matchArgsList(pa, ta, idx + 1, xi, k);
  });
}

bool matchSeq(const std::vector<Item>& pat, size_t pi,
              const std::vector<Item>& tgt, size_t ti, Subst& xi,
              const MatchCont& k) {
  if (pi == pat.size()) return ti == tgt.size() && k();
  const Item& t = pat[pi];
  if (t.isLetter()) {
    if (ti >= tgt.size() || !(tgt[ti] == t)) return false;
    return matchSeq(pat, pi + 1, tgt, ti + 1, xi, k);
  }
  if (t.isCall()) {
    if (ti >= tgt.size() || !tgt[ti].isCall() || tgt[ti].name != t.name ||
        tgt[ti].args.size() != t.args.size())
      return false;
    return matchArgsList(t.args, tgt[ti].args, 0, xi, [&]() {
      return matchSeq(pat, pi + 1, tgt, ti + 1, xi, k);
    });
  }
  if (t.isSymbolParam()) {
    if (ti >= tgt.size()) return false;
    if (!tgt[ti].isLetter() && !tgt[ti].isSymbolParam()) return false;
    Param p{t.name, t.kind};
    Expression img = Expression::single(tgt[ti]);
    if (const Expression* bound = xi.lookup(p)) {
      if (!(*bound == img)) return false;
      return matchSeq(pat, pi + 1, tgt, ti + 1, xi, k);
    }
    xi.bind(p, img);
    if (matchSeq(pat, pi + 1, tgt, ti + 1, xi, k)) return true;
    xi.bindings.erase(p);
    return false;
  }
  // string param: any segment
  Param p{t.name, t.kind};
  if (const Expression* bound = xi.lookup(p)) {
    const Expression b = *bound;
    if (ti + b.size() > tgt.size()) return false;
    for (size_t i = 0; i < b.size(); ++i)
      if (!(tgt[ti + i] == b.items[i])) return false;
    return matchSeq(pat, pi + 1, tgt, ti + b.size(), xi, k);
  }
  for (size_t len = 0; ti + len <= tgt.size(); ++len) {
    Expression img;
    img.items.assign(tgt.begin() + ti, tgt.begin() + ti + len);
    xi.bindings[p] = img;
    if (matchSeq(pat, pi + 1, tgt, ti + len, xi, k)) return true;
    xi.bindings.erase(p);
  }
  return false;
}

std::vector<LinearInequality> applySubstToNegsExact(
    const std::vector<LinearInequality>& negs, const Subst& xi) {
  std::vector<LinearInequality> out;
  for (const LinearInequality& n : negs) {
    LinearInequality t;
    t.subject = xi.apply(n.subject);
    for (const Expression& s : n.pattern.segments)
      t.pattern.segments.push_back(xi.apply(s));
    out.push_back(t);
  }
  return out;
}

}  // namespace

std::optional<Subst> reduce(const Configuration& c2, const Configuration& c1,
                            size_t alphabetSize) {
  std::optional<Subst> found;
  Subst xi;
  matchSeq(c1.expr.items, 0, c2.expr.items, 0, xi, [&]() {
    std::vector<WordEquation> eqs1;
    for (const WordEquation& e : c1.eqs)
      eqs1.push_back(WordEquation{xi.apply(e.lhs), xi.apply(e.rhs)});
    if (!eqsImplies(c2.eqs, eqs1)) return false;
    auto negs1 = applySubstToNegsExact(c1.negs, xi);
    for (const LinearInequality& t : negs1)
      if (!negImpliesOne(c2.negs, t, alphabetSize)) return false;
    found = xi;
    return true;
  });
  return found;
}

// ---------------------------------------------------------------------------
// symbolic rule matching

namespace {

struct SymState {
  Subst nu;
  VarSubst sigma;
  std::vector<WordEquation> eqs;  // raw narrowing equations

  void narrow(const Subst& b) {
    nu = nu.then(b);
    for (auto& [v, img] : sigma.bindings) img = b.apply(img);
    for (WordEquation& e : eqs) {
      e.lhs = b.apply(e.lhs);
      e.rhs = b.apply(e.rhs);
    }
  }
};

Subst oneBinding(const Param& p, const Expression& img) {
  Subst s;
  s.bind(p, img);
  return s;
}

struct SymMatcher {
  NameSupply& supply;
  std::vector<SymState> results;

  void matchRulePatterns(const Rule& rule, const std::vector<Expression>& args) {
    SymState st;
    matchArgs(st, rule, args, 0);
  }

  void matchArgs(SymState st, const Rule& rule,
                 const std::vector<Expression>& args, size_t idx) {
    if (idx == args.size()) {
      results.push_back(std::move(st));
      return;
    }
    Expression cur = st.nu.apply(args[idx]);
    matchTokens(std::move(st), rule.patterns[idx], 0, cur,
                [&](SymState s) { matchArgs(std::move(s), rule, args, idx + 1); });
  }

  using Done = std::function<void(SymState)>;

  // resolve a symbol var through sigma: returns the anchor item
  // (letter/symbol param) or the var itself when unbound
  static Item resolveSym(const SymState& st, const Item& varItem) {
    if (const Expression* b = st.sigma.lookup(Var{varItem.name, varItem.kind}))
      return b->items[0];
    return varItem;
  }

  void matchTokens(SymState st, const Expression& pat, size_t pi,
                   Expression rest, const Done& done) {
    if (pi == pat.size()) {
      // remaining items must narrow to empty
      Subst b;
      for (const Item& it : rest.items) {
        if (!it.isStringParam()) return;
        Param p{it.name, it.kind};
        if (!b.bindings.count(p)) b.bind(p, Expression::empty());
      }
      if (!b.empty()) st.narrow(b);
      done(std::move(st));
      return;
    }
    const Item& tok = pat.items[pi];

    if (tok.isLetter() || (tok.isVar() && tok.kind == Kind::Symbol)) {
      Item anchor = tok.isLetter() ? tok : resolveSym(st, tok);
      matchAnchor(std::move(st), pat, pi, anchor, tok, rest, done);
      return;
    }

    // string variable
    Var x{tok.name, tok.kind};
    if (const Expression* bound = st.sigma.lookup(x)) {
      if (pi + 1 != pat.size())
        throw Error("repeated string variable " + x.name +
                    " not in tail position");
      st.eqs.push_back(WordEquation{*bound, rest});
      done(std::move(st));
      return;
    }
    if (pi + 1 == pat.size()) {
      st.sigma.bind(x, rest);
      done(std::move(st));
      return;
    }
    const Item& next = pat.items[pi + 1];
    bool nextIsStringVar = next.isVar() && next.kind == Kind::String;
    if (nextIsStringVar) {
      // open-ended adjacency: enumerate boundaries and splits
      for (size_t j = 0; j <= rest.size(); ++j) {
        SymState s2 = st;
        s2.sigma.bind(x, rest.slice(0, j));
        matchTokens(std::move(s2), pat, pi + 1, rest.slice(j), done);
      }
      for (size_t j = 0; j < rest.size(); ++j) {
        if (!rest.items[j].isStringParam()) continue;
        Param u{rest.items[j].name, rest.items[j].kind};
        Param u1 = supply.fresh(Kind::String, u.name);
        Param u2 = supply.fresh(Kind::String, u.name);
        Expression img;
        img.append(u1.item()).append(u2.item());
        SymState s2 = st;
        Subst b = oneBinding(u, img);
        s2.narrow(b);
        Expression prefix = b.apply(rest.slice(0, j));
        prefix.append(u1.item());
        s2.sigma.bind(x, prefix);
        Expression rem = Expression::single(u2.item());
        rem.append(b.apply(rest.slice(j + 1)));
        matchTokens(std::move(s2), pat, pi + 1, rem, done);
      }
      return;
    }

    // anchor alignment: x consumes a prefix, the next token matches at the
    // chosen position
    Item anchor = next.isLetter() ? next : resolveSym(st, next);
    for (size_t j = 0; j < rest.size(); ++j) {
      const Item& at = rest.items[j];
      if (at.isLetter()) {
        if (anchor.isLetter()) {
          if (anchor.name != at.name) continue;
          SymState s2 = st;
          s2.sigma.bind(x, rest.slice(0, j));
          matchTokens(std::move(s2), pat, pi + 2, rest.slice(j + 1), done);
        } else if (anchor.isSymbolParam()) {
          SymState s2 = st;
          Subst b = oneBinding(Param{anchor.name, anchor.kind},
                               Expression::single(at));
          s2.narrow(b);
          s2.sigma.bind(x, b.apply(rest.slice(0, j)));
          matchTokens(std::move(s2), pat, pi + 2, b.apply(rest.slice(j + 1)),
                      done);
        } else {
          // unbound symbol var
          SymState s2 = st;
          s2.sigma.bind(x, rest.slice(0, j));
          s2.sigma.bind(Var{anchor.name, anchor.kind},
                        Expression::single(at));
          matchTokens(std::move(s2), pat, pi + 2, rest.slice(j + 1), done);
        }
      } else if (at.isSymbolParam()) {
        if (anchor.isLetter()) {
          SymState s2 = st;
          Subst b = oneBinding(Param{at.name, at.kind},
                               Expression::single(anchor));
          s2.narrow(b);
          s2.sigma.bind(x, b.apply(rest.slice(0, j)));
          matchTokens(std::move(s2), pat, pi + 2, b.apply(rest.slice(j + 1)),
                      done);
        } else if (anchor.isSymbolParam()) {
          SymState s2 = st;
          if (!(anchor == at)) {
            Subst b = oneBinding(Param{at.name, at.kind},
                                 Expression::single(anchor));
            s2.narrow(b);
            s2.sigma.bind(x, b.apply(rest.slice(0, j)));
            matchTokens(std::move(s2), pat, pi + 2, b.apply(rest.slice(j + 1)),
                        done);
          } else {
            s2.sigma.bind(x, rest.slice(0, j));
            matchTokens(std::move(s2), pat, pi + 2, rest.slice(j + 1), done);
          }
        } else {
          SymState s2 = st;
          s2.sigma.bind(x, rest.slice(0, j));
          s2.sigma.bind(Var{anchor.name, anchor.kind}, Expression::single(at));
          matchTokens(std::move(s2), pat, pi + 2, rest.slice(j + 1), done);
        }
      } else if (at.isStringParam()) {
        Param u{at.name, at.kind};
        Param u1 = supply.fresh(Kind::String, u.name);
        Param u2 = supply.fresh(Kind::String, u.name);
        Item mid;
        SymState s2 = st;
        if (anchor.isLetter() || anchor.isSymbolParam()) {
          mid = anchor;
        } else {
          Param s = supply.fresh(Kind::Symbol, "s");
          mid = s.item();
          s2.sigma.bind(Var{anchor.name, anchor.kind}, Expression::single(mid));
        }
        Expression img;
        img.append(u1.item()).append(mid).append(u2.item());
        Subst b = oneBinding(u, img);
        s2.narrow(b);
        Expression prefix = b.apply(rest.slice(0, j));
        prefix.append(u1.item());
        s2.sigma.bind(x, prefix);
        Expression rem = Expression::single(u2.item());
        rem.append(b.apply(rest.slice(j + 1)));
        matchTokens(std::move(s2), pat, pi + 2, rem, done);
      }
    }
  }

  // match a single anchored token (letter, or symbol var resolved via
  // sigma) against the head of rest
  void matchAnchor(SymState st, const Expression& pat, size_t pi,
                   const Item& anchor, const Item& original, Expression rest,
                   const Done& done) {
    if (rest.isEmpty()) return;
    const Item head = rest.items[0];
    if (head.isLetter()) {
      if (anchor.isLetter()) {
        if (anchor.name != head.name) return;
        matchTokens(std::move(st), pat, pi + 1, rest.slice(1), done);
      } else if (anchor.isSymbolParam()) {
        Subst b = oneBinding(Param{anchor.name, anchor.kind},
                             Expression::single(head));
        st.narrow(b);
        matchTokens(std::move(st), pat, pi + 1, b.apply(rest.slice(1)), done);
      } else {
        st.sigma.bind(Var{original.name, original.kind},
                      Expression::single(head));
        matchTokens(std::move(st), pat, pi + 1, rest.slice(1), done);
      }
      return;
    }
    if (head.isSymbolParam()) {
      if (anchor.isLetter()) {
        Subst b = oneBinding(Param{head.name, head.kind},
                             Expression::single(anchor));
        st.narrow(b);
        matchTokens(std::move(st), pat, pi + 1, b.apply(rest.slice(1)), done);
      } else if (anchor.isSymbolParam()) {
        if (anchor == head) {
          matchTokens(std::move(st), pat, pi + 1, rest.slice(1), done);
        } else {
          Subst b = oneBinding(Param{head.name, head.kind},
                               Expression::single(anchor));
          st.narrow(b);
          matchTokens(std::move(st), pat, pi + 1, b.apply(rest.slice(1)), done);
        }
      } else {
        st.sigma.bind(Var{original.name, original.kind},
                      Expression::single(head));
        matchTokens(std::move(st), pat, pi + 1, rest.slice(1), done);
      }
      return;
    }
    if (head.isStringParam()) {
      Param u{head.name, head.kind};
      // u empty: retry the same token
      {
        SymState s2 = st;
        Subst b = oneBinding(u, Expression::empty());
        s2.narrow(b);
        matchTokens(std::move(s2), pat, pi, b.apply(rest.slice(1)), done);
      }
      // u starts with the anchor
      {
        SymState s2 = st;
        Item mid;
        if (anchor.isLetter() || anchor.isSymbolParam()) {
          mid = anchor;
        } else {
          Param s = supply.fresh(Kind::Symbol, "s");
          mid = s.item();
          s2.sigma.bind(Var{original.name, original.kind},
                        Expression::single(mid));
        }
        Param u1 = supply.fresh(Kind::String, u.name);
        Expression img;
        img.append(mid).append(u1.item());
        Subst b = oneBinding(u, img);
        s2.narrow(b);
        Expression rem = Expression::single(u1.item());
        rem.append(b.apply(rest.slice(1)));
        matchTokens(std::move(s2), pat, pi + 1, rem, done);
      }
      return;
    }
  }
};

// ---------------------------------------------------------------------------
// redex location

bool findRedexIn(const Expression& e,
                 std::vector<std::pair<size_t, size_t>>& path) {
  for (size_t idx = 0; idx < e.size(); ++idx) {
    const Item& it = e.items[idx];
    if (!it.isCall()) continue;
    bool passiveArgs = true;
    for (const Expression& a : it.args)
      if (!a.isPassive()) passiveArgs = false;
    if (passiveArgs) {
      path.emplace_back(idx, SIZE_MAX);
      return true;
    }
    for (size_t ai = 0; ai < it.args.size(); ++ai) {
      if (!it.args[ai].isPassive()) {
        path.emplace_back(idx, ai);
        return findRedexIn(it.args[ai], path);
      }
    }
  }
  return false;
}

Expression replaceAtPath(const Expression& e,
                         const std::vector<std::pair<size_t, size_t>>& path,
                         size_t step, const Expression& repl) {
  Expression out = e;
  auto [idx, ai] = path[step];
  if (ai == SIZE_MAX) {
    Expression spliced;
    spliced.items.assign(out.items.begin(), out.items.begin() + idx);
    spliced.append(repl);
    spliced.items.insert(spliced.items.end(), out.items.begin() + idx + 1,
                         out.items.end());
    return spliced;
  }
  out.items[idx].args[ai] =
      replaceAtPath(out.items[idx].args[ai], path, step + 1, repl);
  return out;
}

const Item* redexAtPath(const Expression& e,
                        const std::vector<std::pair<size_t, size_t>>& path,
                        size_t step) {
  auto [idx, ai] = path[step];
  if (ai == SIZE_MAX) return &e.items[idx];
  return redexAtPath(e.items[idx].args[ai], path, step + 1);
}

// ---------------------------------------------------------------------------
// narrowing-equation simplification

bool simplifyNarrowEqs(SymState& st) {
  std::vector<WordEquation> kept;
  std::vector<WordEquation> work = st.eqs;
  size_t guard = 0;
  while (!work.empty()) {
    if (++guard > 1000) break;
    WordEquation e = work.back();
    work.pop_back();
    StripOutcome s = stripBothEnds(e);
    if (s.contradiction) return false;
    if (s.eq.trivial()) continue;
    LengthForceOutcome lf = lengthForce(s.eq);
    if (lf.unsat) return false;
    if (!lf.forced.empty()) {
      st.eqs = kept;
      st.eqs.insert(st.eqs.end(), work.begin(), work.end());
      st.eqs.push_back(s.eq);
      st.narrow(lf.forced);
      work = st.eqs;
      kept.clear();
      continue;
    }
    LengthSplitOutcome ls = lengthSplit(s.eq);
    if (ls.unsat) return false;
    if (ls.pieces.size() == 1 && ls.pieces[0] == s.eq) {
      kept.push_back(s.eq);
    } else {
      for (const WordEquation& p : ls.pieces) work.push_back(p);
    }
  }
  // quadraticity must hold; weaken anything beyond it
  std::vector<WordEquation> quad;
  for (const WordEquation& e : kept)
    if (isQuadraticEq(e)) quad.push_back(e);
  sortUnique(quad);
  st.eqs = quad;
  return true;
}

// earlier-rule failure conditions expressible as one linear inequality
std::vector<LinearInequality> negScr(const Program& program,
                                     const std::string& fn, int upToIndex,
                                     const std::vector<Expression>& args,
                                     NameSupply supplyCopy) {
  std::vector<LinearInequality> out;
  for (const Rule& r : program.rules) {
    if (r.fn != fn || r.index >= upToIndex) continue;
    SymMatcher m{supplyCopy, {}};
    try {
      m.matchRulePatterns(r, args);
    } catch (const Error&) {
      continue;  // unsupported pattern: no screening information
    }
    for (const SymState& st : m.results) {
      if (!st.eqs.empty()) continue;
      if (st.nu.bindings.size() != 1) continue;
      const auto& [p, img] = *st.nu.bindings.begin();
      // the image becomes a pattern: fresh string params are gaps
      std::vector<Expression> segs;
      Expression seg;
      bool ok = true;
      std::set<Param> seenGaps;
      for (const Item& it : img.items) {
        if (it.isStringParam()) {
          if (seenGaps.count(Param{it.name, it.kind})) {
            ok = false;
            break;
          }
          seenGaps.insert(Param{it.name, it.kind});
          segs.push_back(seg);
          seg = Expression{};
        } else {
          seg.append(it);
        }
      }
      if (!ok) continue;
      segs.push_back(seg);
      LinearInequality ineq{Expression::single(p.item()),
                            NegPattern::normalized(segs)};
      if (negUnsat(ineq) || negTriviallyTrue(ineq)) continue;
      out.push_back(ineq);
    }
  }
  sortUnique(out);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// combined satisfiability pipeline

std::optional<ConsistentStore> checkConfigSat(
    const std::vector<WordEquation>& eqs,
    const std::vector<LinearInequality>& negs, EngineContext& ctx) {
  ConsistentStore cur;
  cur.eqs = eqs;
  cur.negs = negs;
  Subst total;

  for (int round = 0; round < 16; ++round) {
    // inequalities with a decided value
    {
      std::vector<LinearInequality> keep;
      for (const LinearInequality& n : cur.negs) {
        if (negUnsat(n)) return std::nullopt;
        if (negTriviallyTrue(n)) continue;
        keep.push_back(n);
      }
      cur.negs = std::move(keep);
      sortUnique(cur.negs);
    }

    // strip, force, split
    bool restarted = false;
    {
      std::vector<WordEquation> next;
      std::vector<WordEquation> work = cur.eqs;
      std::reverse(work.begin(), work.end());
      while (!work.empty()) {
        WordEquation e = work.back();
        work.pop_back();
        StripOutcome s = stripBothEnds(e);
        if (s.contradiction) return std::nullopt;
        if (s.eq.trivial()) continue;
        LengthForceOutcome lf = lengthForce(s.eq);
        if (lf.unsat) return std::nullopt;
        if (!lf.forced.empty()) {
          std::vector<WordEquation> all = next;
          for (auto it = work.rbegin(); it != work.rend(); ++it)
            all.push_back(*it);
          all.push_back(s.eq);
          for (WordEquation& x : all) {
            x.lhs = lf.forced.apply(x.lhs);
            x.rhs = lf.forced.apply(x.rhs);
          }
          auto newNegs = applyGroundSubstToNegs(cur.negs, lf.forced);
          if (!newNegs) return std::nullopt;
          cur.negs = *newNegs;
          cur.eqs = all;
          total = total.then(lf.forced);
          restarted = true;
          break;
        }
        LengthSplitOutcome ls = lengthSplit(s.eq);
        if (ls.unsat) return std::nullopt;
        if (ls.pieces.size() == 1 && ls.pieces[0] == s.eq)
          next.push_back(s.eq);
        else
          for (const WordEquation& p : ls.pieces) work.push_back(p);
      }
      if (restarted) continue;
      sortUnique(next);
      cur.eqs = next;
    }

    // the equation-solving scheme, one quadratic goal at a time
    bool extracted = false;
    for (const WordEquation& goal : cur.eqs) {
      if (!isQuadraticEq(goal)) continue;  // already weakened elsewhere
      EqConfiguration ec;
      ec.goal = goal;
      std::set<Param> scope = pars(goal.lhs);
      for (const Param& p : pars(goal.rhs)) scope.insert(p);
      for (const WordEquation& other : cur.eqs) {
        if (other == goal || !isLinearEq(other)) continue;
        bool shares = false;
        for (const Param& p : pars(other.lhs))
          if (scope.count(p)) shares = true;
        for (const Param& p : pars(other.rhs))
          if (scope.count(p)) shares = true;
        if (shares) {
          ec.sideEqs.push_back(other);
          for (const Param& p : pars(other.lhs)) scope.insert(p);
          for (const Param& p : pars(other.rhs)) scope.insert(p);
        }
      }
      for (const LinearInequality& n : cur.negs) {
        std::set<Param> ps = pars(n.subject);
        for (const Expression& s : n.pattern.segments)
          for (const Param& p : pars(s)) ps.insert(p);
        bool inside = true;
        for (const Param& p : ps)
          if (!scope.count(p)) inside = false;
        if (inside) ec.negs.push_back(n);
      }
      Alphabet dummy;  // letters occurring in the store
      {
        std::set<std::string> ls;
        std::function<void(const Expression&)> grab = [&](const Expression& e) {
          for (const Item& it : e.items)
            if (it.isLetter()) ls.insert(it.name);
        };
        grab(goal.lhs);
        grab(goal.rhs);
        for (const WordEquation& e : cur.eqs) {
          grab(e.lhs);
          grab(e.rhs);
        }
        for (const std::string& l : ctx.program.alphabet.letters()) ls.insert(l);
        for (const std::string& l : ls) dummy.add(l);
      }
      SolveResult sr = solve(ec, ctx.opts.eqLimits, dummy, ctx.supply);
      if (sr.status == EqStatus::CapExceeded) {
        ctx.eqCapHit = true;
        continue;
      }
      if (sr.status == EqStatus::Unsat) return std::nullopt;
      if (!sr.rootNarrowings.empty()) {
        for (WordEquation& x : cur.eqs) {
          x.lhs = sr.rootNarrowings.apply(x.lhs);
          x.rhs = sr.rootNarrowings.apply(x.rhs);
        }
        auto newNegs = applyGroundSubstToNegs(cur.negs, sr.rootNarrowings);
        if (!newNegs) return std::nullopt;
        cur.negs = *newNegs;
        total = total.then(sr.rootNarrowings);
        extracted = true;
        break;
      }
    }
    if (!extracted) break;
  }

  cur.extraction = total;
  return cur;
}

// ---------------------------------------------------------------------------
// driving

std::vector<UnfoldChild> unfold(const Configuration& c, EngineContext& ctx) {
  std::vector<UnfoldChild> out;
  std::vector<std::pair<size_t, size_t>> path;
  if (!findRedexIn(c.expr, path)) return out;
  const Item* redex = redexAtPath(c.expr, path, 0);
  const std::string fn = redex->name;

  std::set<std::string> seen;
  for (size_t ri = 0; ri < ctx.program.rules.size(); ++ri) {
    const Rule& rule = ctx.program.rules[ri];
    if (rule.fn != fn || rule.patterns.size() != redex->args.size()) continue;
    SymMatcher matcher{ctx.supply, {}};
    matcher.matchRulePatterns(rule, redex->args);
    for (SymState& st : matcher.results) {
      if (!simplifyNarrowEqs(st)) continue;
      // child expression: rule body in place of the redex, then the
      // narrowing everywhere
      Expression body = st.sigma.apply(rule.body);
      Expression expr2 = st.nu.apply(replaceAtPath(c.expr, path, 0, body));

      // substituted stores
      std::vector<WordEquation> eqsSubst;
      bool dead = false;
      for (const WordEquation& e : c.eqs) {
        WordEquation t{st.nu.apply(e.lhs), st.nu.apply(e.rhs)};
        StripOutcome s = stripBothEnds(t);
        if (s.contradiction) {
          dead = true;
          break;
        }
        if (!s.eq.trivial()) eqsSubst.push_back(s.eq);
      }
      if (dead) continue;
      auto negVariants = applyNarrowingToNegs(c.negs, st.nu);
      if (negVariants.empty()) continue;
      std::vector<Expression> narrowedArgs;
      for (const Expression& a : redex->args)
        narrowedArgs.push_back(st.nu.apply(a));
      std::vector<LinearInequality> scr =
          negScr(ctx.program, fn, rule.index, narrowedArgs, ctx.supply);

      for (const auto& negsSubst : negVariants) {
        std::vector<WordEquation> allEqs = eqsSubst;
        allEqs.insert(allEqs.end(), st.eqs.begin(), st.eqs.end());
        sortUnique(allEqs);
        std::vector<LinearInequality> allNegs = negsSubst;
        allNegs.insert(allNegs.end(), scr.begin(), scr.end());
        sortUnique(allNegs);

        auto sat = checkConfigSat(allEqs, allNegs, ctx);
        if (!sat) continue;
        const Subst& rho = sat->extraction;

        auto substEq = [&](const WordEquation& e,
                           std::vector<WordEquation>& dst) {
          WordEquation t{rho.apply(e.lhs), rho.apply(e.rhs)};
          StripOutcome s = stripBothEnds(t);
          if (s.contradiction || s.eq.trivial()) return;
          dst.push_back(s.eq);
        };

        Configuration child;
        child.expr = rho.apply(expr2);
        std::vector<WordEquation> keptSubst, keptNarr;
        for (const WordEquation& e : eqsSubst) substEq(e, keptSubst);
        for (const WordEquation& e : st.eqs) substEq(e, keptNarr);
        auto negsAfter = applyGroundSubstToNegs(negsSubst, rho);
        auto scrAfter = applyGroundSubstToNegs(scr, rho);
        if (!negsAfter || !scrAfter) continue;

        // anchor params: the child expression and the parent-derived store
        std::set<Param> anchor = pars(child.expr);
        for (const WordEquation& e : keptSubst) {
          for (const Param& p : pars(e.lhs)) anchor.insert(p);
          for (const Param& p : pars(e.rhs)) anchor.insert(p);
        }
        for (const LinearInequality& n : *negsAfter) {
          for (const Param& p : pars(n.subject)) anchor.insert(p);
          for (const Expression& s : n.pattern.segments)
            for (const Param& p : pars(s)) anchor.insert(p);
        }
        auto touchesAnchor = [&](const std::set<Param>& ps) {
          for (const Param& p : ps)
            if (anchor.count(p)) return true;
          return false;
        };

        child.eqs = keptSubst;
        for (const WordEquation& e : keptNarr) {
          std::set<Param> ps = pars(e.lhs);
          for (const Param& p : pars(e.rhs)) ps.insert(p);
          if (touchesAnchor(ps)) child.eqs.push_back(e);
        }
        sortUnique(child.eqs);
        child.negs = *negsAfter;
        for (const LinearInequality& n : *scrAfter) {
          std::set<Param> ps = pars(n.subject);
          for (const Expression& s : n.pattern.segments)
            for (const Param& p : pars(s)) ps.insert(p);
          if (touchesAnchor(ps)) child.negs.push_back(n);
        }
        // drop decided inequalities
        {
          std::vector<LinearInequality> keep;
          for (const LinearInequality& n : child.negs)
            if (!negTriviallyTrue(n)) keep.push_back(n);
          child.negs = keep;
        }
        sortUnique(child.negs);

        UnfoldChild uc;
        uc.ruleIndex = static_cast<int>(ri);
        uc.narrowing = st.nu.then(rho);
        uc.child = child;
        std::string key = uc.narrowing.str() + "|" + child.str();
        if (!seen.insert(key).second) continue;
        out.push_back(std::move(uc));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// generalization

namespace {

bool rigidMatch(const Item& a, const Item& b) {
  if (a.isLetter() && b.isLetter()) return a.name == b.name;
  if (a.isParam() && b.isParam()) return a.name == b.name && a.kind == b.kind;
  if (a.isCall() && b.isCall())
    return a.name == b.name && a.args.size() == b.args.size();
  return false;
}

Expression genSeq(const Expression& s1, const Expression& s2,
                  NameSupply& supply, Subst& xi1, Subst& xi2) {
  size_t n = s1.size(), m = s2.size();
  std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = n; i-- > 0;)
    for (size_t j = m; j-- > 0;) {
      int best = std::max(dp[i + 1][j], dp[i][j + 1]);
      if (rigidMatch(s1.items[i], s2.items[j]))
        best = std::max(best, dp[i + 1][j + 1] + 1);
      dp[i][j] = best;
    }
  Expression out;
  Expression g1, g2;
  auto flush = [&]() {
    if (g1.isEmpty() && g2.isEmpty()) return;
    Param w = supply.fresh(Kind::String, "u");
    xi1.bind(w, g1);
    xi2.bind(w, g2);
    out.append(w.item());
    g1 = Expression{};
    g2 = Expression{};
  };
  size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (rigidMatch(s1.items[i], s2.items[j]) &&
        dp[i][j] == dp[i + 1][j + 1] + 1) {
      flush();
      const Item& a = s1.items[i];
      const Item& b = s2.items[j];
      if (a.isCall()) {
        std::vector<Expression> args;
        for (size_t k = 0; k < a.args.size(); ++k)
          args.push_back(genSeq(a.args[k], b.args[k], supply, xi1, xi2));
        out.append(Item::call(a.name, std::move(args)));
      } else {
        out.append(a);
      }
      ++i;
      ++j;
    } else if (dp[i][j] == dp[i][j + 1]) {
      g2.append(s2.items[j]);
      ++j;
    } else {
      g1.append(s1.items[i]);
      ++i;
    }
  }
  while (i < n) g1.append(s1.items[i++]);
  while (j < m) g2.append(s2.items[j++]);
  flush();
  return out;
}

}  // namespace

Generalization generalizeExpr(const Expression& e1, const Expression& e2,
                              NameSupply& supply) {
  Generalization g;
  g.gen = genSeq(e1, e2, supply, g.xi1, g.xi2);
  return g;
}

namespace {

std::set<Param> exprParams(const Configuration& c) {
  std::set<Param> ps = pars(c.expr);
  for (const WordEquation& e : c.eqs) {
    for (const Param& p : pars(e.lhs)) ps.insert(p);
    for (const Param& p : pars(e.rhs)) ps.insert(p);
  }
  for (const LinearInequality& n : c.negs) {
    for (const Param& p : pars(n.subject)) ps.insert(p);
    for (const Expression& s : n.pattern.segments)
      for (const Param& p : pars(s)) ps.insert(p);
  }
  return ps;
}

bool subsetOf(const std::set<Param>& a, const std::set<Param>& b) {
  for (const Param& p : a)
    if (!b.count(p)) return false;
  return true;
}

std::set<Param> eqParams(const WordEquation& e) {
  std::set<Param> ps = pars(e.lhs);
  for (const Param& p : pars(e.rhs)) ps.insert(p);
  return ps;
}

std::set<Param> negParams(const LinearInequality& n) {
  std::set<Param> ps = pars(n.subject);
  for (const Expression& s : n.pattern.segments)
    for (const Param& p : pars(s)) ps.insert(p);
  return ps;
}

bool mentionsDelimiter(const LinearInequality& n) {
  for (const Expression& s : n.pattern.segments)
    for (const Item& it : s.items)
      if (it.isLetter() && it.name == Alphabet::kDelimiter) return true;
  return false;
}

WordEquation commute(const Expression& x, const Expression& body) {
  Expression l = x;
  l.append(body);
  Expression r = body;
  r.append(x);
  return WordEquation{l, r};
}

}  // namespace

GeneralizedStores generalizeStores(const Configuration& c1,
                                   const Configuration& c2,
                                   const Generalization& g,
                                   EngineContext& ctx) {
  GeneralizedStores out;
  size_t asz = ctx.program.alphabet.size();
  std::set<Param> genPars = pars(g.gen);
  std::set<Param> gapPars;
  for (const auto& [p, img] : g.xi1.bindings) gapPars.insert(p);
  std::set<Param> passPars;
  for (const Param& p : genPars)
    if (!gapPars.count(p)) passPars.insert(p);

  auto validEq = [&](const WordEquation& e) {
    if (!subsetOf(eqParams(e), genPars)) return false;
    if (!isQuadraticEq(e)) return false;
    WordEquation e1{g.xi1.apply(e.lhs), g.xi1.apply(e.rhs)};
    WordEquation e2{g.xi2.apply(e.lhs), g.xi2.apply(e.rhs)};
    return eqsImplies(c1.eqs, {e1}) && eqsImplies(c2.eqs, {e2});
  };
  auto validNeg = [&](const LinearInequality& n) {
    if (!subsetOf(negParams(n), genPars)) return false;
    if (mentionsDelimiter(n)) return true;  // justified by the reserved letter
    LinearInequality t1{g.xi1.apply(n.subject), n.pattern};
    LinearInequality t2{g.xi2.apply(n.subject), n.pattern};
    return negImpliesOne(c1.negs, t1, asz) && negImpliesOne(c2.negs, t2, asz);
  };

  // inherited constraints
  for (const std::vector<WordEquation>* src : {&c1.eqs, &c2.eqs})
    for (const WordEquation& e : *src)
      if (validEq(e)) out.eqs.push_back(e);
  for (const std::vector<LinearInequality>* src : {&c1.negs, &c2.negs})
    for (const LinearInequality& n : *src)
      if (!mentionsDelimiter(n) && validNeg(n)) out.negs.push_back(n);

  // commutation bodies: successor gap contents and bodies of existing
  // commutation equations
  std::vector<Expression> bodies;
  auto addBody = [&](const Expression& b) {
    if (b.isEmpty()) return;
    if (!subsetOf(pars(b), passPars)) return;
    for (const Expression& x : bodies)
      if (x == b) return;
    bodies.push_back(b);
  };
  for (const auto& [w, img] : g.xi2.bindings) {
    Expression a1 = g.xi1.apply(Expression::single(w.item()));
    if (a1.isEmpty()) addBody(img);
  }
  for (const std::vector<WordEquation>* src : {&c1.eqs, &c2.eqs})
    for (const WordEquation& e : *src) {
      if (e.lhs.size() >= 2 && e.lhs.items[0].isParam()) {
        Expression body = e.lhs.slice(1);
        Expression r = body;
        r.append(e.lhs.items[0]);
        if (e.rhs == r) addBody(body);
      }
    }

  for (const Param& w : gapPars) {
    Expression gap1 = g.xi1.apply(Expression::single(w.item()));
    Expression gap2 = g.xi2.apply(Expression::single(w.item()));
    for (const Expression& body : bodies) {
      auto legOk = [&](const Configuration& c, const Expression& gp) {
        if (gp.isEmpty()) return true;
        return eqsImplies(c.eqs, {commute(gp, body)});
      };
      if (!legOk(c1, gap1) || !legOk(c2, gap2)) continue;
      WordEquation cand = commute(Expression::single(w.item()), body);
      if (validEq(cand)) out.eqs.push_back(cand);
    }

    // inequality generalization rows
    if (gap1.isEmpty() && gap2.size() == 1 && gap2.items[0].isSymbolParam()) {
      for (const LinearInequality& n : c2.negs) {
        if (!(n.subject == gap2)) continue;
        if (n.pattern.gaps() == 0 && n.pattern.segments[0].size() == 1) {
          NegPattern contains = NegPattern::normalized(
              {Expression::empty(), n.pattern.segments[0],
               Expression::empty()});
          LinearInequality cand{Expression::single(w.item()), contains};
          if (validNeg(cand)) out.negs.push_back(cand);
        }
      }
    }
    if (gap1.isEmpty() && gap2.size() == 1 && gap2.items[0].isStringParam()) {
      for (const LinearInequality& n : c2.negs) {
        if (!(n.subject == gap2)) continue;
        LinearInequality cand{Expression::single(w.item()), n.pattern};
        if (validNeg(cand)) out.negs.push_back(cand);
      }
    }
    if (gap1.isGround() && !gap1.isEmpty()) {
      // successor content with a single string param in constant context
      int strCount = 0;
      Expression subjParam;
      bool clean = true;
      for (const Item& it : gap2.items) {
        if (it.isStringParam()) {
          ++strCount;
          subjParam = Expression::single(it);
        } else if (!it.isLetter() && !it.isSymbolParam()) {
          clean = false;
        }
      }
      if (clean && strCount == 1) {
        for (const LinearInequality& n : c2.negs) {
          if (!(n.subject == subjParam)) continue;
          LinearInequality whole{gap2, n.pattern};
          LinearInequality anc{gap1, n.pattern};
          if (!negImpliesOne(c2.negs, whole, asz)) continue;
          if (!negImpliesOne({}, anc, asz)) continue;
          LinearInequality cand{Expression::single(w.item()), n.pattern};
          if (validNeg(cand)) out.negs.push_back(cand);
        }
      }
    }

    // optional delimiter rule
    if (ctx.opts.disjunctionGeneralization && gap1.isEmpty() &&
        !gap2.isEmpty() && subsetOf(pars(gap2), passPars)) {
      bool delimFree = true;
      for (const Item& it : gap2.items)
        if (it.isLetter() && it.name == Alphabet::kDelimiter) delimFree = false;
      if (delimFree) {
        Item d = Item::letter(Alphabet::kDelimiter);
        Param v1 = ctx.supply.fresh(Kind::String, "v");
        Param v2 = ctx.supply.fresh(Kind::String, "v");
        Param v3 = ctx.supply.fresh(Kind::String, "v");
        Param v4 = ctx.supply.fresh(Kind::String, "v");
        Expression lhs;
        lhs.append(v1.item()).append(d).append(w.item()).append(d).append(
            v2.item());
        Expression rhs;
        rhs.append(d).append(d).append(v3.item());
        rhs.append(gap2);
        rhs.append(v4.item()).append(d);
        out.eqs.push_back(WordEquation{lhs, rhs});
        NegPattern noDelim = NegPattern::normalized(
            {Expression::empty(), Expression::single(d), Expression::empty()});
        for (const Param& q : {w, v3, v4})
          out.negs.push_back(
              LinearInequality{Expression::single(q.item()), noDelim});
      }
    }
  }

  sortUnique(out.eqs);
  sortUnique(out.negs);
  return out;
}

// ---------------------------------------------------------------------------
// the scheme driver

bool ProcessTree::insideSubtree(int node, int top) const {
  for (int cur = node; cur != -1; cur = nodes[cur].parent)
    if (cur == top) return true;
  return false;
}

std::vector<int> ProcessTree::liveLeaves(int top) const {
  std::vector<int> out;
  std::function<void(int)> walk = [&](int id) {
    const TreeNode& n = nodes[id];
    if (n.removed) return;
    bool hasLive = false;
    for (int c : n.children)
      if (!nodes[c].removed) {
        hasLive = true;
        walk(c);
      }
    if (!hasLive) out.push_back(id);
  };
  walk(top);
  return out;
}

int ProcessTree::liveCount() const {
  int n = 0;
  for (const TreeNode& t : nodes)
    if (!t.removed) ++n;
  return n;
}

BuildResult buildTree(const Program& program, const Configuration& goal,
                      const EngineOptions& opts, NameSupply& supply) {
  BuildResult res;
  ProcessTree& tree = res.tree;
  EngineContext ctx{program, supply, opts, false};

  for (const Param& p : exprParams(goal)) supply.reserve(p.name);

  auto addNode = [&](int parent, const Subst& edge, int ruleIndex,
                     Configuration cfg) {
    TreeNode n;
    n.id = static_cast<int>(tree.nodes.size());
    n.parent = parent;
    n.edge = edge;
    n.ruleIndex = ruleIndex;
    n.cfg = std::move(cfg);
    if (parent >= 0) tree.nodes[parent].children.push_back(n.id);
    tree.nodes.push_back(n);
    return n.id;
  };

  addNode(-1, Subst{}, -1, goal);
  std::vector<int> stack{0};

  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    if (tree.nodes[id].removed || tree.nodes[id].state != NodeState::Fresh)
      continue;
    if (tree.nodes[id].isLet) continue;

    // CLOSE II: passive configurations are final
    if (tree.nodes[id].cfg.expr.isPassive()) {
      tree.nodes[id].state = NodeState::Passive;
      continue;
    }

    // CLOSE I against the nearest reducible ancestor
    {
      bool folded = false;
      for (int anc = tree.nodes[id].parent; anc != -1;
           anc = tree.nodes[anc].parent) {
        if (tree.nodes[anc].isLet) continue;
        if (auto xi = reduce(tree.nodes[id].cfg, tree.nodes[anc].cfg,
                             program.alphabet.size())) {
          tree.nodes[id].state = NodeState::Folded;
          tree.nodes[id].foldTarget = anc;
          folded = true;
          break;
        }
      }
      if (folded) continue;
    }

    // whistle: nearest similar ancestor triggers generalization of that
    // ancestor
    {
      int similar = -1;
      for (int anc = tree.nodes[id].parent; anc != -1;
           anc = tree.nodes[anc].parent) {
        if (tree.nodes[anc].isLet) continue;
        if (embed(tree.nodes[anc].cfg.expr, tree.nodes[id].cfg.expr)) {
          similar = anc;
          break;
        }
      }
      if (similar != -1) {
        Configuration ancCfg = tree.nodes[similar].cfg;
        Configuration myCfg = tree.nodes[id].cfg;
        Generalization g = generalizeExpr(ancCfg.expr, myCfg.expr, supply);
        if (!g.xi1.empty() || !g.xi2.empty()) {
          GeneralizedStores stores = generalizeStores(ancCfg, myCfg, g, ctx);
          // replace the ancestor with a let node, dropping its subtree
          std::function<void(int)> removeAll = [&](int x) {
            tree.nodes[x].removed = true;
            for (int c : tree.nodes[x].children) removeAll(c);
          };
          for (int c : tree.nodes[similar].children) removeAll(c);
          TreeNode& anc = tree.nodes[similar];
          anc.children.clear();
          anc.isLet = true;
          anc.state = NodeState::Open;
          anc.let.clear();
          for (const auto& [p, img] : g.xi1.bindings)
            anc.let.push_back(LetBinding{p, img});
          std::vector<int> created;
          for (const LetBinding& b : anc.let) {
            Configuration sub;
            sub.expr = b.image;
            std::set<Param> scope = pars(b.image);
            for (const WordEquation& e : ancCfg.eqs)
              if (subsetOf(eqParams(e), scope)) sub.eqs.push_back(e);
            for (const LinearInequality& n : ancCfg.negs)
              if (subsetOf(negParams(n), scope)) sub.negs.push_back(n);
            created.push_back(addNode(similar, Subst{}, -1, sub));
          }
          Configuration genCfg{g.gen, stores.eqs, stores.negs};
          created.push_back(addNode(similar, Subst{}, -1, genCfg));
          for (auto it = created.rbegin(); it != created.rend(); ++it)
            stack.push_back(*it);
          continue;
        }
      }
    }

    // UNFOLD
    if (tree.liveCount() >= opts.maxNodes) {
      res.capExceeded = true;
      break;
    }
    auto children = unfold(tree.nodes[id].cfg, ctx);
    if (children.empty()) {
      tree.nodes[id].state = NodeState::Dead;
      continue;
    }
    tree.nodes[id].state = NodeState::Open;
    std::vector<int> created;
    for (UnfoldChild& uc : children)
      created.push_back(
          addNode(id, uc.narrowing, uc.ruleIndex, std::move(uc.child)));
    for (auto it = created.rbegin(); it != created.rend(); ++it)
      stack.push_back(*it);
    if (tree.liveCount() >= opts.maxNodes) {
      res.capExceeded = true;
      break;
    }
  }

  res.eqCapHit = ctx.eqCapHit;
  res.nodesCreated = static_cast<int>(tree.nodes.size());
  prune(tree);
  return res;
}

void prune(ProcessTree& tree) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::function<bool(int)> tryPrune = [&](int id) -> bool {
      TreeNode& n = tree.nodes[id];
      if (n.removed) return false;
      if (id != tree.root) {
        bool allQualify = true;
        for (int leaf : tree.liveLeaves(id)) {
          const TreeNode& l = tree.nodes[leaf];
          bool qualifies = false;
          if (l.state == NodeState::Dead) qualifies = true;
          else if (l.state == NodeState::Folded &&
                   tree.insideSubtree(l.foldTarget, id))
            qualifies = true;
          else if (l.state == NodeState::Open && l.children.empty())
            qualifies = true;
          if (!qualifies) {
            allQualify = false;
            break;
          }
        }
        if (allQualify) {
          std::function<void(int)> removeAll = [&](int x) {
            tree.nodes[x].removed = true;
            for (int c : tree.nodes[x].children) removeAll(c);
          };
          removeAll(id);
          return true;
        }
      }
      for (int c : n.children)
        if (!tree.nodes[c].removed && tryPrune(c)) return true;
      return false;
    };
    if (tryPrune(tree.root)) changed = true;
  }
}

Verdict verdict(const ProcessTree& tree, const Expression& target) {
  Verdict v;
  for (const TreeNode& n : tree.nodes) {
    if (n.removed || n.isLet) continue;
    if (n.cfg.expr == target) v.targetNodes.push_back(n.id);
  }
  if (v.targetNodes.empty()) {
    v.status = VerdictStatus::Unreachable;
    return v;
  }
  v.status = VerdictStatus::Unknown;

  // root params
  std::set<Param> rootParams;
  {
    const TreeNode& r = tree.nodes[tree.root];
    if (r.isLet) {
      for (const LetBinding& b : r.let)
        for (const Param& p : pars(b.image)) rootParams.insert(p);
    } else {
      rootParams = exprParams(r.cfg);
    }
    // a generalized root keeps its pre-replacement params via the bindings;
    // params of binding images are the original ones
  }

  bool first = true;
  std::map<Param, Expression> common;
  for (int leafId : v.targetNodes) {
    // path root -> leaf
    std::vector<int> path;
    for (int cur = leafId; cur != -1; cur = tree.nodes[cur].parent)
      path.push_back(cur);
    std::reverse(path.begin(), path.end());

    std::map<Param, std::optional<Expression>> m;
    for (const Param& p : rootParams)
      m[p] = Expression::single(p.item());

    for (size_t step = 0; step + 1 < path.size(); ++step) {
      const TreeNode& parent = tree.nodes[path[step]];
      int childId = path[step + 1];
      const TreeNode& child = tree.nodes[childId];
      if (parent.isLet) {
        bool isGenChild = parent.children.back() == childId;
        if (!isGenChild) continue;  // binding child keeps original params
        // rewrite original params into generalized ones
        std::map<Param, std::optional<Param>> rewrite;
        for (const LetBinding& b : parent.let) {
          if (b.image.size() == 1 && b.image.items[0].isParam()) {
            Param orig{b.image.items[0].name, b.image.items[0].kind};
            if (rewrite.count(orig))
              rewrite[orig] = std::nullopt;  // ambiguous
            else
              rewrite[orig] = b.param;
          }
        }
        std::set<Param> genPars = child.isLet ? std::set<Param>{}
                                              : exprParams(child.cfg);
        for (auto& [p, img] : m) {
          if (!img) continue;
          Expression rewritten;
          bool ok = true;
          for (const Item& it : img->items) {
            if (it.isParam()) {
              Param q{it.name, it.kind};
              auto found = rewrite.find(q);
              if (found != rewrite.end() && found->second) {
                rewritten.append(found->second->item());
                continue;
              }
              if (genPars.count(q)) {
                rewritten.append(it);
                continue;
              }
              ok = false;
              break;
            }
            rewritten.append(it);
          }
          if (ok)
            img = rewritten;
          else
            img = std::nullopt;
        }
      } else {
        for (auto& [p, img] : m)
          if (img) img = child.edge.apply(*img);
      }
    }

    std::map<Param, Expression> cond;
    for (const auto& [p, img] : m)
      if (img && img->isGround()) cond[p] = *img;
    if (first) {
      common = cond;
      first = false;
    } else {
      std::map<Param, Expression> next;
      for (const auto& [p, img] : common) {
        auto it = cond.find(p);
        if (it != cond.end() && it->second == img) next[p] = img;
      }
      common = next;
    }
  }
  for (const auto& [p, img] : common) v.condition.emplace_back(p, img);
  return v;
}

}  // namespace wordver
