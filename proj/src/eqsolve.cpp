#include "wordver/eqsolve.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace wordver {

std::string EqConfiguration::str() const {
  std::ostringstream os;
  os << "Equal(" << goal.lhs.str() << ", " << goal.rhs.str() << ")";
  for (const WordEquation& e : sideEqs) os << " & " << e.str();
  for (const LinearInequality& n : negs) os << " & " << n.str();
  return os.str();
}

bool EqTree::insideSubtree(int node, int top) const {
  for (int cur = node; cur != -1; cur = nodes[cur].parent)
    if (cur == top) return true;
  return false;
}

std::vector<int> EqTree::liveLeaves(int top) const {
  std::vector<int> out;
  std::function<void(int)> walk = [&](int id) {
    const EqNode& n = nodes[id];
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

int EqTree::countSolvedLeaves() const {
  int n = 0;
  for (const EqNode& node : nodes)
    if (!node.removed && node.state == EqNodeState::Solved) ++n;
  return n;
}

NormalOutcome normalizeEqConfig(EqConfiguration& cfg) {
  for (;;) {
    StripOutcome s = stripCommonPrefix(cfg.goal);
    if (s.contradiction) return NormalOutcome::Dead;
    cfg.goal = s.eq;
    // resolve decidable inequalities
    std::vector<LinearInequality> keep;
    for (const LinearInequality& n : cfg.negs) {
      if (negUnsat(n)) return NormalOutcome::Dead;
      if (negTriviallyTrue(n)) continue;
      keep.push_back(n);
    }
    cfg.negs = std::move(keep);
    sortUnique(cfg.negs);
    if (!cfg.goal.trivial()) return NormalOutcome::Ok;
    if (cfg.sideEqs.empty()) {
      cfg.goal = WordEquation{Expression::empty(), Expression::empty()};
      return NormalOutcome::Solved;
    }
    cfg.goal = cfg.sideEqs.front();
    cfg.sideEqs.erase(cfg.sideEqs.begin());
  }
}

namespace {

Subst singleBinding(const Param& p, const Expression& image) {
  Subst s;
  s.bind(p, image);
  return s;
}

Param asParam(const Item& it) { return Param{it.name, it.kind}; }

// q := u . step . q' where step consumes the second token of the other
// side, or a fresh symbol when that token is a string param.
Subst extendNarrowing(const Param& q, const Item& otherHead,
                      const Item& second, NameSupply& supply) {
  Expression image;
  image.append(otherHead);
  if (second.isStringParam()) {
    Param s = supply.fresh(Kind::Symbol, "s");
    image.append(s.item());
  } else {
    image.append(second);
  }
  Param qRest = supply.fresh(Kind::String, q.name);
  image.append(qRest.item());
  return singleBinding(q, image);
}

}  // namespace

std::vector<std::pair<Subst, EqConfiguration>> eqUnfold(
    const EqConfiguration& cfg, NameSupply& supply) {
  std::vector<Subst> cands;
  const Expression& L = cfg.goal.lhs;
  const Expression& R = cfg.goal.rhs;

  if (L.isEmpty() || R.isEmpty()) {
    const Expression& side = L.isEmpty() ? R : L;
    if (!side.isEmpty() && side.items[0].isStringParam())
      cands.push_back(singleBinding(asParam(side.items[0]), Expression::empty()));
  } else {
    const Item& a = L.items[0];
    const Item& b = R.items[0];
    if (a.isStringParam() && b.isStringParam()) {
      cands.push_back(singleBinding(asParam(a), Expression::single(b)));
      if (R.size() >= 2)
        cands.push_back(extendNarrowing(asParam(a), b, R.items[1], supply));
      if (L.size() >= 2)
        cands.push_back(extendNarrowing(asParam(b), a, L.items[1], supply));
    } else if (a.isStringParam()) {
      Expression image = Expression::single(b);
      image.append(supply.fresh(Kind::String, a.name).item());
      cands.push_back(singleBinding(asParam(a), image));
      cands.push_back(singleBinding(asParam(a), Expression::empty()));
    } else if (b.isStringParam()) {
      Expression image = Expression::single(a);
      image.append(supply.fresh(Kind::String, b.name).item());
      cands.push_back(singleBinding(asParam(b), image));
      cands.push_back(singleBinding(asParam(b), Expression::empty()));
    } else if (a.isSymbolParam()) {
      cands.push_back(singleBinding(asParam(a), Expression::single(b)));
    } else if (b.isSymbolParam()) {
      cands.push_back(singleBinding(asParam(b), Expression::single(a)));
    }
    // two distinct letters: no narrowing applies
  }

  std::vector<std::pair<Subst, EqConfiguration>> out;
  std::set<std::string> seen;
  for (const Subst& nu : cands) {
    WordEquation goal{nu.apply(L), nu.apply(R)};
    std::vector<WordEquation> sides;
    {
      std::vector<WordEquation> raw;
      for (const WordEquation& e : cfg.sideEqs)
        raw.push_back(WordEquation{nu.apply(e.lhs), nu.apply(e.rhs)});
      SimplifiedEqs simp = simplifyEqs(raw);
      if (simp.contradiction) continue;
      sides = simp.eqs;
    }
    auto negBranches = applyNarrowingToNegs(cfg.negs, nu);
    for (const auto& negs : negBranches) {
      EqConfiguration child{goal, sides, negs};
      NormalOutcome st = normalizeEqConfig(child);
      if (st == NormalOutcome::Dead) continue;
      std::string key = nu.str() + " | " + child.str();
      if (!seen.insert(key).second) continue;
      out.emplace_back(nu, child);
    }
  }
  return out;
}

std::optional<Subst> eqReduce(const EqConfiguration& c2,
                              const EqConfiguration& c1, size_t alphabetSize) {
  auto matchSide = [](const Expression& pat, const Expression& tgt,
                      Subst& xi) -> bool {
    if (pat.size() != tgt.size()) return false;
    for (size_t i = 0; i < pat.size(); ++i) {
      const Item& a = pat.items[i];
      const Item& b = tgt.items[i];
      if (a.isLetter()) {
        if (!(a == b)) return false;
      } else if (a.isParam()) {
        if (!b.isParam() || b.kind != a.kind) return false;
        Param pa = asParam(a);
        if (const Expression* bound = xi.lookup(pa)) {
          if (!(*bound == Expression::single(b))) return false;
        } else {
          xi.bind(pa, Expression::single(b));
        }
      } else {
        return false;
      }
    }
    return true;
  };
  Subst xi;
  if (!matchSide(c1.goal.lhs, c2.goal.lhs, xi)) return std::nullopt;
  if (!matchSide(c1.goal.rhs, c2.goal.rhs, xi)) return std::nullopt;

  std::vector<WordEquation> sides1;
  for (const WordEquation& e : c1.sideEqs)
    sides1.push_back(WordEquation{xi.apply(e.lhs), xi.apply(e.rhs)});
  if (!eqsImplies(c2.sideEqs, sides1)) return std::nullopt;

  auto negs1 = applyGroundSubstToNegs(c1.negs, xi);
  if (!negs1) return std::nullopt;
  if (!negImplies(c2.negs, *negs1, alphabetSize)) return std::nullopt;
  return xi;
}

namespace {

std::set<Param> configParams(const EqConfiguration& cfg) {
  std::set<Param> ps;
  auto grab = [&](const Expression& e) {
    for (const Param& p : pars(e)) ps.insert(p);
  };
  grab(cfg.goal.lhs);
  grab(cfg.goal.rhs);
  for (const WordEquation& e : cfg.sideEqs) {
    grab(e.lhs);
    grab(e.rhs);
  }
  for (const LinearInequality& n : cfg.negs) {
    grab(n.subject);
    for (const Expression& s : n.pattern.segments) grab(s);
  }
  return ps;
}

Subst pathSubst(const EqTree& tree, int leaf) {
  std::vector<int> path;
  for (int cur = leaf; cur != -1; cur = tree.nodes[cur].parent)
    path.push_back(cur);
  std::reverse(path.begin(), path.end());
  Subst total;
  for (int id : path)
    if (tree.nodes[id].parent != -1) total = total.then(tree.nodes[id].edge);
  return total;
}

void pruneTree(EqTree& tree) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::function<bool(int)> tryPrune = [&](int id) -> bool {
      EqNode& n = tree.nodes[id];
      if (n.removed) return false;
      if (id != tree.root) {
        bool allQualify = true;
        for (int leaf : tree.liveLeaves(id)) {
          const EqNode& l = tree.nodes[leaf];
          bool qualifies = false;
          if (l.state == EqNodeState::Dead) qualifies = true;
          else if (l.state == EqNodeState::Folded &&
                   tree.insideSubtree(l.foldTarget, id))
            qualifies = true;
          else if (l.state == EqNodeState::Open && l.children.empty())
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

bool groundFill(const EqConfiguration& original, const Subst& partial,
                const std::set<Param>& rootParams, const Alphabet& alphabet,
                Subst& outWitness) {
  // residual params of the partial images
  std::set<Param> leftovers;
  for (const Param& p : rootParams) {
    Expression img = partial.apply(Expression::single(p.item()));
    for (const Param& q : pars(img)) leftovers.insert(q);
  }
  std::vector<Param> symbols;
  Subst fill;
  for (const Param& q : leftovers) {
    if (q.kind == Kind::String)
      fill.bind(q, Expression::empty());
    else
      symbols.push_back(q);
  }
  if (symbols.size() > 8) return false;
  std::vector<size_t> idx(symbols.size(), 0);
  const auto& letters = alphabet.letters();
  if (letters.empty() && !symbols.empty()) return false;
  for (;;) {
    Subst full = fill;
    for (size_t i = 0; i < symbols.size(); ++i)
      full.bind(symbols[i], Expression::single(Item::letter(letters[idx[i]])));
    Subst candidate;
    for (const Param& p : rootParams) {
      Expression img = full.apply(partial.apply(Expression::single(p.item())));
      candidate.bind(p, img);
    }
    if (groundSat(original, candidate)) {
      outWitness = candidate;
      return true;
    }
    size_t i = 0;
    for (; i < symbols.size(); ++i) {
      if (++idx[i] < letters.size()) break;
      idx[i] = 0;
    }
    if (i == symbols.size()) return false;
    if (symbols.empty()) return false;
  }
}

}  // namespace

bool groundSat(const EqConfiguration& cfg, const Subst& assignment) {
  Expression l = assignment.apply(cfg.goal.lhs);
  Expression r = assignment.apply(cfg.goal.rhs);
  if (!l.isGround() || !r.isGround()) return false;
  if (!(l == r)) return false;
  for (const WordEquation& e : cfg.sideEqs) {
    Expression a = assignment.apply(e.lhs);
    Expression b = assignment.apply(e.rhs);
    if (!a.isGround() || !b.isGround() || !(a == b)) return false;
  }
  for (const LinearInequality& n : cfg.negs) {
    Expression subj = assignment.apply(n.subject);
    NegPattern pat;
    for (const Expression& s : n.pattern.segments)
      pat.segments.push_back(assignment.apply(s));
    if (!subj.isGround() || !pat.ground()) return false;
    if (matchPattern(subj, pat)) return false;
  }
  return true;
}

SolveResult solve(const EqConfiguration& cfg0, const EqLimits& limits,
                  const Alphabet& alphabet, NameSupply& supply) {
  SolveResult res;
  EqTree& tree = res.tree;

  auto addNode = [&](int parent, const Subst& edge, EqConfiguration cfg,
                     NormalOutcome st) {
    EqNode n;
    n.id = static_cast<int>(tree.nodes.size());
    n.parent = parent;
    n.edge = edge;
    n.cfg = std::move(cfg);
    n.state = st == NormalOutcome::Solved ? EqNodeState::Solved
                                          : EqNodeState::Fresh;
    if (parent >= 0) tree.nodes[parent].children.push_back(n.id);
    tree.nodes.push_back(n);
    return n.id;
  };

  EqConfiguration root = cfg0;
  for (const Param& p : configParams(root)) supply.reserve(p.name);
  NormalOutcome st = normalizeEqConfig(root);
  if (st == NormalOutcome::Dead) {
    EqNode n;
    n.id = 0;
    n.cfg = root;
    n.state = EqNodeState::Dead;
    tree.nodes.push_back(n);
    res.status = EqStatus::Unsat;
    res.nodesCreated = 1;
    return res;
  }
  addNode(-1, Subst{}, root, st);

  bool capHit = false;
  std::deque<int> queue;
  if (tree.nodes[0].state == EqNodeState::Fresh) queue.push_back(0);
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop_front();
    if (tree.nodes[id].state != EqNodeState::Fresh) continue;

    // CLOSE I before UNFOLD
    bool folded = false;
    for (int anc = tree.nodes[id].parent; anc != -1;
         anc = tree.nodes[anc].parent) {
      if (auto xi = eqReduce(tree.nodes[id].cfg, tree.nodes[anc].cfg,
                             alphabet.size())) {
        tree.nodes[id].state = EqNodeState::Folded;
        tree.nodes[id].foldTarget = anc;
        folded = true;
        break;
      }
    }
    if (folded) continue;

    if (static_cast<int>(tree.nodes.size()) >= limits.maxNodes) {
      capHit = true;
      break;
    }

    auto children = eqUnfold(tree.nodes[id].cfg, supply);
    if (children.empty()) {
      tree.nodes[id].state = EqNodeState::Dead;
      continue;
    }
    tree.nodes[id].state = EqNodeState::Open;
    for (auto& [nu, cfg] : children) {
      NormalOutcome cst =
          cfg.solvedGoal() ? NormalOutcome::Solved : NormalOutcome::Ok;
      int cid = addNode(id, nu, cfg, cst);
      if (tree.nodes[cid].state == EqNodeState::Fresh) queue.push_back(cid);
      if (static_cast<int>(tree.nodes.size()) >= limits.maxNodes) {
        capHit = true;
        break;
      }
    }
    if (capHit) break;
  }
  res.nodesCreated = static_cast<int>(tree.nodes.size());

  if (capHit) {
    res.status = EqStatus::CapExceeded;
    return res;
  }

  pruneTree(tree);

  bool anySolved = false;
  for (const EqNode& n : tree.nodes)
    if (!n.removed && n.state == EqNodeState::Solved) anySolved = true;
  res.status = anySolved ? EqStatus::Sat : EqStatus::Unsat;
  if (!anySolved) return res;

  std::set<Param> rootParams = configParams(root);

  // forced root shapes: ground bindings identical across every solved path
  // and every surviving fold prefix
  std::vector<Subst> solvedPaths, foldPaths;
  for (const EqNode& n : tree.nodes) {
    if (n.removed) continue;
    if (n.state == EqNodeState::Solved) solvedPaths.push_back(pathSubst(tree, n.id));
    if (n.state == EqNodeState::Folded) foldPaths.push_back(pathSubst(tree, n.id));
  }
  for (const Param& p : rootParams) {
    Expression first;
    bool ok = true, haveFirst = false;
    for (const Subst& s : solvedPaths) {
      Expression img = s.apply(Expression::single(p.item()));
      if (!img.isGround()) {
        ok = false;
        break;
      }
      if (!haveFirst) {
        first = img;
        haveFirst = true;
      } else if (!(img == first)) {
        ok = false;
        break;
      }
    }
    if (!ok || !haveFirst) continue;
    for (const Subst& s : foldPaths) {
      Expression img = s.apply(Expression::single(p.item()));
      if (!img.isGround() || !(img == first)) {
        ok = false;
        break;
      }
    }
    if (ok && !(first == Expression::single(p.item())))
      res.rootNarrowings.bind(p, first);
  }

  // witness: fill one solved path, validated against the input
  for (const EqNode& n : tree.nodes) {
    if (n.removed || n.state != EqNodeState::Solved) continue;
    Subst witness;
    if (groundFill(cfg0, pathSubst(tree, n.id), rootParams, alphabet,
                   witness)) {
      res.witness = witness;
      break;
    }
  }
  if (!res.witness) {
    BruteOutcome b = bruteForceSat(cfg0, 4, alphabet);
    if (b.sat) res.witness = b.witness;
  }
  return res;
}

namespace {

void enumerateWords(const Alphabet& alphabet, int maxLen,
                    const std::function<bool(const Expression&)>& visit) {
  std::function<bool(Expression&, int)> go = [&](Expression& cur,
                                                 int remaining) -> bool {
    if (!visit(cur)) {
      if (remaining == 0) return true;
    }
    if (remaining == 0) return true;
    for (const std::string& l : alphabet.letters()) {
      cur.items.push_back(Item::letter(l));
      if (!go(cur, remaining - 1)) return false;
      cur.items.pop_back();
    }
    return true;
  };
  Expression e;
  go(e, maxLen);
}

}  // namespace

BruteOutcome bruteForceSat(const EqConfiguration& cfg, int maxLen,
                           const Alphabet& alphabet) {
  BruteOutcome out;
  out.maxLen = maxLen;
  std::vector<Param> params(configParams(cfg).begin(), configParams(cfg).end());

  std::function<bool(size_t, Subst&)> assign = [&](size_t i,
                                                   Subst& acc) -> bool {
    // partial feasibility
    {
      WordEquation g{acc.apply(cfg.goal.lhs), acc.apply(cfg.goal.rhs)};
      StripOutcome s = stripCommonPrefix(g);
      if (s.contradiction) return false;
    }
    if (i == params.size()) {
      if (groundSat(cfg, acc)) {
        out.sat = true;
        out.witness = acc;
        return true;
      }
      return false;
    }
    const Param& p = params[i];
    if (p.kind == Kind::Symbol) {
      for (const std::string& l : alphabet.letters()) {
        acc.bindings[p] = Expression::single(Item::letter(l));
        if (assign(i + 1, acc)) return true;
      }
    } else {
      bool found = false;
      enumerateWords(alphabet, maxLen, [&](const Expression& w) {
        acc.bindings[p] = w;
        if (assign(i + 1, acc)) {
          found = true;
          return false;  // stop enumeration
        }
        return true;
      });
      if (found) return true;
    }
    acc.bindings.erase(p);
    return false;
  };

  Subst acc;
  assign(0, acc);
  return out;
}

}  // namespace wordver
