#include "wordver/constraints.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace wordver {

bool operator==(const WordEquation& a, const WordEquation& b) {
  return a.lhs == b.lhs && a.rhs == b.rhs;
}

bool operator<(const WordEquation& a, const WordEquation& b) {
  int c = cmp(a.lhs, b.lhs);
  if (c != 0) return c < 0;
  return cmp(a.rhs, b.rhs) < 0;
}

bool NegPattern::ground() const {
  for (const Expression& s : segments)
    if (!s.isGround()) return false;
  return true;
}

size_t NegPattern::minLength() const {
  size_t n = 0;
  for (const Expression& s : segments) n += s.size();
  return n;
}

bool NegPattern::universal() const {
  if (segments.size() < 2) return false;
  return minLength() == 0;
}

std::string NegPattern::str() const {
  std::ostringstream os;
  for (size_t i = 0; i < segments.size(); ++i) {
    if (i) os << " _ ";
    if (!segments[i].isEmpty()) os << segments[i].str();
  }
  if (segments.size() == 1 && segments[0].isEmpty()) os << "ε";
  return os.str();
}

NegPattern NegPattern::normalized(std::vector<Expression> segs) {
  NegPattern p;
  if (segs.empty()) segs.push_back(Expression::empty());
  p.segments.push_back(segs[0]);
  for (size_t i = 1; i < segs.size(); ++i) {
    // an empty inner segment merges its two gaps into one
    if (segs[i].isEmpty() && i + 1 < segs.size()) continue;
    p.segments.push_back(segs[i]);
  }
  return p;
}

bool operator==(const NegPattern& a, const NegPattern& b) {
  if (a.segments.size() != b.segments.size()) return false;
  for (size_t i = 0; i < a.segments.size(); ++i)
    if (!(a.segments[i] == b.segments[i])) return false;
  return true;
}

bool operator==(const LinearInequality& a, const LinearInequality& b) {
  return a.subject == b.subject && a.pattern == b.pattern;
}

bool operator<(const LinearInequality& a, const LinearInequality& b) {
  int c = cmp(a.subject, b.subject);
  if (c != 0) return c < 0;
  if (a.pattern.segments.size() != b.pattern.segments.size())
    return a.pattern.segments.size() < b.pattern.segments.size();
  for (size_t i = 0; i < a.pattern.segments.size(); ++i) {
    c = cmp(a.pattern.segments[i], b.pattern.segments[i]);
    if (c != 0) return c < 0;
  }
  return false;
}

bool isQuadraticEq(const WordEquation& e) {
  std::map<Param, int> count;
  auto scan = [&](const Expression& x) {
    for (const Item& it : x.items)
      if (it.isStringParam()) ++count[Param{it.name, it.kind}];
  };
  scan(e.lhs);
  scan(e.rhs);
  for (const auto& [p, n] : count)
    if (n > 2) return false;
  return true;
}

bool isQuadratic(const std::vector<WordEquation>& eqs) {
  for (const WordEquation& e : eqs)
    if (!isQuadraticEq(e)) return false;
  return true;
}

bool isLinearEq(const WordEquation& e) {
  std::map<Param, int> count;
  auto scan = [&](const Expression& x) {
    for (const Item& it : x.items)
      if (it.isStringParam()) ++count[Param{it.name, it.kind}];
  };
  scan(e.lhs);
  scan(e.rhs);
  for (const auto& [p, n] : count)
    if (n > 1) return false;
  return true;
}

namespace {

// A side admitting no empty instance can never equal the empty side.
bool sideNeverEmpty(const Expression& e) {
  for (const Item& it : e.items)
    if (it.isLetter() || it.isSymbolParam()) return true;
  return false;
}

}  // namespace

StripOutcome stripCommonPrefix(const WordEquation& e) {
  size_t i = 0;
  size_t n = std::min(e.lhs.size(), e.rhs.size());
  while (i < n && e.lhs.items[i] == e.rhs.items[i]) ++i;
  StripOutcome out;
  out.eq = WordEquation{e.lhs.slice(i), e.rhs.slice(i)};
  const Expression& l = out.eq.lhs;
  const Expression& r = out.eq.rhs;
  if (!l.isEmpty() && !r.isEmpty() && l.items[0].isLetter() &&
      r.items[0].isLetter()) {
    out.contradiction = true;  // distinct letters after maximal strip
  } else if (l.isEmpty() && sideNeverEmpty(r)) {
    out.contradiction = true;
  } else if (r.isEmpty() && sideNeverEmpty(l)) {
    out.contradiction = true;
  }
  return out;
}

StripOutcome stripBothEnds(const WordEquation& e) {
  StripOutcome pre = stripCommonPrefix(e);
  if (pre.contradiction) return pre;
  Expression l = pre.eq.lhs, r = pre.eq.rhs;
  while (!l.isEmpty() && !r.isEmpty() && l.items.back() == r.items.back()) {
    l.items.pop_back();
    r.items.pop_back();
  }
  StripOutcome out;
  out.eq = WordEquation{l, r};
  if (!l.isEmpty() && !r.isEmpty() && l.items.back().isLetter() &&
      r.items.back().isLetter()) {
    out.contradiction = true;
  } else if (l.isEmpty() && sideNeverEmpty(r)) {
    out.contradiction = true;
  } else if (r.isEmpty() && sideNeverEmpty(l)) {
    out.contradiction = true;
  } else {
    // distinct letter heads may be exposed by suffix stripping
    if (!l.isEmpty() && !r.isEmpty() && l.items[0].isLetter() &&
        r.items[0].isLetter())
      out.contradiction = true;
  }
  return out;
}

namespace {

struct SideStats {
  std::map<Param, int> occ;  // string params
  int fixed = 0;             // letters + symbol params
};

SideStats sideStats(const Expression& e, size_t upTo) {
  SideStats s;
  for (size_t i = 0; i < upTo && i < e.size(); ++i) {
    const Item& it = e.items[i];
    if (it.isStringParam())
      ++s.occ[Param{it.name, it.kind}];
    else
      ++s.fixed;
  }
  return s;
}

}  // namespace

LengthForceOutcome lengthForce(const WordEquation& e) {
  LengthForceOutcome out;
  SideStats L = sideStats(e.lhs, e.lhs.size());
  SideStats R = sideStats(e.rhs, e.rhs.size());
  std::map<Param, int> diff;
  for (const auto& [p, n] : L.occ) diff[p] += n;
  for (const auto& [p, n] : R.occ) diff[p] -= n;
  int fixedDiff = L.fixed - R.fixed;
  bool allNonNeg = true, allNonPos = true;
  for (const auto& [p, d] : diff) {
    if (d > 0) allNonPos = false;
    if (d < 0) allNonNeg = false;
  }
  if (fixedDiff > 0) allNonPos = false;
  if (fixedDiff < 0) allNonNeg = false;
  if (!allNonNeg && !allNonPos) return out;
  // every surplus term must vanish; surplus letters cannot
  if (fixedDiff != 0) {
    out.unsat = true;
    return out;
  }
  for (const auto& [p, d] : diff)
    if (d != 0) out.forced.bind(p, Expression::empty());
  return out;
}

LengthSplitOutcome lengthSplit(const WordEquation& e) {
  LengthSplitOutcome out;
  if (e.trivial()) return out;
  SideStats L = sideStats(e.lhs, e.lhs.size());
  SideStats R = sideStats(e.rhs, e.rhs.size());
  if (L.occ == R.occ && L.fixed != R.fixed) {
    out.unsat = true;
    return out;
  }
  for (size_t i = 1; i < e.lhs.size(); ++i) {
    SideStats li = sideStats(e.lhs, i);
    for (size_t j = 1; j < e.rhs.size(); ++j) {
      SideStats rj = sideStats(e.rhs, j);
      if (li.occ == rj.occ && li.fixed == rj.fixed) {
        WordEquation a{e.lhs.slice(0, i), e.rhs.slice(0, j)};
        WordEquation b{e.lhs.slice(i), e.rhs.slice(j)};
        for (const WordEquation& piece : {a, b}) {
          LengthSplitOutcome sub = lengthSplit(piece);
          if (sub.unsat) {
            out.unsat = true;
            out.pieces.clear();
            return out;
          }
          out.pieces.insert(out.pieces.end(), sub.pieces.begin(),
                            sub.pieces.end());
        }
        return out;
      }
    }
  }
  if (!e.trivial()) out.pieces.push_back(e);
  return out;
}

bool matchPattern(const Expression& word, const NegPattern& pattern) {
  const auto& segs = pattern.segments;
  size_t n = pattern.gaps();
  if (n == 0) return word == segs[0];
  if (word.size() < pattern.minLength()) return false;
  const Expression& pre = segs[0];
  const Expression& suf = segs[n];
  for (size_t i = 0; i < pre.size(); ++i)
    if (!(word.items[i] == pre.items[i])) return false;
  size_t sufStart = word.size() - suf.size();
  for (size_t i = 0; i < suf.size(); ++i)
    if (!(word.items[sufStart + i] == suf.items[i])) return false;
  size_t cur = pre.size();
  for (size_t k = 1; k < n; ++k) {
    const Expression& seg = segs[k];
    bool found = false;
    for (size_t p = cur; p + seg.size() <= sufStart; ++p) {
      bool ok = true;
      for (size_t i = 0; i < seg.size(); ++i)
        if (!(word.items[p + i] == seg.items[i])) {
          ok = false;
          break;
        }
      if (ok) {
        cur = p + seg.size();
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

namespace {

size_t subjectMaxLen(const Expression& subject, bool& finite) {
  finite = true;
  for (const Item& it : subject.items)
    if (it.isStringParam()) finite = false;
  return subject.size();
}

size_t subjectMinLen(const Expression& subject) {
  size_t n = 0;
  for (const Item& it : subject.items)
    if (!it.isStringParam()) ++n;
  return n;
}

}  // namespace

bool negUnsat(const LinearInequality& ineq) {
  if (ineq.pattern.universal()) return true;
  if (ineq.subject.isGround() && ineq.pattern.ground() &&
      matchPattern(ineq.subject, ineq.pattern))
    return true;
  if (ineq.pattern.gaps() == 0 && ineq.subject == ineq.pattern.segments[0])
    return true;
  return false;
}

bool negTriviallyTrue(const LinearInequality& ineq) {
  if (ineq.pattern.universal()) return false;
  if (ineq.subject.isGround() && ineq.pattern.ground())
    return !matchPattern(ineq.subject, ineq.pattern);
  bool finite = false;
  size_t maxLen = subjectMaxLen(ineq.subject, finite);
  size_t minLen = subjectMinLen(ineq.subject);
  if (ineq.pattern.gaps() == 0) {
    size_t patLen = ineq.pattern.segments[0].size();
    if (minLen > patLen) return true;
    if (finite && maxLen < patLen) return true;
  } else {
    if (finite && ineq.pattern.minLength() > maxLen) return true;
  }
  return false;
}

namespace {

using Branches = std::vector<std::vector<LinearInequality>>;

Branches branchesTrue() { return {{}}; }
Branches branchesFalse() { return {}; }

bool isTrue(const Branches& b) {
  for (const auto& br : b)
    if (br.empty()) return true;
  return false;
}

// Conjoin a factor into an accumulated DNF. A factor with a trivially true
// alternative imposes nothing. A second branching factor in one chain is
// thrown away, per the transition-table note.
void conjoin(Branches& acc, const Branches& factor, bool& branched) {
  if (acc.empty()) return;
  if (isTrue(factor)) return;
  if (factor.empty()) {
    acc.clear();
    return;
  }
  if (factor.size() > 1) {
    if (branched) return;  // drop the residual inequality
    branched = true;
  }
  Branches out;
  for (const auto& a : acc)
    for (const auto& f : factor) {
      auto merged = a;
      merged.insert(merged.end(), f.begin(), f.end());
      out.push_back(std::move(merged));
    }
  acc = std::move(out);
}

Branches emitIneq(const Expression& subject, const NegPattern& pattern);

// Pattern with the first anchored token removed. For a gap-led pattern the
// leading gap is consumed as empty, so the result is anchored at its start.
NegPattern patternMinusFirst(const NegPattern& p) {
  std::vector<Expression> segs = p.segments;
  if (!segs[0].isEmpty()) {
    Expression s0 = segs[0].slice(1);
    segs[0] = s0;
    return NegPattern::normalized(segs);
  }
  // drop the leading gap, strip one token from the next segment
  std::vector<Expression> rest(segs.begin() + 1, segs.end());
  rest[0] = rest[0].slice(1);
  return NegPattern::normalized(rest);
}

const Item* patternFirstToken(const NegPattern& p) {
  for (const Expression& s : p.segments)
    if (!s.isEmpty()) return &s.items[0];
  return nullptr;
}

NegPattern patternWithLeadingGap(const NegPattern& p) {
  // drop the prefix anchor: Phi0 z1 ... becomes z ...
  std::vector<Expression> segs = p.segments;
  segs[0] = Expression::empty();
  return NegPattern::normalized(segs);
}

NegPattern patternPrefixOnly(const NegPattern& p) {
  // Phi0 followed by a single gap
  return NegPattern::normalized({p.segments[0], Expression::empty()});
}

NegPattern patternSuffixOnly(const NegPattern& p) {
  // a single gap followed by Phin
  return NegPattern::normalized({Expression::empty(), p.segments.back()});
}

NegPattern patternDropSuffix(const NegPattern& p) {
  // ... zn Phin becomes ... zn
  std::vector<Expression> segs = p.segments;
  segs.back() = Expression::empty();
  return NegPattern::normalized(segs);
}

Branches chainSubject(const Expression& subj, const NegPattern& pat,
                      bool& branched) {
  if (pat.universal()) return branchesFalse();
  LinearInequality cur{subj, pat};
  if (negUnsat(cur)) return branchesFalse();
  if (negTriviallyTrue(cur)) return branchesTrue();
  if (subj.isEmpty()) {
    // neither unsat nor trivially true was decidable: undecided symbol
    // params in the pattern; weaken
    return branchesTrue();
  }
  if (subj.size() == 1 && subj.items[0].isParam()) return {{cur}};

  const Item& t = subj.items[0];
  Expression rest = subj.slice(1);
  Branches acc = branchesTrue();

  bool hasPre = !pat.segments[0].isEmpty();
  bool hasSuf = pat.gaps() > 0 && !pat.segments.back().isEmpty();

  auto recurse = [&](const NegPattern& p) { return chainSubject(rest, p, branched); };
  auto symNe = [&](const Item& a, const Item& b) {
    // a != b for single tokens, as an inequality with subject a
    return emitIneq(Expression::single(a),
                    NegPattern::normalized({Expression::single(b)}));
  };

  if (pat.gaps() == 0) {
    const Expression& w = pat.segments[0];
    if (t.isLetter()) {
      const Item& w1 = w.items[0];
      if (w1.isLetter()) {
        if (w1.name == t.name)
          conjoin(acc, recurse(patternMinusFirst(pat)), branched);
        // different letters: subject never matches, nothing to add
      } else {
        Branches alt = symNe(w1, t);
        Branches cont = recurse(patternMinusFirst(pat));
        Branches factor = alt;
        factor.insert(factor.end(), cont.begin(), cont.end());
        conjoin(acc, factor, branched);
      }
    } else if (t.isSymbolParam()) {
      const Item& w1 = w.items[0];
      Branches alt = symNe(t, w1);
      Branches cont = recurse(patternMinusFirst(pat));
      Branches factor = alt;
      factor.insert(factor.end(), cont.begin(), cont.end());
      conjoin(acc, factor, branched);
    }
    // string param head against an anchored constant word: no usable
    // corollary, weaken
    return acc;
  }

  if (t.isLetter() || t.isSymbolParam()) {
    if (hasPre) {
      const Item& w1 = pat.segments[0].items[0];
      if (t.isLetter() && w1.isLetter()) {
        if (w1.name == t.name)
          conjoin(acc, recurse(patternMinusFirst(pat)), branched);
        // else vacuously true
      } else {
        Branches alt = t.isLetter() ? symNe(w1, t) : symNe(t, w1);
        Branches cont = recurse(patternMinusFirst(pat));
        Branches factor = alt;
        factor.insert(factor.end(), cont.begin(), cont.end());
        conjoin(acc, factor, branched);
      }
    } else {
      conjoin(acc, recurse(pat), branched);
      if (acc.empty()) return acc;
      const Item* f1 = patternFirstToken(pat);
      if (f1) {
        if (t.isLetter() && f1->isLetter()) {
          if (f1->name == t.name)
            conjoin(acc, recurse(patternMinusFirst(pat)), branched);
        } else {
          Branches alt = t.isLetter() ? symNe(*f1, t) : symNe(t, *f1);
          Branches cont = recurse(patternMinusFirst(pat));
          Branches factor = alt;
          factor.insert(factor.end(), cont.begin(), cont.end());
          conjoin(acc, factor, branched);
        }
      }
    }
    return acc;
  }

  if (t.isStringParam()) {
    Expression w = Expression::single(t);
    if (hasPre && hasSuf) {
      // (w != Phi0 z & Psi != z Phin) v Psi != P v w != P-minus-suffix
      Branches alt1 = emitIneq(w, patternPrefixOnly(pat));
      {
        bool subBranched = branched;
        Branches tail = chainSubject(rest, patternSuffixOnly(pat), subBranched);
        Branches merged;
        for (const auto& a : alt1)
          for (const auto& b : tail) {
            auto m = a;
            m.insert(m.end(), b.begin(), b.end());
            merged.push_back(std::move(m));
          }
        alt1 = std::move(merged);
      }
      Branches alt2 = recurse(pat);
      Branches alt3 = emitIneq(w, patternDropSuffix(pat));
      Branches factor = alt1;
      factor.insert(factor.end(), alt2.begin(), alt2.end());
      factor.insert(factor.end(), alt3.begin(), alt3.end());
      conjoin(acc, factor, branched);
    } else if (hasPre) {
      conjoin(acc, emitIneq(w, pat), branched);
      if (acc.empty()) return acc;
      Branches alt = emitIneq(w, patternPrefixOnly(pat));
      Branches cont = recurse(patternWithLeadingGap(pat));
      Branches factor = alt;
      factor.insert(factor.end(), cont.begin(), cont.end());
      conjoin(acc, factor, branched);
    } else if (hasSuf) {
      conjoin(acc, recurse(pat), branched);
      if (acc.empty()) return acc;
      Branches alt = emitIneq(w, patternDropSuffix(pat));
      Branches cont = recurse(patternSuffixOnly(pat));
      Branches factor = alt;
      factor.insert(factor.end(), cont.begin(), cont.end());
      conjoin(acc, factor, branched);
    } else {
      conjoin(acc, emitIneq(w, pat), branched);
      if (acc.empty()) return acc;
      conjoin(acc, recurse(pat), branched);
    }
    return acc;
  }

  return acc;  // vars/calls never occur in passive subjects
}

Branches emitIneq(const Expression& subject, const NegPattern& pattern) {
  LinearInequality ineq{subject, pattern};
  if (negUnsat(ineq)) return branchesFalse();
  if (negTriviallyTrue(ineq)) return branchesTrue();
  if (ineq.subjectIsParam()) return {{ineq}};
  // composite subject inside a disjunct: restart a chain with its own budget
  bool branched = false;
  return chainSubject(subject, pattern, branched);
}

Expression substInPatternSegment(const Expression& seg, const Param& p,
                                 const Expression& image) {
  Expression out;
  for (const Item& it : seg.items) {
    if (it.isParam() && it.name == p.name && it.kind == p.kind)
      out.append(image);
    else
      out.append(it);
  }
  return out;
}

}  // namespace

CorollaryResult negCorollaries(const LinearInequality& ineq, const Param& p,
                               const Expression& image) {
  // substitute p inside pattern segments (symbol params only)
  NegPattern pat;
  bool inPattern = false;
  for (const Expression& seg : ineq.pattern.segments) {
    Expression s = substInPatternSegment(seg, p, image);
    if (!(s == seg)) inPattern = true;
    pat.segments.push_back(s);
  }
  Subst one;
  one.bind(p, image);
  Expression subj = one.apply(ineq.subject);
  bool inSubject = !(subj == ineq.subject);
  CorollaryResult res;
  if (!inPattern && !inSubject) {
    res.kind = CorollaryResult::Kind::Branches;
    res.branches = {{ineq}};
    return res;
  }
  bool branched = false;
  Branches b = chainSubject(subj, pat, branched);
  if (b.empty()) {
    res.kind = CorollaryResult::Kind::Contradiction;
  } else if (isTrue(b)) {
    res.kind = CorollaryResult::Kind::Tautology;
  } else {
    res.kind = CorollaryResult::Kind::Branches;
    for (auto& br : b) {
      std::sort(br.begin(), br.end());
      br.erase(std::unique(br.begin(), br.end(),
                           [](const LinearInequality& x,
                              const LinearInequality& y) { return x == y; }),
               br.end());
    }
    std::sort(b.begin(), b.end(),
              [](const std::vector<LinearInequality>& x,
                 const std::vector<LinearInequality>& y) {
                if (x.size() != y.size()) return x.size() < y.size();
                for (size_t i = 0; i < x.size(); ++i) {
                  if (x[i] < y[i]) return true;
                  if (y[i] < x[i]) return false;
                }
                return false;
              });
    b.erase(std::unique(b.begin(), b.end(),
                        [](const std::vector<LinearInequality>& x,
                           const std::vector<LinearInequality>& y) {
                          return x == y;
                        }),
            b.end());
    res.branches = std::move(b);
  }
  return res;
}

namespace {

struct PatToken {
  bool gap = false;
  int gapIndex = 0;
  Item item;
};

std::vector<PatToken> patternTokens(const NegPattern& p) {
  std::vector<PatToken> out;
  int g = 0;
  for (size_t i = 0; i < p.segments.size(); ++i) {
    for (const Item& it : p.segments[i].items) {
      PatToken t;
      t.item = it;
      out.push_back(t);
    }
    if (i + 1 < p.segments.size()) {
      PatToken t;
      t.gap = true;
      t.gapIndex = g++;
      out.push_back(t);
    }
  }
  return out;
}

// Can the source pattern, with its gaps ranging over letter-and-gap
// strings, be instantiated to exactly the target token string?
bool includeRec(const std::vector<PatToken>& src, size_t si,
                const std::vector<PatToken>& tgt, size_t ti) {
  if (si == src.size()) return ti == tgt.size();
  const PatToken& s = src[si];
  if (s.gap) {
    for (size_t k = ti; k <= tgt.size(); ++k)
      if (includeRec(src, si + 1, tgt, k)) return true;
    return false;
  }
  if (ti >= tgt.size()) return false;
  const PatToken& t = tgt[ti];
  if (t.gap || !(t.item == s.item)) return false;
  return includeRec(src, si + 1, tgt, ti + 1);
}

bool patternIncludes(const NegPattern& src, const NegPattern& tgt) {
  return includeRec(patternTokens(src), 0, patternTokens(tgt), 0);
}

}  // namespace

bool negImpliesOne(const std::vector<LinearInequality>& n1,
                   const LinearInequality& target, size_t alphabetSize) {
  if (negTriviallyTrue(target)) return true;
  if (target.subjectIsParam()) {
    if (negUnsat(target)) return false;
    if (alphabetSize < 4) return false;
    for (const LinearInequality& src : n1) {
      if (!src.subjectIsParam()) continue;
      if (!(src.subject == target.subject)) continue;
      if (patternIncludes(src.pattern, target.pattern)) return true;
    }
    return false;
  }
  if (target.subject.isEmpty()) {
    // epsilon never matches a pattern requiring content
    return target.pattern.minLength() > 0 && !target.pattern.universal();
  }
  // composite subject: handle the contains-single-letter shape
  const NegPattern& p = target.pattern;
  if (p.segments.size() == 3 && p.segments[0].isEmpty() &&
      p.segments[2].isEmpty() && p.segments[1].size() == 1) {
    const Item& mid = p.segments[1].items[0];
    for (const Item& it : target.subject.items) {
      if (it.isLetter()) {
        if (mid.isLetter() && it.name == mid.name) return false;
        if (!mid.isLetter()) return false;  // undecided symbol param
        continue;
      }
      LinearInequality sub{Expression::single(it), p};
      if (it.isSymbolParam()) {
        LinearInequality exact{Expression::single(it),
                               NegPattern::normalized({p.segments[1]})};
        if (negImpliesOne(n1, exact, alphabetSize)) continue;
      }
      if (!negImpliesOne(n1, sub, alphabetSize)) return false;
    }
    return true;
  }
  return false;
}

bool negImplies(const std::vector<LinearInequality>& n1,
                const std::vector<LinearInequality>& n2, size_t alphabetSize) {
  for (const LinearInequality& t : n2)
    if (!negImpliesOne(n1, t, alphabetSize)) return false;
  return true;
}

SimplifiedEqs simplifyEqs(const std::vector<WordEquation>& eqs) {
  SimplifiedEqs out;
  std::vector<WordEquation> work(eqs.begin(), eqs.end());
  size_t guard = 0;
  while (!work.empty()) {
    if (++guard > 10000) break;
    WordEquation e = work.back();
    work.pop_back();
    StripOutcome s = stripBothEnds(e);
    if (s.contradiction) {
      out.contradiction = true;
      out.eqs.clear();
      return out;
    }
    if (s.eq.trivial()) continue;
    LengthForceOutcome lf = lengthForce(s.eq);
    if (lf.unsat) {
      out.contradiction = true;
      out.eqs.clear();
      return out;
    }
    if (!lf.forced.empty()) {
      for (const auto& [p, img] : lf.forced.bindings) {
        (void)img;
        out.eqs.push_back(WordEquation{Expression::single(p.item()),
                                       Expression::empty()});
      }
      WordEquation sub{lf.forced.apply(s.eq.lhs), lf.forced.apply(s.eq.rhs)};
      work.push_back(sub);
      continue;
    }
    LengthSplitOutcome ls = lengthSplit(s.eq);
    if (ls.unsat) {
      out.contradiction = true;
      out.eqs.clear();
      return out;
    }
    if (ls.pieces.size() == 1 && ls.pieces[0] == s.eq) {
      out.eqs.push_back(s.eq);
    } else {
      for (const WordEquation& piece : ls.pieces) work.push_back(piece);
    }
  }
  sortUnique(out.eqs);
  return out;
}

bool eqsImplies(const std::vector<WordEquation>& from,
                const std::vector<WordEquation>& to) {
  SimplifiedEqs sf = simplifyEqs(from);
  if (sf.contradiction) return true;
  SimplifiedEqs st = simplifyEqs(to);
  if (st.contradiction) return false;
  auto holds = [&](const WordEquation& piece) {
    WordEquation swapped{piece.rhs, piece.lhs};
    for (const WordEquation& f : sf.eqs)
      if (f == piece || f == swapped) return true;
    return false;
  };
  for (const WordEquation& piece : st.eqs)
    if (!holds(piece)) return false;
  return true;
}

void sortUnique(std::vector<WordEquation>& eqs) {
  std::sort(eqs.begin(), eqs.end());
  eqs.erase(std::unique(eqs.begin(), eqs.end(),
                        [](const WordEquation& a, const WordEquation& b) {
                          return a == b;
                        }),
            eqs.end());
}

void sortUnique(std::vector<LinearInequality>& negs) {
  std::sort(negs.begin(), negs.end());
  negs.erase(std::unique(negs.begin(), negs.end(),
                         [](const LinearInequality& a,
                            const LinearInequality& b) { return a == b; }),
             negs.end());
}

std::vector<std::vector<LinearInequality>> applyNarrowingToNegs(
    const std::vector<LinearInequality>& negs, const Subst& narrowing) {
  std::vector<std::vector<LinearInequality>> branches = {negs};
  for (const auto& [p, img] : narrowing.bindings) {
    std::vector<std::vector<LinearInequality>> next;
    for (const auto& br : branches) {
      std::vector<std::vector<LinearInequality>> acc = {{}};
      bool dead = false;
      for (const LinearInequality& ineq : br) {
        CorollaryResult res = negCorollaries(ineq, p, img);
        if (res.kind == CorollaryResult::Kind::Contradiction) {
          dead = true;
          break;
        }
        if (res.kind == CorollaryResult::Kind::Tautology) continue;
        std::vector<std::vector<LinearInequality>> merged;
        for (const auto& a : acc)
          for (const auto& b : res.branches) {
            auto m = a;
            m.insert(m.end(), b.begin(), b.end());
            merged.push_back(std::move(m));
          }
        acc = std::move(merged);
        if (acc.size() > 256)
          throw Error("inequality branching explosion during narrowing");
      }
      if (!dead)
        for (auto& a : acc) next.push_back(std::move(a));
    }
    branches = std::move(next);
    if (branches.empty()) return branches;
  }
  for (auto& br : branches) sortUnique(br);
  std::sort(branches.begin(), branches.end(),
            [](const std::vector<LinearInequality>& x,
               const std::vector<LinearInequality>& y) {
              if (x.size() != y.size()) return x.size() < y.size();
              for (size_t i = 0; i < x.size(); ++i) {
                if (x[i] < y[i]) return true;
                if (y[i] < x[i]) return false;
              }
              return false;
            });
  branches.erase(std::unique(branches.begin(), branches.end(),
                             [](const std::vector<LinearInequality>& x,
                                const std::vector<LinearInequality>& y) {
                               return x == y;
                             }),
                 branches.end());
  return branches;
}

std::optional<std::vector<LinearInequality>> applyGroundSubstToNegs(
    const std::vector<LinearInequality>& negs, const Subst& subst) {
  auto branches = applyNarrowingToNegs(negs, subst);
  if (branches.empty()) return std::nullopt;
  return branches.front();
}

}  // namespace wordver
