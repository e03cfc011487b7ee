#pragma once

#include <optional>
#include <vector>

#include "wordver/terms.hpp"

namespace wordver {

// Equality of two passive expressions. Quadratic when no string parameter
// occurs more than twice in lhs ++ rhs.
struct WordEquation {
  Expression lhs, rhs;
  bool trivial() const { return lhs == rhs; }
  std::string str() const { return lhs.str() + " = " + rhs.str(); }
};

bool operator==(const WordEquation& a, const WordEquation& b);
bool operator<(const WordEquation& a, const WordEquation& b);

// Pattern Phi0 z1 Phi1 ... zn Phin: segments.size() == n + 1 gaps sit
// between consecutive segments. Segments hold letters and symbol params
// only; inner segments are nonempty.
struct NegPattern {
  std::vector<Expression> segments;

  size_t gaps() const { return segments.empty() ? 0 : segments.size() - 1; }
  bool ground() const;
  size_t minLength() const;
  // True when every word matches: all segments empty with at least one gap.
  bool universal() const;
  std::string str() const;
  // Collapses empty inner segments by merging adjacent gaps.
  static NegPattern normalized(std::vector<Expression> segs);
};

bool operator==(const NegPattern& a, const NegPattern& b);

// subject != pattern for every gap valuation. Stored inequalities have a
// single-param subject; composite subjects appear transiently during
// corollary chaining and implication checks.
struct LinearInequality {
  Expression subject;
  NegPattern pattern;

  bool subjectIsParam() const {
    return subject.size() == 1 && subject.items[0].isParam();
  }
  std::string str() const { return subject.str() + " != " + pattern.str(); }
};

bool operator==(const LinearInequality& a, const LinearInequality& b);
bool operator<(const LinearInequality& a, const LinearInequality& b);

bool isQuadraticEq(const WordEquation& e);
bool isQuadratic(const std::vector<WordEquation>& eqs);
bool isLinearEq(const WordEquation& e);

struct StripOutcome {
  bool contradiction = false;
  WordEquation eq;  // valid when !contradiction; trivial() when solved
};

// Removes the longest common prefix; distinct letter heads (or letter vs
// empty side) have no solution.
StripOutcome stripCommonPrefix(const WordEquation& e);
// Same from both ends; used when simplifying stores.
StripOutcome stripBothEnds(const WordEquation& e);

struct LengthForceOutcome {
  bool unsat = false;
  Subst forced;  // params that must be empty
};

// Length argument: if all string-param occurrence differences share a sign,
// the surplus params must be empty and the fixed lengths must balance.
LengthForceOutcome lengthForce(const WordEquation& e);

struct LengthSplitOutcome {
  bool unsat = false;
  std::vector<WordEquation> pieces;
};

// Occurrence-balance check plus cutting at balanced prefix positions.
LengthSplitOutcome lengthSplit(const WordEquation& e);

// Ground word vs ground pattern.
bool matchPattern(const Expression& word, const NegPattern& pattern);

// False for every valuation.
bool negUnsat(const LinearInequality& ineq);
// True for every valuation.
bool negTriviallyTrue(const LinearInequality& ineq);

struct CorollaryResult {
  enum class Kind { Tautology, Contradiction, Branches };
  Kind kind = Kind::Tautology;
  // Disjuncts; every model of ineq /\ narrowing satisfies some branch.
  std::vector<std::vector<LinearInequality>> branches;
};

// Consequences of a single param binding applied to an inequality, per the
// transition table. Chained rules run until the first branching; a second
// branching drops the residual inequality.
CorollaryResult negCorollaries(const LinearInequality& ineq, const Param& p,
                               const Expression& image);

// N1 => N2 via pattern inclusion on the complements; needs |Sigma| >= 4
// for the nontrivial case.
bool negImplies(const std::vector<LinearInequality>& n1,
                const std::vector<LinearInequality>& n2, size_t alphabetSize);
bool negImpliesOne(const std::vector<LinearInequality>& n1,
                   const LinearInequality& target, size_t alphabetSize);

// from => to, by simplify-then-subset.
bool eqsImplies(const std::vector<WordEquation>& from,
                const std::vector<WordEquation>& to);

struct SimplifiedEqs {
  bool contradiction = false;
  std::vector<WordEquation> eqs;
};

// Strip both ends, split, drop trivial pieces; sorted and deduplicated.
SimplifiedEqs simplifyEqs(const std::vector<WordEquation>& eqs);

void sortUnique(std::vector<WordEquation>& eqs);
void sortUnique(std::vector<LinearInequality>& negs);

// Applies a substitution whose images are ground (or plain renamings) to a
// set of inequalities; no branching can arise. Returns nullopt on
// contradiction.
std::optional<std::vector<LinearInequality>> applyGroundSubstToNegs(
    const std::vector<LinearInequality>& negs, const Subst& subst);

// Applies a general narrowing to inequalities via the corollary tables;
// the result is a disjunction of alternative sets. Empty result means
// contradiction.
std::vector<std::vector<LinearInequality>> applyNarrowingToNegs(
    const std::vector<LinearInequality>& negs, const Subst& narrowing);

}  // namespace wordver
