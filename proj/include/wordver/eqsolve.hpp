#pragma once

#include <optional>

#include "wordver/constraints.hpp"

namespace wordver {

// Goal pair plus side constraints. The goal is the one quadratic equation;
// side equations are linear and get promoted into the goal slot once the
// current goal is solved.
struct EqConfiguration {
  WordEquation goal;
  std::vector<WordEquation> sideEqs;
  std::vector<LinearInequality> negs;

  bool solvedGoal() const { return goal.lhs.isEmpty() && goal.rhs.isEmpty(); }
  std::string str() const;
};

enum class EqNodeState { Fresh, Open, Solved, Dead, Folded };

struct EqNode {
  int id = -1;
  int parent = -1;
  Subst edge;  // narrowing substitution from the parent
  EqConfiguration cfg;
  EqNodeState state = EqNodeState::Fresh;
  int foldTarget = -1;
  std::vector<int> children;
  bool removed = false;  // deleted by PRUNE
};

struct EqTree {
  std::vector<EqNode> nodes;
  int root = 0;

  bool insideSubtree(int node, int top) const;
  std::vector<int> liveLeaves(int top) const;
  int countSolvedLeaves() const;
};

struct EqLimits {
  int maxNodes = 10000;
};

enum class EqStatus { Sat, Unsat, CapExceeded };

struct SolveResult {
  EqStatus status = EqStatus::Unsat;
  EqTree tree;
  Subst rootNarrowings;            // forced ground shapes of root params
  std::optional<Subst> witness;    // ground, validated against the input
  int nodesCreated = 0;
};

enum class NormalOutcome { Ok, Solved, Dead };

// Strips the goal prefix, promotes side equations, resolves decidable
// inequalities.
NormalOutcome normalizeEqConfig(EqConfiguration& cfg);

// The transition relation: children cover every ground solution of the
// parent. Dead children are omitted; branching inequalities may yield
// several children per narrowing.
std::vector<std::pair<Subst, EqConfiguration>> eqUnfold(
    const EqConfiguration& cfg, NameSupply& supply);

// Renaming xi with goal1 xi == goal2 and store implications; kind
// preserving.
std::optional<Subst> eqReduce(const EqConfiguration& c2,
                              const EqConfiguration& c1, size_t alphabetSize);

SolveResult solve(const EqConfiguration& cfg0, const EqLimits& limits,
                  const Alphabet& alphabet, NameSupply& supply);

struct BruteOutcome {
  bool sat = false;
  Subst witness;
  int maxLen = 0;
};

// Independent oracle: enumerates ground substitutions with string params
// up to maxLen.
BruteOutcome bruteForceSat(const EqConfiguration& cfg, int maxLen,
                           const Alphabet& alphabet);

// Ground check of a full assignment against a configuration.
bool groundSat(const EqConfiguration& cfg, const Subst& assignment);

}  // namespace wordver
