#pragma once

#include "wordver/interp.hpp"

namespace wordver {

struct Configuration {
  Expression expr;
  std::vector<WordEquation> eqs;
  std::vector<LinearInequality> negs;
  std::string str() const;
};

struct EngineOptions {
  int maxNodes = 10000;
  EqLimits eqLimits{2000};
  bool disjunctionGeneralization = false;
};

struct EngineContext {
  const Program& program;
  NameSupply& supply;
  EngineOptions opts;
  bool eqCapHit = false;  // an inner equation solve ran out of nodes
};

// Homeomorphic embedding on flat sequences: itemwise subsequence with
// coupling of same-name calls and diving into call arguments.
bool embed(const Expression& e1, const Expression& e2);

// c2 is an instance of c1: a substitution xi with expr1 xi == expr2 and the
// store implications. Params of c1 act as match variables.
std::optional<Subst> reduce(const Configuration& c2, const Configuration& c1,
                            size_t alphabetSize);

struct UnfoldChild {
  int ruleIndex = -1;  // index into program.rules
  Subst narrowing;
  Configuration child;
};

// Symbolic one-step driving of the innermost-leftmost call with passive
// arguments. Children with contradictory stores are omitted; forced
// narrowings found by the constraint analysis are folded into the edge.
std::vector<UnfoldChild> unfold(const Configuration& c, EngineContext& ctx);

struct ConsistentStore {
  std::vector<WordEquation> eqs;
  std::vector<LinearInequality> negs;
  Subst extraction;  // ground shapes forced by the analysis
};

// The combined-check pipeline: inequality corollaries, the length argument,
// then the equation-solving scheme per quadratic equation. nullopt means
// the store is contradictory.
std::optional<ConsistentStore> checkConfigSat(
    const std::vector<WordEquation>& eqs,
    const std::vector<LinearInequality>& negs, EngineContext& ctx);

struct Generalization {
  Expression gen;
  Subst xi1, xi2;  // gen xi1 == e1, gen xi2 == e2
};

// Most specific generalization: coupled call skeletons, longest common
// subsequence of rigid tokens, fresh string params for the gaps.
Generalization generalizeExpr(const Expression& e1, const Expression& e2,
                              NameSupply& supply);

struct GeneralizedStores {
  std::vector<WordEquation> eqs;
  std::vector<LinearInequality> negs;
};

// Constraints provable under both generalizing substitutions, including
// the commutation and inequality generalization rules.
GeneralizedStores generalizeStores(const Configuration& c1,
                                   const Configuration& c2,
                                   const Generalization& g,
                                   EngineContext& ctx);

enum class NodeState { Fresh, Open, Passive, Folded, Dead };

struct LetBinding {
  Param param;
  Expression image;
};

struct TreeNode {
  int id = -1;
  int parent = -1;
  bool isLet = false;
  std::vector<LetBinding> let;
  Configuration cfg;  // unset for let nodes
  Subst edge;
  int ruleIndex = -1;
  NodeState state = NodeState::Fresh;
  int foldTarget = -1;
  std::vector<int> children;
  bool removed = false;
};

struct ProcessTree {
  std::vector<TreeNode> nodes;
  int root = 0;

  bool insideSubtree(int node, int top) const;
  std::vector<int> liveLeaves(int top) const;
  int liveCount() const;
};

struct BuildResult {
  ProcessTree tree;
  bool capExceeded = false;
  bool eqCapHit = false;
  int nodesCreated = 0;
};

BuildResult buildTree(const Program& program, const Configuration& goal,
                      const EngineOptions& opts, NameSupply& supply);

// Deletes subtrees all of whose leaves fold inside them or are dead ends.
// The root survives.
void prune(ProcessTree& tree);

enum class VerdictStatus { Unreachable, Unknown };

struct Verdict {
  VerdictStatus status = VerdictStatus::Unknown;
  std::vector<int> targetNodes;
  // ground root-param bindings shared by every surviving target leaf
  std::vector<std::pair<Param, Expression>> condition;
};

Verdict verdict(const ProcessTree& tree, const Expression& target);

}  // namespace wordver
