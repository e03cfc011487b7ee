#pragma once

#include "wordver/engine.hpp"

namespace wordver {

// Node labels show expr, eqs and negs; dashed edges mark closed-with links.
std::string treeToDot(const ProcessTree& tree, const Program& program);
std::string treeToJson(const ProcessTree& tree, const Program& program,
                       const Verdict& verdict, bool capExceeded);

std::string eqTreeToDot(const EqTree& tree);
std::string eqTreeToJson(const SolveResult& result);

}  // namespace wordver
