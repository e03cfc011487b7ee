#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "wordver/exportfmt.hpp"

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitFile = 66;
constexpr int kExitInternal = 70;

std::string readFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void writeFile(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write " + path);
  out << content;
}

void printWarnings(const wordver::Program& p) {
  for (const std::string& w : p.warnings)
    std::cerr << "warning: " << w << "\n";
}

int runVerify(const std::string& programPath, const std::string& goalText,
              const std::string& targetText, int maxNodes, bool disjGen,
              const std::string& dotPath, const std::string& jsonPath,
              int oracleLen) {
  using namespace wordver;
  Program program = parseProgram(readFile(programPath));
  printWarnings(program);
  Expression goalExpr = parseGoal(goalText, program);
  Expression target = parseTarget(targetText, program);

  NameSupply supply;
  EngineOptions opts;
  opts.maxNodes = maxNodes;
  opts.disjunctionGeneralization = disjGen;
  Configuration goal{goalExpr, {}, {}};
  BuildResult build = buildTree(program, goal, opts, supply);
  Verdict v = verdict(build.tree, target);

  std::cout << "goal: " << goalExpr.str() << "\n";
  std::cout << "target: " << target.str() << "\n";
  std::cout << "nodes: " << build.tree.liveCount() << "\n";
  if (build.capExceeded) std::cout << "note: node cap exceeded\n";
  if (build.eqCapHit) std::cout << "note: equation solver cap exceeded\n";
  for (const TreeNode& n : build.tree.nodes) {
    if (n.removed || n.parent < 0 || n.ruleIndex < 0) continue;
    const Rule& r = program.rules[n.ruleIndex];
    std::cout << "  unfold " << n.parent << " -> " << n.id << " via " << r.fn
              << "." << r.index;
    if (!n.edge.empty()) std::cout << "  [" << n.edge.str() << "]";
    std::cout << "\n";
  }
  if (v.status == VerdictStatus::Unreachable) {
    std::cout << "verdict: " << target.str() << " unreachable\n";
  } else {
    std::cout << "verdict: unknown";
    if (!v.condition.empty()) {
      std::cout << " — " << target.str() << " only if";
      for (const auto& [p, img] : v.condition)
        std::cout << " " << p.name << " = " << img.str();
    }
    std::cout << "\n";
  }

  if (!dotPath.empty()) writeFile(dotPath, treeToDot(build.tree, program));
  if (!jsonPath.empty())
    writeFile(jsonPath, treeToJson(build.tree, program, v, build.capExceeded));

  if (oracleLen > 0 && v.status == VerdictStatus::Unreachable) {
    ReachSample s = sampleReach(program, goalExpr, target, oracleLen);
    if (s.found) {
      std::cerr << "oracle found a counterexample to the verdict:";
      for (const auto& [p, img] : s.inputs)
        std::cerr << " " << p.name << " = " << img.str();
      std::cerr << "\n";
      return kExitInternal;
    }
    std::cout << "oracle: no witness up to length " << oracleLen << "\n";
  }

  if (build.capExceeded) return 2;
  return v.status == VerdictStatus::Unreachable ? 0 : 1;
}

int runSolveEq(const std::string& constraintsPath, int maxNodes,
               const std::string& dotPath, const std::string& jsonPath) {
  using namespace wordver;
  ConstraintFile cf = parseConstraintFile(readFile(constraintsPath));
  NameSupply supply;
  EqLimits limits{maxNodes};
  SolveResult r = solve(cf.config, limits, cf.alphabet, supply);

  std::cout << "equation: " << cf.config.goal.str() << "\n";
  for (const WordEquation& e : cf.config.sideEqs)
    std::cout << "side: " << e.str() << "\n";
  for (const LinearInequality& n : cf.config.negs)
    std::cout << "ineq: " << n.str() << "\n";
  switch (r.status) {
    case EqStatus::Sat: std::cout << "status: sat\n"; break;
    case EqStatus::Unsat: std::cout << "status: unsat\n"; break;
    case EqStatus::CapExceeded: std::cout << "status: cap exceeded\n"; break;
  }
  if (!r.rootNarrowings.empty())
    std::cout << "forced: " << r.rootNarrowings.str() << "\n";
  if (r.witness) std::cout << "witness: " << r.witness->str() << "\n";
  std::cout << "nodes: " << r.nodesCreated << "\n";

  if (!dotPath.empty()) writeFile(dotPath, eqTreeToDot(r.tree));
  if (!jsonPath.empty()) writeFile(jsonPath, eqTreeToJson(r));

  switch (r.status) {
    case EqStatus::Sat: return 0;
    case EqStatus::Unsat: return 1;
    case EqStatus::CapExceeded: return 2;
  }
  return kExitInternal;
}

int runInterpret(const std::string& programPath, const std::string& callText,
                 long fuel) {
  using namespace wordver;
  Program program = parseProgram(readFile(programPath));
  printWarnings(program);
  Expression call = parseGroundCall(callText, program);
  EvalOutcome r = eval(program, call, fuel);
  switch (r.status) {
    case EvalOutcome::Status::Value:
      std::cout << r.value.str() << "\n";
      return 0;
    case EvalOutcome::Status::Stuck:
      std::cout << "<stuck>\n";
      return 1;
    case EvalOutcome::Status::FuelExhausted:
      std::cout << "<fuel exhausted>\n";
      return 2;
  }
  return kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verifier for string-rewriting functional programs"};
  app.require_subcommand(1);

  auto* verify = app.add_subcommand(
      "verify", "build the process tree and decide reachability of a value");
  std::string vProgram, vGoal, vTarget, vDot, vJson;
  int vMaxNodes = 10000;
  int vOracle = 0;
  bool vDisj = false;
  verify->add_option("program", vProgram, "program file (.wsp)")->required();
  verify->add_option("--goal", vGoal, "goal call, e.g. \"Go(u, v)\"")
      ->required();
  verify->add_option("--target", vTarget, "target word, e.g. F")->required();
  verify->add_option("--max-nodes", vMaxNodes, "process tree node cap");
  verify->add_flag("--disjunction-generalization", vDisj,
                   "enable the delimiter equation rule");
  verify->add_option("--dot", vDot, "write the pruned tree as DOT");
  verify->add_option("--json", vJson, "write the pruned tree as JSON");
  verify->add_option("--oracle-check", vOracle,
                     "confirm unreachable verdicts by evaluation up to this "
                     "input length");

  auto* solveEq = app.add_subcommand(
      "solve-eq", "solve a quadratic word equation under constraints");
  std::string ePath, eDot, eJson;
  int eMaxNodes = 10000;
  solveEq->add_option("constraints", ePath, "constraints file (.weq)")
      ->required();
  solveEq->add_option("--max-nodes", eMaxNodes, "solver node cap");
  solveEq->add_option("--dot", eDot, "write the pruned tree as DOT");
  solveEq->add_option("--json", eJson, "write the result as JSON");

  auto* interpret =
      app.add_subcommand("interpret", "evaluate a ground call");
  std::string iProgram, iCall;
  long iFuel = 100000;
  interpret->add_option("program", iProgram, "program file (.wsp)")->required();
  interpret->add_option("--call", iCall, "ground call, e.g. \"Pal(A B A)\"")
      ->required();
  interpret->add_option("--fuel", iFuel, "rule firing budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (app.got_subcommand(verify))
      return runVerify(vProgram, vGoal, vTarget, vMaxNodes, vDisj, vDot, vJson,
                       vOracle);
    if (app.got_subcommand(solveEq))
      return runSolveEq(ePath, eMaxNodes, eDot, eJson);
    if (app.got_subcommand(interpret))
      return runInterpret(iProgram, iCall, iFuel);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "file error: " << e.what() << "\n";
    return kExitFile;
  } catch (const wordver::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const wordver::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
