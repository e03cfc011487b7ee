#pragma once

#include "wordver/eqsolve.hpp"

namespace wordver {

struct ParseError : Error {
  int line = 0, col = 0;
  ParseError(const std::string& msg, int l, int c)
      : Error(msg + " (line " + std::to_string(l) + ", col " +
              std::to_string(c) + ")"),
        line(l),
        col(c) {}
};

struct Rule {
  std::string fn;
  std::vector<Expression> patterns;
  Expression body;
  int index = 0;  // position among the rules of the same function, 1-based
};

struct Program {
  Alphabet alphabet;
  std::vector<Rule> rules;
  std::map<std::string, size_t> arities;
  std::vector<std::string> warnings;

  bool hasFunction(const std::string& fn) const { return arities.count(fn); }
  std::vector<const Rule*> rulesFor(const std::string& fn) const;
};

// Concrete grammar: `alphabet A B T F;` header, then `Name(p1, ..., pn) =
// body;` rules. `x,y,z...` string vars, `c...` symbol vars, `#` comments.
Program parseProgram(const std::string& text);
std::string printProgram(const Program& p);

// Goal call like `Go(u, v)`: lowercase names are parameters (u/v/w string,
// s symbol). When the entry function has a single rule with plain variable
// patterns the body is inlined.
Expression parseGoal(const std::string& text, const Program& program);

// Ground word over the program alphabet, e.g. "F" or "T F".
Expression parseTarget(const std::string& text, const Program& program);

// Ground call like `Go(A B, ε)` for the interpreter.
Expression parseGroundCall(const std::string& text, const Program& program);

struct ConstraintFile {
  Alphabet alphabet;
  EqConfiguration config;
};

// One constraint per line: the first `lhs = rhs` is the goal equation,
// later equations are side constraints, `q != seg _ seg` lines are
// inequalities. An optional `alphabet ...;` line declares Sigma.
ConstraintFile parseConstraintFile(const std::string& text);

}  // namespace wordver
