#pragma once

#include "wordver/frontend.hpp"

namespace wordver {

struct EvalOutcome {
  enum class Status { Value, Stuck, FuelExhausted };
  Status status = Status::Stuck;
  Expression value;  // ground word when status == Value
};

// Deterministic ground match: string variables bind leftmost-shortest,
// repeated variables must bind equal words.
std::optional<VarSubst> matchRule(const Rule& rule,
                                  const std::vector<Expression>& args);

// Innermost call-by-value evaluation; the first matching rule fires. Fuel
// counts rule firings.
EvalOutcome eval(const Program& program, const Expression& expr, long fuel);

struct ReachSample {
  bool found = false;
  std::vector<std::pair<Param, Expression>> inputs;
};

// Evaluates the goal expression over ground instantiations of its params,
// words up to lenBound, stopping after maxEvals evaluations.
ReachSample sampleReach(const Program& program, const Expression& goal,
                        const Expression& target, int lenBound,
                        long maxEvals = 1000000, long fuel = 100000);

}  // namespace wordver
