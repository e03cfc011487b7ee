#include "wordver/interp.hpp"

#include <functional>

namespace wordver {

namespace {

// Matches one pattern against one ground word from `pos`, then continues
// with the cross-argument continuation. String vars extend shortest-first.
bool matchSeqGround(const Expression& pat, size_t pi, const Expression& word,
                    size_t pos, VarSubst& sigma,
                    const std::function<bool()>& k) {
  if (pi == pat.size()) return pos == word.size() && k();
  const Item& t = pat.items[pi];
  if (t.isLetter()) {
    if (pos >= word.size() || !(word.items[pos] == t)) return false;
    return matchSeqGround(pat, pi + 1, word, pos + 1, sigma, k);
  }
  if (t.isVar() && t.kind == Kind::Symbol) {
    if (pos >= word.size()) return false;
    Var v{t.name, t.kind};
    if (const Expression* bound = sigma.lookup(v)) {
      if (!(*bound == Expression::single(word.items[pos]))) return false;
      return matchSeqGround(pat, pi + 1, word, pos + 1, sigma, k);
    }
    sigma.bind(v, Expression::single(word.items[pos]));
    if (matchSeqGround(pat, pi + 1, word, pos + 1, sigma, k)) return true;
    sigma.bindings.erase(v);
    return false;
  }
  if (t.isVar() && t.kind == Kind::String) {
    Var v{t.name, t.kind};
    if (const Expression* bound = sigma.lookup(v)) {
      Expression b = *bound;
      if (pos + b.size() > word.size()) return false;
      for (size_t i = 0; i < b.size(); ++i)
        if (!(word.items[pos + i] == b.items[i])) return false;
      return matchSeqGround(pat, pi + 1, word, pos + b.size(), sigma, k);
    }
    for (size_t len = 0; pos + len <= word.size(); ++len) {
      sigma.bind(v, word.slice(pos, pos + len));
      if (matchSeqGround(pat, pi + 1, word, pos + len, sigma, k)) return true;
      sigma.bindings.erase(v);
    }
    return false;
  }
  return false;  // calls cannot occur in patterns
}

bool matchArgsGround(const Rule& rule, const std::vector<Expression>& args,
                     size_t idx, VarSubst& sigma) {
  if (idx == args.size()) return true;
  return matchSeqGround(rule.patterns[idx], 0, args[idx], 0, sigma, [&]() {
    return matchArgsGround(rule, args, idx + 1, sigma);
  });
}

}  // namespace

std::optional<VarSubst> matchRule(const Rule& rule,
                                  const std::vector<Expression>& args) {
  if (rule.patterns.size() != args.size()) return std::nullopt;
  VarSubst sigma;
  if (matchArgsGround(rule, args, 0, sigma)) return sigma;
  return std::nullopt;
}

namespace {

EvalOutcome evalRec(const Program& program, const Expression& expr,
                    long& fuel) {
  Expression out;
  for (const Item& it : expr.items) {
    if (it.isLetter()) {
      out.append(it);
      continue;
    }
    if (!it.isCall()) {
      throw Error("interpreter input must be ground, found " + it.name);
    }
    std::vector<Expression> args;
    args.reserve(it.args.size());
    for (const Expression& a : it.args) {
      EvalOutcome r = evalRec(program, a, fuel);
      if (r.status != EvalOutcome::Status::Value) return r;
      args.push_back(r.value);
    }
    const Rule* fired = nullptr;
    std::optional<VarSubst> sigma;
    for (const Rule& r : program.rules) {
      if (r.fn != it.name) continue;
      sigma = matchRule(r, args);
      if (sigma) {
        fired = &r;
        break;
      }
    }
    if (!fired) {
      EvalOutcome r;
      r.status = EvalOutcome::Status::Stuck;
      return r;
    }
    if (fuel <= 0) {
      EvalOutcome r;
      r.status = EvalOutcome::Status::FuelExhausted;
      return r;
    }
    --fuel;
    EvalOutcome body = evalRec(program, sigma->apply(fired->body), fuel);
    if (body.status != EvalOutcome::Status::Value) return body;
    out.append(body.value);
  }
  EvalOutcome r;
  r.status = EvalOutcome::Status::Value;
  r.value = out;
  return r;
}

}  // namespace

EvalOutcome eval(const Program& program, const Expression& expr, long fuel) {
  long f = fuel;
  return evalRec(program, expr, f);
}

ReachSample sampleReach(const Program& program, const Expression& goal,
                        const Expression& target, int lenBound, long maxEvals,
                        long fuel) {
  ReachSample out;
  if (maxEvals <= 0) return out;
  std::vector<Param> params(pars(goal).begin(), pars(goal).end());
  const auto& letters = program.alphabet.letters();
  long evals = 0;

  std::function<bool(size_t, Subst&)> go = [&](size_t i, Subst& acc) -> bool {
    if (i == params.size()) {
      if (++evals > maxEvals) return true;  // budget exhausted, stop
      EvalOutcome r = eval(program, acc.apply(goal), fuel);
      if (r.status == EvalOutcome::Status::Value && r.value == target) {
        out.found = true;
        for (const Param& p : params)
          out.inputs.emplace_back(p, *acc.lookup(p));
        return true;
      }
      return false;
    }
    const Param& p = params[i];
    if (p.kind == Kind::Symbol) {
      for (const std::string& l : letters) {
        acc.bindings[p] = Expression::single(Item::letter(l));
        if (go(i + 1, acc)) return true;
      }
      acc.bindings.erase(p);
      return false;
    }
    std::function<bool(Expression&, int)> words = [&](Expression& cur,
                                                      int rem) -> bool {
      acc.bindings[p] = cur;
      if (go(i + 1, acc)) return true;
      if (rem == 0) return false;
      for (const std::string& l : letters) {
        cur.items.push_back(Item::letter(l));
        if (words(cur, rem - 1)) return true;
        cur.items.pop_back();
      }
      return false;
    };
    Expression w;
    bool stop = words(w, lenBound);
    acc.bindings.erase(p);
    return stop;
  };

  Subst acc;
  go(0, acc);
  if (!out.found) out.inputs.clear();
  return out;
}

}  // namespace wordver
