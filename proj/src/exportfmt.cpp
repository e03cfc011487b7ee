#include "wordver/exportfmt.hpp"

#include <json.hpp>

#include <sstream>

namespace wordver {

namespace {

using Json = nlohmann::ordered_json;

std::string escapeDot(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

// fresh/open/closed marks per the scheme; closed-with targets resolve to
// the fold target or the node itself
struct Marks {
  std::vector<bool> closed;
  std::vector<int> closedWith;
};

template <typename Tree, typename IsLeafClosed, typename FoldTarget>
Marks computeMarks(const Tree& tree, IsLeafClosed leafClosed,
                   FoldTarget foldTarget) {
  size_t n = tree.nodes.size();
  Marks m;
  m.closed.assign(n, false);
  m.closedWith.assign(n, -1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < n; ++i) {
      if (tree.nodes[i].removed || m.closed[i]) continue;
      int ft = foldTarget(tree.nodes[i]);
      if (leafClosed(tree.nodes[i]) || ft >= 0) {
        m.closed[i] = true;
        m.closedWith[i] = ft >= 0 ? ft : static_cast<int>(i);
        changed = true;
        continue;
      }
      bool hasChild = false, all = true;
      for (int c : tree.nodes[i].children) {
        if (tree.nodes[c].removed) continue;
        hasChild = true;
        if (!m.closed[c]) all = false;
      }
      if (hasChild && all) {
        m.closed[i] = true;
        m.closedWith[i] = static_cast<int>(i);
        changed = true;
      }
    }
  }
  return m;
}

std::string storeLabel(const std::vector<WordEquation>& eqs,
                       const std::vector<LinearInequality>& negs) {
  std::ostringstream os;
  for (const WordEquation& e : eqs) os << "\\n" << escapeDot(e.str());
  for (const LinearInequality& n : negs) os << "\\n" << escapeDot(n.str());
  return os.str();
}

}  // namespace

std::string treeToDot(const ProcessTree& tree, const Program& program) {
  std::ostringstream os;
  os << "digraph process {\n  node [shape=box];\n";
  for (const TreeNode& n : tree.nodes) {
    if (n.removed) continue;
    os << "  n" << n.id << " [label=\"";
    if (n.isLet) {
      os << "let ";
      for (size_t i = 0; i < n.let.size(); ++i) {
        if (i) os << ", ";
        os << escapeDot(n.let[i].param.name) << " = "
           << escapeDot(n.let[i].image.str());
      }
    } else {
      os << escapeDot(n.cfg.expr.str()) << storeLabel(n.cfg.eqs, n.cfg.negs);
    }
    os << "\"];\n";
  }
  for (const TreeNode& n : tree.nodes) {
    if (n.removed || n.parent < 0) continue;
    os << "  n" << n.parent << " -> n" << n.id;
    std::string label;
    if (!n.edge.empty()) label = n.edge.str();
    if (n.ruleIndex >= 0) {
      const Rule& r = program.rules[n.ruleIndex];
      std::string tag = r.fn + "." + std::to_string(r.index);
      label = label.empty() ? tag : tag + ": " + label;
    }
    if (!label.empty()) os << " [label=\"" << escapeDot(label) << "\"]";
    os << ";\n";
  }
  for (const TreeNode& n : tree.nodes) {
    if (n.removed || n.state != NodeState::Folded) continue;
    os << "  n" << n.id << " -> n" << n.foldTarget
       << " [style=dashed, label=\"reducing\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string treeToJson(const ProcessTree& tree, const Program& program,
                       const Verdict& v, bool capExceeded) {
  Marks marks = computeMarks(
      tree,
      [](const TreeNode& n) {
        return n.state == NodeState::Passive || n.state == NodeState::Dead;
      },
      [](const TreeNode& n) {
        return n.state == NodeState::Folded ? n.foldTarget : -1;
      });
  Json j;
  j["verdict"] =
      v.status == VerdictStatus::Unreachable ? "unreachable" : "unknown";
  j["capExceeded"] = capExceeded;
  Json cond = Json::array();
  for (const auto& [p, img] : v.condition) {
    Json c;
    c["param"] = p.name;
    c["value"] = img.str();
    cond.push_back(c);
  }
  j["condition"] = cond;
  j["targetNodes"] = v.targetNodes;
  Json nodes = Json::array();
  for (const TreeNode& n : tree.nodes) {
    if (n.removed) continue;
    Json jn;
    jn["id"] = n.id;
    if (n.state == NodeState::Fresh)
      jn["mark"] = "fresh";
    else if (marks.closed[n.id])
      jn["mark"] = "closed";
    else
      jn["mark"] = "open";
    if (marks.closed[n.id]) jn["closedWith"] = marks.closedWith[n.id];
    if (n.isLet) {
      Json lets = Json::array();
      for (const LetBinding& b : n.let) {
        Json lb;
        lb["param"] = b.param.name;
        lb["image"] = b.image.str();
        lets.push_back(lb);
      }
      jn["let"] = lets;
    } else {
      jn["expr"] = n.cfg.expr.str();
      Json eqs = Json::array();
      for (const WordEquation& e : n.cfg.eqs) eqs.push_back(e.str());
      jn["eqs"] = eqs;
      Json negs = Json::array();
      for (const LinearInequality& x : n.cfg.negs) negs.push_back(x.str());
      jn["negs"] = negs;
      jn["dead"] = n.state == NodeState::Dead;
    }
    nodes.push_back(jn);
  }
  j["nodes"] = nodes;
  Json edges = Json::array();
  for (const TreeNode& n : tree.nodes) {
    if (n.removed || n.parent < 0) continue;
    Json e;
    e["from"] = n.parent;
    e["to"] = n.id;
    e["narrowing"] = n.edge.str();
    if (n.ruleIndex >= 0) {
      const Rule& r = program.rules[n.ruleIndex];
      e["rule"] = r.fn + "." + std::to_string(r.index);
    }
    edges.push_back(e);
  }
  j["edges"] = edges;
  return j.dump(2) + "\n";
}

std::string eqTreeToDot(const EqTree& tree) {
  std::ostringstream os;
  os << "digraph equations {\n  node [shape=box];\n";
  for (const EqNode& n : tree.nodes) {
    if (n.removed) continue;
    os << "  n" << n.id << " [label=\"";
    if (n.state == EqNodeState::Solved)
      os << "T";
    else
      os << escapeDot(n.cfg.goal.str())
         << storeLabel(n.cfg.sideEqs, n.cfg.negs);
    os << "\"];\n";
  }
  for (const EqNode& n : tree.nodes) {
    if (n.removed || n.parent < 0) continue;
    os << "  n" << n.parent << " -> n" << n.id;
    if (!n.edge.empty()) os << " [label=\"" << escapeDot(n.edge.str()) << "\"]";
    os << ";\n";
  }
  for (const EqNode& n : tree.nodes) {
    if (n.removed || n.state != EqNodeState::Folded) continue;
    os << "  n" << n.id << " -> n" << n.foldTarget
       << " [style=dashed, label=\"reducing\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string eqTreeToJson(const SolveResult& result) {
  Marks marks = computeMarks(
      result.tree,
      [](const EqNode& n) {
        return n.state == EqNodeState::Solved || n.state == EqNodeState::Dead;
      },
      [](const EqNode& n) {
        return n.state == EqNodeState::Folded ? n.foldTarget : -1;
      });
  Json j;
  switch (result.status) {
    case EqStatus::Sat: j["status"] = "sat"; break;
    case EqStatus::Unsat: j["status"] = "unsat"; break;
    case EqStatus::CapExceeded: j["status"] = "cap-exceeded"; break;
  }
  j["rootNarrowings"] = result.rootNarrowings.str();
  j["witness"] = result.witness ? result.witness->str() : "";
  j["nodesCreated"] = result.nodesCreated;
  Json nodes = Json::array();
  for (const EqNode& n : result.tree.nodes) {
    if (n.removed) continue;
    Json jn;
    jn["id"] = n.id;
    jn["goal"] = n.cfg.goal.str();
    Json eqs = Json::array();
    for (const WordEquation& e : n.cfg.sideEqs) eqs.push_back(e.str());
    jn["eqs"] = eqs;
    Json negs = Json::array();
    for (const LinearInequality& x : n.cfg.negs) negs.push_back(x.str());
    jn["negs"] = negs;
    if (n.state == EqNodeState::Fresh)
      jn["mark"] = "fresh";
    else if (marks.closed[n.id])
      jn["mark"] = "closed";
    else
      jn["mark"] = "open";
    if (marks.closed[n.id]) jn["closedWith"] = marks.closedWith[n.id];
    jn["solved"] = n.state == EqNodeState::Solved;
    jn["dead"] = n.state == EqNodeState::Dead;
    nodes.push_back(jn);
  }
  j["nodes"] = nodes;
  Json edges = Json::array();
  for (const EqNode& n : result.tree.nodes) {
    if (n.removed || n.parent < 0) continue;
    Json e;
    e["from"] = n.parent;
    e["to"] = n.id;
    e["narrowing"] = n.edge.str();
    edges.push_back(e);
  }
  j["edges"] = edges;
  return j.dump(2) + "\n";
}

}  // namespace wordver
