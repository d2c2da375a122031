#pragma once
// Partitionings of a continuous state space into numbered classes, stored
// as a decision tree over the vector entries. Interior nodes are either
// axis-aligned interval splits or kernel boundaries; leaves carry class
// ids. Refinement replaces exactly one leaf by a subtree and returns a new
// partitioning sharing every untouched node, so old values stay usable and
// distinctions once made are never lost.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "automata.hpp"
#include "svm.hpp"

namespace rnn2dfa {

using RState = std::vector<double>;

class Partitioning {
 public:
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;
  struct Node {
    int leaf_id = -1;  // set iff this is a leaf
    int dim = -1;      // set iff this is an interval split
    double threshold = 0.0;
    std::shared_ptr<const RbfSvmModel> svm;  // set iff this is a kernel split
    NodePtr low, high;                       // neg/pos children for kernel nodes
    bool is_leaf() const { return !low; }
  };

  // A fresh partitioning is the trivial one: a single class numbered zero.
  Partitioning() {
    auto leaf = std::make_shared<Node>();
    leaf->leaf_id = 0;
    root_ = std::move(leaf);
  }
  static Partitioning initial() { return Partitioning(); }

  int map(const RState& h) const {
    const Node* n = root_.get();
    while (!n->is_leaf()) n = (goes_high(*n, h) ? n->high : n->low).get();
    return n->leaf_id;
  }

  int leaf_count() const { return count_leaves(*root_); }
  int next_id() const { return next_id_; }

  json to_json() const {
    json j;
    j["next_id"] = next_id_;
    j["tree"] = node_to_json(*root_);
    return j;
  }

  static Partitioning from_json(const json& j) {
    try {
      Partitioning p;
      p.next_id_ = j.at("next_id").get<int>();
      p.root_ = node_from_json(j.at("tree"));
      return p;
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("bad partitioning document: ") +
                                  e.what());
    }
  }

 private:
  static bool goes_high(const Node& n, const RState& h) {
    if (n.svm) {
      if (!n.svm->support_vectors.empty() &&
          n.svm->support_vectors[0].size() != h.size())
        throw std::invalid_argument(
            "Partitioning::map: vector dimension does not match a split");
      return n.svm->decide(h);
    }
    if (n.dim >= static_cast<int>(h.size()))
      throw std::invalid_argument(
          "Partitioning::map: vector dimension does not match a split");
    return h[n.dim] >= n.threshold;
  }

  static int count_leaves(const Node& n) {
    if (n.is_leaf()) return 1;
    return count_leaves(*n.low) + count_leaves(*n.high);
  }

  // Path-copy: rebuild the spine from the root to the leaf containing h,
  // replacing that leaf by the given subtree.
  static NodePtr graft(const NodePtr& node, const RState& h,
                       const NodePtr& subtree) {
    if (node->is_leaf()) return subtree;
    auto copy = std::make_shared<Node>(*node);
    if (goes_high(*node, h))
      copy->high = graft(node->high, h, subtree);
    else
      copy->low = graft(node->low, h, subtree);
    return copy;
  }

  static json node_to_json(const Node& n) {
    if (n.is_leaf()) return json{{"kind", "leaf"}, {"id", n.leaf_id}};
    if (n.svm) {
      json model;
      model["gamma"] = n.svm->gamma;
      model["bias"] = n.svm->bias;
      model["support_vectors"] = n.svm->support_vectors;
      model["coefs"] = n.svm->coefs;
      return json{{"kind", "svm"},
                  {"model", std::move(model)},
                  {"neg", node_to_json(*n.low)},
                  {"pos", node_to_json(*n.high)}};
    }
    return json{{"kind", "interval"},
                {"dim", n.dim},
                {"threshold", n.threshold},
                {"low", node_to_json(*n.low)},
                {"high", node_to_json(*n.high)}};
  }

  static NodePtr node_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    auto n = std::make_shared<Node>();
    if (kind == "leaf") {
      n->leaf_id = j.at("id").get<int>();
      if (n->leaf_id < 0) throw std::invalid_argument("negative class id");
      return n;
    }
    if (kind == "interval") {
      n->dim = j.at("dim").get<int>();
      n->threshold = j.at("threshold").get<double>();
      if (n->dim < 0) throw std::invalid_argument("negative split dimension");
      n->low = node_from_json(j.at("low"));
      n->high = node_from_json(j.at("high"));
      return n;
    }
    if (kind == "svm") {
      const json& m = j.at("model");
      auto model = std::make_shared<RbfSvmModel>();
      model->gamma = m.at("gamma").get<double>();
      model->bias = m.at("bias").get<double>();
      model->support_vectors =
          m.at("support_vectors").get<std::vector<std::vector<double>>>();
      model->coefs = m.at("coefs").get<std::vector<double>>();
      if (model->coefs.size() != model->support_vectors.size())
        throw std::invalid_argument(
            "boundary model has mismatched vector and multiplier counts");
      for (const auto& v : model->support_vectors)
        if (v.size() != model->support_vectors[0].size())
          throw std::invalid_argument(
              "boundary model has inconsistent vector dimensions");
      n->svm = std::move(model);
      n->low = node_from_json(j.at("neg"));
      n->high = node_from_json(j.at("pos"));
      return n;
    }
    throw std::invalid_argument("unknown partitioning node kind: " + kind);
  }

  friend struct RefinementAccess;

  NodePtr root_;
  int next_id_ = 1;
};

// h is the state to isolate; cluster holds states currently sharing its
// class that should end up elsewhere.
struct RefinementRequest {
  RState h;
  std::vector<RState> cluster;
};

struct RefinementOutcome {
  Partitioning p;
  bool separated = false;      // some cluster member now maps away from h
  bool split_perfect = false;  // every cluster member does
};

namespace detail {

// Keep only cluster members that currently share h's class; an empty
// remainder means there is nothing to split.
inline std::vector<RState> colocated(const Partitioning& p,
                                     const RefinementRequest& req,
                                     const char* who) {
  int target = p.map(req.h);
  std::vector<RState> kept;
  for (const RState& x : req.cluster)
    if (p.map(x) == target) kept.push_back(x);
  if (kept.empty())
    throw std::invalid_argument(std::string(who) +
                                ": no cluster member shares the state's class");
  return kept;
}

}  // namespace detail

struct RefinementAccess {
  static RefinementOutcome finish(const Partitioning& p, const RState& h,
                                  const std::vector<RState>& kept,
                                  Partitioning::NodePtr subtree, int new_ids) {
    RefinementOutcome out;
    out.p.root_ = Partitioning::graft(p.root_, h, std::move(subtree));
    out.p.next_id_ = p.next_id_ + new_ids;
    int h_now = out.p.map(h);
    out.split_perfect = true;
    for (const RState& x : kept) {
      bool moved = out.p.map(x) != h_now;
      out.separated |= moved;
      out.split_perfect &= moved;
    }
    return out;
  }
};

// Fit a kernel boundary isolating h from its cluster and hang it below the
// class's leaf, giving both sides fresh numbers. Exactly one class is
// added. An imperfect boundary is kept — later refinements can still pull
// the stragglers apart — and reported through the outcome flags.
inline RefinementOutcome refine_svm(const Partitioning& p,
                                    const RefinementRequest& req) {
  std::vector<RState> kept = detail::colocated(p, req, "refine_svm");
  std::vector<std::vector<double>> X;
  std::vector<int> y;
  X.push_back(req.h);
  y.push_back(+1);
  for (const RState& x : kept) {
    X.push_back(x);
    y.push_back(-1);
  }
  SvmFit fit = svm_fit(X, y);  // C and width at their defaults

  auto neg = std::make_shared<Partitioning::Node>();
  neg->leaf_id = p.next_id();
  auto pos = std::make_shared<Partitioning::Node>();
  pos->leaf_id = p.next_id() + 1;
  auto split = std::make_shared<Partitioning::Node>();
  split->svm = std::make_shared<RbfSvmModel>(std::move(fit.model));
  split->low = std::move(neg);
  split->high = std::move(pos);
  return RefinementAccess::finish(p, req.h, kept, std::move(split), 2);
}

// Replace the class's leaf by a complete depth-d tree of interval splits:
// level i cuts the dimension with the i-th largest gap between h and the
// cluster mean, halfway across that gap. 2^d - 1 classes are added. The
// mean always ends up on the far side of the first cut, so at least one
// cluster member separates whenever any gap is nonzero.
inline RefinementOutcome refine_interval(const Partitioning& p,
                                         const RefinementRequest& req,
                                         int depth = 10) {
  if (depth < 1) throw std::invalid_argument("refine_interval: depth < 1");
  std::vector<RState> kept = detail::colocated(p, req, "refine_interval");
  const int dims = static_cast<int>(req.h.size());
  if (depth > dims) {
    std::cerr << "refine_interval: depth " << depth << " clamped to the "
              << dims << " available dimensions\n";
    depth = dims;
  }
  RState mean(dims, 0.0);
  for (const RState& x : kept)
    for (int i = 0; i < dims; ++i) mean[i] += x[i];
  for (double& m : mean) m /= static_cast<double>(kept.size());

  std::vector<int> order(dims);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double ga = std::abs(req.h[a] - mean[a]);
    double gb = std::abs(req.h[b] - mean[b]);
    return ga != gb ? ga > gb : a < b;
  });

  int id = p.next_id();
  auto build = [&](auto&& self, int level) -> Partitioning::NodePtr {
    if (level == depth) {
      auto leaf = std::make_shared<Partitioning::Node>();
      leaf->leaf_id = id++;
      return leaf;
    }
    auto n = std::make_shared<Partitioning::Node>();
    n->dim = order[level];
    n->threshold = (req.h[n->dim] + mean[n->dim]) / 2.0;
    n->low = self(self, level + 1);
    n->high = self(self, level + 1);
    return n;
  };
  Partitioning::NodePtr subtree = build(build, 0);
  return RefinementAccess::finish(p, req.h, kept, std::move(subtree),
                                  1 << depth);
}

}  // namespace rnn2dfa
