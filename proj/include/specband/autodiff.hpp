#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "specband/tensor.hpp"

namespace specband {

class Graph;

/// Handle to a node in a Graph. Cheap to copy; only valid while its graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph& graph() const { return *graph_; }
  std::size_t id() const noexcept { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t dim(std::size_t axis) const { return value().dim(axis); }
  std::size_t size() const { return value().size(); }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Tape of operations recorded in execution order, which is a topological order
/// by construction. backward() walks the tape once in reverse.
///
/// Parameters enter through param(); after backward their gradient is added to
/// the bound tensor's grad slot, so two backward passes without zero_grad
/// accumulate twice the gradient. Graphs are not thread-safe; use one per thread.
class Graph {
 public:
  /// Receives this node's output gradient; accumulates into inputs via accum().
  using BackwardFn = std::function<void(Graph&, std::span<const double>)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf bound to an external tensor. Gradients flow only if t.requires_grad().
  Var param(Tensor& t);
  Var constant(Tensor value);

  /// Records an op output. `backward` may be empty for non-differentiable ops.
  Var record(std::string_view op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  std::string_view op(Var v) const { return nodes_[v.id()].op; }
  bool needs_grad(Var v) const { return nodes_[v.id()].needs_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Gradient buffer of an input during backward, or an empty span if the
  /// input does not participate in differentiation.
  std::span<double> accum(Var input);

  /// Gradient of the last backward() root with respect to `v`.
  std::span<const double> grad(Var v) const { return nodes_[v.id()].grad; }

  /// Reverse sweep from `root`, whose gradient is seeded with `seed` everywhere.
  void backward(Var root, double seed = 1.0);

 private:
  struct Node {
    std::string_view op;
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Tensor* bound = nullptr;
    bool needs_grad = false;
    std::vector<double> grad;
  };

  std::vector<Node> nodes_;
};

}  // namespace specband
