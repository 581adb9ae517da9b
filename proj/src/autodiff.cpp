#include "specband/autodiff.hpp"

#include <algorithm>
#include <string>

#include "specband/error.hpp"

namespace specband {

const Tensor& Var::value() const { return graph_->value(*this); }

Var Graph::param(Tensor& t) {
  Node node;
  t.check_finite("parameter");
  node.op = "param";
  node.value = Tensor(t.shape(), t.storage());
  node.bound = &t;
  node.needs_grad = t.requires_grad();
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::constant(Tensor value) {
  Node node;
  value.check_finite("constant");
  node.op = "constant";
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(std::string_view op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  value.check_finite(std::string(op) + " output");
  Node node;
  node.op = op;
  node.value = std::move(value);
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.graph() != this) fail(ErrorKind::InvalidArgument, "input from a different graph");
    node.inputs.push_back(in.id());
    node.needs_grad = node.needs_grad || nodes_[in.id()].needs_grad;
  }
  if (!backward) node.needs_grad = false;
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

std::span<double> Graph::accum(Var input) {
  Node& node = nodes_[input.id()];
  if (!node.needs_grad) return {};
  if (node.grad.size() != node.value.size()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

void Graph::backward(Var root, double seed) {
  if (&root.graph() != this) fail(ErrorKind::InvalidArgument, "root from a different graph");
  for (Node& node : nodes_) node.grad.clear();
  Node& top = nodes_[root.id()];
  if (!top.needs_grad) return;
  top.grad.assign(top.value.size(), seed);

  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.needs_grad || node.grad.empty()) continue;
    if (node.backward) {
      // Inputs always precede their consumer, so this span stays valid while
      // the callback fills other nodes' buffers.
      node.backward(*this, std::span<const double>(node.grad));
    } else if (node.bound != nullptr) {
      std::span<double> target = node.bound->grad();
      for (std::size_t j = 0; j < node.grad.size(); ++j) target[j] += node.grad[j];
    }
  }
}

}  // namespace specband
