#include "dsp/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace dsp {

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto extent : shape) n *= extent;
  return n;
}

template <typename T>
BasicTensor<T> BasicTensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T{0}, requires_grad);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::full(Shape shape, T value, bool requires_grad) {
  auto n = shape_numel(shape);
  return from_data(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::from_data(Shape shape, std::vector<T> data,
                                         bool requires_grad) {
  if (shape_numel(shape) != data.size()) {
    throw ShapeError("tensor: shape " + to_string(shape) + " holds " +
                     std::to_string(shape_numel(shape)) + " values, got " +
                     std::to_string(data.size()));
  }
  auto node = std::make_shared<detail::Node<T>>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(node->data.size(), T{0});
  return BasicTensor(std::move(node));
}

template <typename T>
void BasicTensor<T>::zero_grad() {
  std::fill(node_->grad.begin(), node_->grad.end(), T{0});
}

template <typename T>
T BasicTensor<T>::item() const {
  if (numel() != 1) {
    throw ShapeError("item: expected a single element, shape is " +
                     to_string(shape()));
  }
  return node_->data[0];
}

template <typename T>
BasicTensor<T> BasicTensor<T>::clone() const {
  return from_data(node_->shape, node_->data, false);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::make_result(
    Shape shape, std::vector<T> data, std::vector<NodePtr> parents,
    std::function<void(detail::Node<T>&)> backward_fn) {
  auto node = std::make_shared<detail::Node<T>>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->is_leaf = false;
  node->requires_grad = std::any_of(parents.begin(), parents.end(),
                                    [](const NodePtr& p) { return p->requires_grad; });
  if (node->requires_grad) {
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
  }
  return BasicTensor(std::move(node));
}

template <typename T>
void backward(const BasicTensor<T>& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ShapeError("backward: loss must have exactly one element, shape is " +
                     (loss.defined() ? to_string(loss.shape()) : std::string("<undefined>")));
  }
  using NodeT = detail::Node<T>;
  NodeT* root = loss.node().get();
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<NodeT*> order;
  std::unordered_set<NodeT*> visited;
  std::vector<std::pair<NodeT*, std::size_t>> stack{{root, 0}};
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      NodeT* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (NodeT* node : order) {
    if (!node->is_leaf) node->grad.assign(node->data.size(), T{0});
  }
  root->grad[0] += T{1};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
  // Intermediate buffers are not needed after the sweep.
  for (NodeT* node : order) {
    if (!node->is_leaf) std::vector<T>().swap(node->grad);
  }
}

template class BasicTensor<float>;
template class BasicTensor<double>;
template void backward(const BasicTensor<float>&);
template void backward(const BasicTensor<double>&);

}  // namespace dsp
