#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsp {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Raised when operand shapes are incompatible. The message names the
/// operation and the offending extents.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  // Propagates this node's grad into its parents' grads (accumulating).
  std::function<void(Node&)> backward_fn;
};

}  // namespace detail

/// Dense row-major array that records the operations producing it so that
/// gradients can be pulled back with backward(). Copies share storage;
/// use clone() for an independent value copy.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;
  using NodePtr = std::shared_ptr<detail::Node<T>>;

  BasicTensor() = default;

  static BasicTensor zeros(Shape shape, bool requires_grad = false);
  static BasicTensor full(Shape shape, T value, bool requires_grad = false);
  static BasicTensor from_data(Shape shape, std::vector<T> data,
                               bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->data.size(); }

  std::span<const T> data() const { return node_->data; }
  std::span<T> mutable_data() { return node_->data; }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->grad; }

  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->is_leaf; }
  void zero_grad();

  /// Value of a single-element tensor.
  T item() const;

  /// Detached copy of the values (no history, requires_grad = false).
  BasicTensor clone() const;

  const NodePtr& node() const { return node_; }

  /// Builds a non-leaf result of an operation. requires_grad is inherited
  /// from the parents; backward_fn is dropped when no parent needs grad.
  static BasicTensor make_result(Shape shape, std::vector<T> data,
                                 std::vector<NodePtr> parents,
                                 std::function<void(detail::Node<T>&)> backward_fn);

 private:
  explicit BasicTensor(NodePtr node) : node_(std::move(node)) {}
  NodePtr node_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

/// Reverse-mode sweep from a single-element tensor. Leaf grads accumulate
/// across calls; intermediate grads are recomputed on every call.
template <typename T>
void backward(const BasicTensor<T>& loss);

}  // namespace dsp
