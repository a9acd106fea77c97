#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace dipfill {

class Tensor;

// One record in the differentiation graph. Interior nodes are created by
// operators and freed when the last Tensor handle to the graph goes out of
// scope; leaves (parameters, inputs) live as long as their handles.
struct TensorNode {
    std::vector<int> shape;
    std::vector<double> values;
    // Same length as values once allocated. For requires_grad leaves this
    // persists across backward passes and accumulates additively until
    // zero_grad(); interior nodes get a fresh buffer per backward.
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    // Reads this->grad, accumulates into parents' grads. Null for leaves.
    std::function<void(TensorNode&)> backward_fn;
    const char* op = "leaf";

    std::size_t size() const { return values.size(); }
    std::vector<double>& ensure_grad();
};

std::size_t shape_size(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

// Value-semantics handle to a graph node. Copying a Tensor aliases the
// node (like a shared reference); values are mutated in place only by the
// optimizer and by grad_check, never by operators.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(const std::vector<int>& shape, bool requires_grad = false);
    static Tensor full(const std::vector<int>& shape, double value, bool requires_grad = false);
    static Tensor from_data(const std::vector<int>& shape, std::vector<double> values,
                            bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const std::vector<int>& shape() const { return node_->shape; }
    std::size_t size() const { return node_->values.size(); }

    std::vector<double>& values() { return node_->values; }
    const std::vector<double>& values() const { return node_->values; }
    double* data() { return node_->values.data(); }
    const double* data() const { return node_->values.data(); }

    bool requires_grad() const { return node_ && node_->requires_grad; }
    void set_requires_grad(bool flag);

    // Gradient buffer; empty until the tensor has received a gradient.
    const std::vector<double>& grad() const { return node_->grad; }
    std::vector<double>& grad() { return node_->grad; }
    void zero_grad();

    // Scalar extraction; contract error unless size() == 1.
    double item() const;

    // Element access for C×H×W tensors (tests and I/O glue).
    double at(int c, int y, int x) const;

    std::shared_ptr<TensorNode>& node() { return node_; }
    const std::shared_ptr<TensorNode>& node() const { return node_; }

    explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

private:
    std::shared_ptr<TensorNode> node_;
};

// Reverse-mode sweep from a scalar loss. Populates grad on every
// requires_grad leaf reachable from loss; gradients accumulate additively
// across calls until zero_grad().
void backward(const Tensor& loss);

// Number of nodes that would run a backward fn for this loss (diagnostics).
std::size_t graph_size(const Tensor& loss);

}  // namespace dipfill
