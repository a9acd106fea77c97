#include "dipfill/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "dipfill/errors.hpp"

namespace dipfill {

std::size_t shape_size(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

std::vector<double>& TensorNode::ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
    return grad;
}

static std::shared_ptr<TensorNode> new_leaf(std::vector<int> shape,
                                            std::vector<double> values,
                                            bool requires_grad) {
    for (int d : shape) {
        if (d <= 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
    }
    if (values.size() != shape_size(shape)) {
        throw DimensionError("value count " + std::to_string(values.size()) +
                             " does not match shape " + shape_str(shape));
    }
    auto n = std::make_shared<TensorNode>();
    n->shape = std::move(shape);
    n->values = std::move(values);
    n->requires_grad = requires_grad;
    if (requires_grad) n->ensure_grad();
    return n;
}

Tensor Tensor::zeros(const std::vector<int>& shape, bool requires_grad) {
    return Tensor(new_leaf(shape, std::vector<double>(shape_size(shape), 0.0), requires_grad));
}

Tensor Tensor::full(const std::vector<int>& shape, double value, bool requires_grad) {
    return Tensor(new_leaf(shape, std::vector<double>(shape_size(shape), value), requires_grad));
}

Tensor Tensor::from_data(const std::vector<int>& shape, std::vector<double> values,
                         bool requires_grad) {
    return Tensor(new_leaf(shape, std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor(new_leaf({1}, {value}, requires_grad));
}

void Tensor::set_requires_grad(bool flag) {
    if (!node_) throw ContractError("set_requires_grad on undefined tensor");
    if (node_->backward_fn) throw ContractError("set_requires_grad is only valid on leaf tensors");
    node_->requires_grad = flag;
    if (flag) node_->ensure_grad();
}

void Tensor::zero_grad() {
    if (!node_) return;
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

double Tensor::item() const {
    if (!node_ || node_->values.size() != 1) {
        throw ContractError("item() requires a scalar tensor, got " +
                            (node_ ? shape_str(node_->shape) : std::string("undefined")));
    }
    return node_->values[0];
}

double Tensor::at(int c, int y, int x) const {
    const auto& s = node_->shape;
    if (s.size() != 3) throw ContractError("at(c,y,x) requires a rank-3 tensor, got " + shape_str(s));
    return node_->values[(static_cast<std::size_t>(c) * s[1] + y) * s[2] + x];
}

// Post-order over the requires_grad subgraph; iterative to keep stack depth
// independent of graph depth.
static std::vector<TensorNode*> topo_order(TensorNode* root) {
    std::vector<TensorNode*> order;
    if (!root->requires_grad) return order;
    std::unordered_set<TensorNode*> visited;
    std::vector<std::pair<TensorNode*, std::size_t>> stack;
    stack.emplace_back(root, 0);
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            TensorNode* p = node->parents[next++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order;  // parents before children; reverse for backprop
}

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1) {
        throw ContractError("backward requires a scalar loss tensor");
    }
    TensorNode* root = loss.node().get();
    if (!root->requires_grad) return;  // nothing downstream wants gradients
    auto order = topo_order(root);
    root->ensure_grad();
    root->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorNode* n = *it;
        if (n->backward_fn) n->backward_fn(*n);
    }
}

std::size_t graph_size(const Tensor& loss) {
    if (!loss.defined()) return 0;
    auto order = topo_order(loss.node().get());
    return order.size();
}

}  // namespace dipfill
