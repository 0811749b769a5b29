#include "bvlab/core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace bvlab {

namespace {

std::size_t numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

void check_shape(const std::vector<std::size_t>& shape) {
    for (std::size_t e : shape) {
        if (e == 0) throw ShapeError("tensor extents must be positive, got " + shape_str(shape));
    }
}

}  // namespace

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << "]";
    return os.str();
}

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    check_shape(shape);
    const std::size_t n = numel(shape);
    return from(std::vector<double>(n, 0.0), std::move(shape), requires_grad);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value, bool requires_grad) {
    check_shape(shape);
    const std::size_t n = numel(shape);
    return from(std::vector<double>(n, value), std::move(shape), requires_grad);
}

Tensor Tensor::from(std::vector<double> data, std::vector<std::size_t> shape, bool requires_grad) {
    check_shape(shape);
    if (data.size() != numel(shape)) {
        throw ShapeError("data length " + std::to_string(data.size()) + " does not match shape " +
                         shape_str(shape));
    }
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value) { return from({value}, {1}); }

Tensor Tensor::randu(Rng& rng, double lo, double hi, std::vector<std::size_t> shape,
                     bool requires_grad) {
    check_shape(shape);
    std::vector<double> data(numel(shape));
    for (double& v : data) v = rng.uniform(lo, hi);
    return from(std::move(data), std::move(shape), requires_grad);
}

Tensor Tensor::randn(Rng& rng, std::vector<std::size_t> shape, bool requires_grad) {
    check_shape(shape);
    std::vector<double> data(numel(shape));
    for (double& v : data) v = rng.normal();
    return from(std::move(data), std::move(shape), requires_grad);
}

double Tensor::item() const {
    if (size() != 1) throw ContractError("item() requires a scalar tensor, got " + shape_str(shape()));
    return impl_->data[0];
}

const std::vector<double>& Tensor::grad() const {
    impl_->ensure_grad();
    return impl_->grad;
}

Tensor Tensor::detach() const { return from(impl_->data, impl_->shape); }

Tensor Tensor::make_op(const char* op, std::vector<std::size_t> shape, std::vector<double> data,
                       std::vector<Tensor> parents,
                       std::function<void(detail::TensorImpl&)> backward_fn) {
    bool needs_grad = false;
    for (const Tensor& p : parents) needs_grad = needs_grad || p.requires_grad();
    Tensor out = from(std::move(data), std::move(shape), needs_grad);
    if (needs_grad) {
        out.impl_->op = op;
        out.impl_->parents.reserve(parents.size());
        for (const Tensor& p : parents) out.impl_->parents.push_back(p.impl_ptr());
        out.impl_->backward_fn = std::move(backward_fn);
    }
    return out;
}

void Tensor::backward() const {
    if (size() != 1) {
        throw ContractError("backward() requires a scalar loss, got shape " + shape_str(shape()));
    }

    // Post-order DFS gives children-before-parents; reversed it is a valid
    // topological order for pushing grads root -> leaves.
    std::vector<detail::TensorImpl*> order;
    std::unordered_set<detail::TensorImpl*> seen;
    std::vector<std::pair<detail::TensorImpl*, std::size_t>> stack;
    stack.emplace_back(impl_.get(), 0);
    seen.insert(impl_.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            detail::TensorImpl* parent = node->parents[next++].get();
            if (seen.insert(parent).second) stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (detail::TensorImpl* node : order) {
        if (node->is_leaf()) {
            node->ensure_grad();
        } else {
            node->grad.assign(node->data.size(), 0.0);
        }
    }
    impl_->grad[0] += 1.0;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::TensorImpl* node = *it;
        if (node->backward_fn) node->backward_fn(*node);
    }
}

void zero_grads(const std::vector<Tensor>& params) {
    for (const Tensor& p : params) const_cast<Tensor&>(p).zero_grad();
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps) {
    if (eps <= 0.0) throw ContractError("grad_check requires eps > 0");

    Tensor probe = Tensor::from(x.data(), x.shape(), true);
    Tensor y = f(probe);
    if (y.size() != 1) throw ContractError("grad_check requires a scalar-valued function");
    y.backward();
    const std::vector<double> analytic = probe.grad();

    std::vector<double> values = x.data();
    double worst = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + eps;
        const double up = f(Tensor::from(values, x.shape())).item();
        values[i] = saved - eps;
        const double down = f(Tensor::from(values, x.shape())).item();
        values[i] = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double denom = std::max(1e-8, std::fabs(analytic[i]) + std::fabs(numeric));
        worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
    }
    return worst;
}

}  // namespace bvlab
