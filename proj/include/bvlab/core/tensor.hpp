#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "bvlab/core/error.hpp"
#include "bvlab/core/rng.hpp"

namespace bvlab {

class Tensor;

namespace detail {

struct TensorImpl {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;  // allocated lazily; same length as data once present
    bool requires_grad = false;

    // Graph node: parents and the rule pushing this node's grad into theirs.
    std::vector<std::shared_ptr<TensorImpl>> parents;
    std::function<void(TensorImpl&)> backward_fn;
    const char* op = "leaf";

    bool is_leaf() const { return parents.empty(); }
    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
};

}  // namespace detail

std::string shape_str(const std::vector<std::size_t>& shape);

// Dense 64-bit tensor participating in a reverse-mode computation graph.
// Value semantics: copies alias the same storage/node. A tensor and its graph
// belong to one thread while being built and differentiated; detached tensors
// are immutable and may be shared read-only.
class Tensor {
public:
    Tensor() : impl_(std::make_shared<detail::TensorImpl>()) {}

    static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
    static Tensor full(std::vector<std::size_t> shape, double value, bool requires_grad = false);
    static Tensor from(std::vector<double> data, std::vector<std::size_t> shape,
                       bool requires_grad = false);
    static Tensor scalar(double value);
    // Uniform(lo, hi) entries drawn from rng.
    static Tensor randu(Rng& rng, double lo, double hi, std::vector<std::size_t> shape,
                        bool requires_grad = false);
    static Tensor randn(Rng& rng, std::vector<std::size_t> shape, bool requires_grad = false);

    const std::vector<std::size_t>& shape() const { return impl_->shape; }
    std::size_t rank() const { return impl_->shape.size(); }
    std::size_t size() const { return impl_->data.size(); }
    std::size_t extent(std::size_t d) const { return impl_->shape[d]; }

    const std::vector<double>& data() const { return impl_->data; }
    std::vector<double>& mutable_data() { return impl_->data; }
    double item() const;

    bool requires_grad() const { return impl_->requires_grad; }
    Tensor& set_requires_grad(bool v) {
        impl_->requires_grad = v;
        return *this;
    }

    bool has_grad() const { return impl_->grad.size() == impl_->data.size(); }
    const std::vector<double>& grad() const;
    void zero_grad() { impl_->grad.assign(impl_->data.size(), 0.0); }

    // Reverse-mode pass from a scalar. Leaf grads accumulate across calls;
    // intermediate grads are reset per call.
    void backward() const;

    // Copy of the values with no graph attached.
    Tensor detach() const;

    bool is_leaf() const { return impl_->is_leaf(); }
    const char* op() const { return impl_->op; }

    detail::TensorImpl* impl() const { return impl_.get(); }
    std::shared_ptr<detail::TensorImpl> impl_ptr() const { return impl_; }

    // Internal: wrap the result of an operation.
    static Tensor make_op(const char* op, std::vector<std::size_t> shape, std::vector<double> data,
                          std::vector<Tensor> parents,
                          std::function<void(detail::TensorImpl&)> backward_fn);

private:
    explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<detail::TensorImpl> impl_;
};

// Central-difference gradient check for a scalar-valued tensor function.
// Returns max over coordinates of |analytic - numeric| /
// max(1e-8, |analytic| + |numeric|).
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps);

// Reset the grads of every tensor in the list (typically model parameters).
void zero_grads(const std::vector<Tensor>& params);

}  // namespace bvlab
