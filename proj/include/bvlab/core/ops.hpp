#pragma once

#include <cstddef>

#include "bvlab/core/tensor.hpp"

namespace bvlab {

enum class Activation { Relu, Tanh, Sigmoid };

// Matrix product of a [m x k] and b [k x n].
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise ops require identical shapes; the only broadcasts are the two
// explicit bias forms below.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double c);
Tensor mul_scalar(const Tensor& a, double c);
Tensor exp(const Tensor& a);

// x [rows x d] + bias [d], applied to every row.
Tensor add_bias_row(const Tensor& x, const Tensor& bias);
// x [n x c x h x w] + bias [c], applied across every spatial site.
Tensor add_bias_channel(const Tensor& x, const Tensor& bias);

Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor apply_activation(const Tensor& x, Activation kind);

Tensor sum_all(const Tensor& x);      // -> scalar [1]
Tensor reshape(const Tensor& x, std::vector<std::size_t> shape);
// Columns [c0, c1) of a [rows x d] tensor.
Tensor slice_cols(const Tensor& x, std::size_t c0, std::size_t c1);

// Cross-correlation: x [n x c x h x w], kernel [f x c x kh x kw].
Tensor conv2d(const Tensor& x, const Tensor& kernel, std::size_t stride, std::size_t padding);
// Transposed convolution; inverts conv2d's spatial shape map.
Tensor deconv2d(const Tensor& x, const Tensor& kernel, std::size_t stride, std::size_t padding);

std::size_t conv_out_extent(std::size_t in, std::size_t k, std::size_t stride, std::size_t padding);

// Mean over rows of the summed per-element binary cross-entropy between
// x in [0,1] and sigmoid(logits), in the stable log-sum form.
Tensor bce_with_logits(const Tensor& x, const Tensor& logits);

// (D / 2 sigma2) * MSE(xhat, x) + D * log(sqrt(sigma2)), MSE averaged over rows.
Tensor gaussian_nll(const Tensor& x, const Tensor& xhat, double sigma2, std::size_t dim);

}  // namespace bvlab
