#include "bvlab/core/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "bvlab/simd/kernels.hpp"

namespace bvlab {

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
    }
}

detail::TensorImpl& parent(detail::TensorImpl& self, std::size_t i) { return *self.parents[i]; }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0)) {
        throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
    }
    const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
    std::vector<double> out(m * n);
    simd::gemm(false, false, m, n, k, 1.0, a.data().data(), k, b.data().data(), n, 0.0, out.data(), n);

    auto backward = [m, k, n](detail::TensorImpl& self) {
        auto& pa = parent(self, 0);
        auto& pb = parent(self, 1);
        // gradA += gradOut * B^T, gradB += A^T * gradOut
        simd::gemm(false, true, m, k, n, 1.0, self.grad.data(), n, pb.data.data(), n, 1.0,
                   pa.grad.data(), k);
        simd::gemm(true, false, k, n, m, 1.0, pa.data.data(), k, self.grad.data(), n, 1.0,
                   pb.grad.data(), n);
    };
    return Tensor::make_op("matmul", {m, n}, std::move(out), {a, b}, backward);
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape("add", a, b);
    std::vector<double> out(a.size());
    simd::add(a.data().data(), b.data().data(), out.data(), out.size());
    auto backward = [](detail::TensorImpl& self) {
        simd::axpy(1.0, self.grad.data(), parent(self, 0).grad.data(), self.grad.size());
        simd::axpy(1.0, self.grad.data(), parent(self, 1).grad.data(), self.grad.size());
    };
    return Tensor::make_op("add", a.shape(), std::move(out), {a, b}, backward);
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape("sub", a, b);
    std::vector<double> out(a.size());
    simd::sub(a.data().data(), b.data().data(), out.data(), out.size());
    auto backward = [](detail::TensorImpl& self) {
        simd::axpy(1.0, self.grad.data(), parent(self, 0).grad.data(), self.grad.size());
        simd::axpy(-1.0, self.grad.data(), parent(self, 1).grad.data(), self.grad.size());
    };
    return Tensor::make_op("sub", a.shape(), std::move(out), {a, b}, backward);
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape("mul", a, b);
    std::vector<double> out(a.size());
    simd::mul(a.data().data(), b.data().data(), out.data(), out.size());
    auto backward = [](detail::TensorImpl& self) {
        auto& pa = parent(self, 0);
        auto& pb = parent(self, 1);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            pa.grad[i] += self.grad[i] * pb.data[i];
            pb.grad[i] += self.grad[i] * pa.data[i];
        }
    };
    return Tensor::make_op("mul", a.shape(), std::move(out), {a, b}, backward);
}

Tensor add_scalar(const Tensor& a, double c) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + c;
    auto backward = [](detail::TensorImpl& self) {
        simd::axpy(1.0, self.grad.data(), parent(self, 0).grad.data(), self.grad.size());
    };
    return Tensor::make_op("add_scalar", a.shape(), std::move(out), {a}, backward);
}

Tensor mul_scalar(const Tensor& a, double c) {
    std::vector<double> out(a.size());
    simd::scale(a.data().data(), c, out.data(), out.size());
    auto backward = [c](detail::TensorImpl& self) {
        simd::axpy(c, self.grad.data(), parent(self, 0).grad.data(), self.grad.size());
    };
    return Tensor::make_op("mul_scalar", a.shape(), std::move(out), {a}, backward);
}

Tensor exp(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(a.data()[i]);
    auto backward = [](detail::TensorImpl& self) {
        auto& pa = parent(self, 0);
        for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * self.data[i];
    };
    return Tensor::make_op("exp", a.shape(), std::move(out), {a}, backward);
}

Tensor add_bias_row(const Tensor& x, const Tensor& bias) {
    if (x.rank() != 2 || bias.rank() != 1 || bias.extent(0) != x.extent(1)) {
        throw ShapeError("add_bias_row: shapes " + shape_str(x.shape()) + " and " +
                         shape_str(bias.shape()) + " incompatible");
    }
    const std::size_t rows = x.extent(0), d = x.extent(1);
    std::vector<double> out(x.size());
    for (std::size_t r = 0; r < rows; ++r) {
        simd::add(x.data().data() + r * d, bias.data().data(), out.data() + r * d, d);
    }
    auto backward = [rows, d](detail::TensorImpl& self) {
        simd::axpy(1.0, self.grad.data(), parent(self, 0).grad.data(), self.grad.size());
        auto& pb = parent(self, 1);
        for (std::size_t r = 0; r < rows; ++r) {
            simd::axpy(1.0, self.grad.data() + r * d, pb.grad.data(), d);
        }
    };
    return Tensor::make_op("add_bias_row", x.shape(), std::move(out), {x, bias}, backward);
}

Tensor add_bias_channel(const Tensor& x, const Tensor& bias) {
    if (x.rank() != 4 || bias.rank() != 1 || bias.extent(0) != x.extent(1)) {
        throw ShapeError("add_bias_channel: shapes " + shape_str(x.shape()) + " and " +
                         shape_str(bias.shape()) + " incompatible");
    }
    const std::size_t n = x.extent(0), c = x.extent(1), hw = x.extent(2) * x.extent(3);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double b = bias.data()[ch];
            const double* src = x.data().data() + (i * c + ch) * hw;
            double* dst = out.data() + (i * c + ch) * hw;
            for (std::size_t s = 0; s < hw; ++s) dst[s] = src[s] + b;
        }
    }
    auto backward = [n, c, hw](detail::TensorImpl& self) {
        simd::axpy(1.0, self.grad.data(), parent(self, 0).grad.data(), self.grad.size());
        auto& pb = parent(self, 1);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                pb.grad[ch] += simd::sum(self.grad.data() + (i * c + ch) * hw, hw);
            }
        }
    };
    return Tensor::make_op("add_bias_channel", x.shape(), std::move(out), {x, bias}, backward);
}

Tensor relu(const Tensor& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] > 0.0 ? x.data()[i] : 0.0;
    auto backward = [](detail::TensorImpl& self) {
        auto& px = parent(self, 0);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            if (px.data[i] > 0.0) px.grad[i] += self.grad[i];
        }
    };
    return Tensor::make_op("relu", x.shape(), std::move(out), {x}, backward);
}

Tensor tanh(const Tensor& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x.data()[i]);
    auto backward = [](detail::TensorImpl& self) {
        auto& px = parent(self, 0);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            px.grad[i] += self.grad[i] * (1.0 - self.data[i] * self.data[i]);
        }
    };
    return Tensor::make_op("tanh", x.shape(), std::move(out), {x}, backward);
}

Tensor sigmoid(const Tensor& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = x.data()[i];
        out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    auto backward = [](detail::TensorImpl& self) {
        auto& px = parent(self, 0);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            px.grad[i] += self.grad[i] * self.data[i] * (1.0 - self.data[i]);
        }
    };
    return Tensor::make_op("sigmoid", x.shape(), std::move(out), {x}, backward);
}

Tensor apply_activation(const Tensor& x, Activation kind) {
    switch (kind) {
        case Activation::Relu: return relu(x);
        case Activation::Tanh: return tanh(x);
        case Activation::Sigmoid: return sigmoid(x);
    }
    throw ContractError("apply_activation: unknown activation kind");
}

Tensor sum_all(const Tensor& x) {
    std::vector<double> out{simd::sum(x.data().data(), x.size())};
    auto backward = [](detail::TensorImpl& self) {
        auto& px = parent(self, 0);
        const double g = self.grad[0];
        for (double& v : px.grad) v += g;
    };
    return Tensor::make_op("sum_all", {1}, std::move(out), {x}, backward);
}

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    if (n != x.size()) {
        throw ShapeError("reshape: size " + std::to_string(x.size()) + " does not fit " +
                         shape_str(shape));
    }
    auto backward = [](detail::TensorImpl& self) {
        simd::axpy(1.0, self.grad.data(), parent(self, 0).grad.data(), self.grad.size());
    };
    return Tensor::make_op("reshape", std::move(shape), x.data(), {x}, backward);
}

Tensor slice_cols(const Tensor& x, std::size_t c0, std::size_t c1) {
    if (x.rank() != 2 || c0 >= c1 || c1 > x.extent(1)) {
        throw ShapeError("slice_cols: invalid range [" + std::to_string(c0) + "," +
                         std::to_string(c1) + ") for " + shape_str(x.shape()));
    }
    const std::size_t rows = x.extent(0), d = x.extent(1), w = c1 - c0;
    std::vector<double> out(rows * w);
    for (std::size_t r = 0; r < rows; ++r) {
        std::memcpy(out.data() + r * w, x.data().data() + r * d + c0, w * sizeof(double));
    }
    auto backward = [rows, d, w, c0](detail::TensorImpl& self) {
        auto& px = parent(self, 0);
        for (std::size_t r = 0; r < rows; ++r) {
            simd::axpy(1.0, self.grad.data() + r * w, px.grad.data() + r * d + c0, w);
        }
    };
    return Tensor::make_op("slice_cols", {rows, w}, std::move(out), {x}, backward);
}

std::size_t conv_out_extent(std::size_t in, std::size_t k, std::size_t stride, std::size_t padding) {
    const std::size_t padded = in + 2 * padding;
    if (stride == 0 || padded < k || (padded - k) % stride != 0) {
        throw ConfigError("conv output extent (" + std::to_string(in) + " + 2*" +
                          std::to_string(padding) + " - " + std::to_string(k) + ") / " +
                          std::to_string(stride) + " + 1 is not a positive integer");
    }
    return (padded - k) / stride + 1;
}

namespace {

struct ConvGeom {
    std::size_t c, h, w, kh, kw, oh, ow, stride, pad;
    std::size_t col_rows() const { return c * kh * kw; }
    std::size_t col_cols() const { return oh * ow; }
};

// col[(c*kh+i)*kw+j][y*ow+x] = input[c][y*stride+i-pad][x*stride+j-pad]
void im2col(const double* img, const ConvGeom& g, double* col) {
    for (std::size_t c = 0; c < g.c; ++c) {
        const double* plane = img + c * g.h * g.w;
        for (std::size_t i = 0; i < g.kh; ++i) {
            for (std::size_t j = 0; j < g.kw; ++j) {
                double* dst = col + ((c * g.kh + i) * g.kw + j) * g.col_cols();
                for (std::size_t y = 0; y < g.oh; ++y) {
                    const std::ptrdiff_t sy =
                        static_cast<std::ptrdiff_t>(y * g.stride + i) - static_cast<std::ptrdiff_t>(g.pad);
                    if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(g.h)) {
                        std::memset(dst + y * g.ow, 0, g.ow * sizeof(double));
                        continue;
                    }
                    const double* srow = plane + static_cast<std::size_t>(sy) * g.w;
                    for (std::size_t x = 0; x < g.ow; ++x) {
                        const std::ptrdiff_t sx =
                            static_cast<std::ptrdiff_t>(x * g.stride + j) - static_cast<std::ptrdiff_t>(g.pad);
                        dst[y * g.ow + x] =
                            (sx < 0 || sx >= static_cast<std::ptrdiff_t>(g.w)) ? 0.0 : srow[sx];
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatter-add the column matrix back into the image.
void col2im(const double* col, const ConvGeom& g, double* img) {
    for (std::size_t c = 0; c < g.c; ++c) {
        double* plane = img + c * g.h * g.w;
        for (std::size_t i = 0; i < g.kh; ++i) {
            for (std::size_t j = 0; j < g.kw; ++j) {
                const double* src = col + ((c * g.kh + i) * g.kw + j) * g.col_cols();
                for (std::size_t y = 0; y < g.oh; ++y) {
                    const std::ptrdiff_t sy =
                        static_cast<std::ptrdiff_t>(y * g.stride + i) - static_cast<std::ptrdiff_t>(g.pad);
                    if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(g.h)) continue;
                    double* drow = plane + static_cast<std::size_t>(sy) * g.w;
                    for (std::size_t x = 0; x < g.ow; ++x) {
                        const std::ptrdiff_t sx =
                            static_cast<std::ptrdiff_t>(x * g.stride + j) - static_cast<std::ptrdiff_t>(g.pad);
                        if (sx >= 0 && sx < static_cast<std::ptrdiff_t>(g.w)) drow[sx] += src[y * g.ow + x];
                    }
                }
            }
        }
    }
}

ConvGeom conv_geometry(const Tensor& x, const Tensor& kernel, std::size_t stride, std::size_t padding) {
    if (x.rank() != 4 || kernel.rank() != 4) {
        throw ShapeError("conv2d: expected 4-d input and kernel, got " + shape_str(x.shape()) +
                         " and " + shape_str(kernel.shape()));
    }
    if (x.extent(1) != kernel.extent(1)) {
        throw ShapeError("conv2d: channel mismatch between " + shape_str(x.shape()) + " and " +
                         shape_str(kernel.shape()));
    }
    ConvGeom g;
    g.c = x.extent(1);
    g.h = x.extent(2);
    g.w = x.extent(3);
    g.kh = kernel.extent(2);
    g.kw = kernel.extent(3);
    g.stride = stride;
    g.pad = padding;
    g.oh = conv_out_extent(g.h, g.kh, stride, padding);
    g.ow = conv_out_extent(g.w, g.kw, stride, padding);
    return g;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& kernel, std::size_t stride, std::size_t padding) {
    const ConvGeom g = conv_geometry(x, kernel, stride, padding);
    const std::size_t n = x.extent(0), f = kernel.extent(0);
    const std::size_t in_sz = g.c * g.h * g.w, out_sz = f * g.col_cols();

    std::vector<double> out(n * out_sz);
    std::vector<double> col(g.col_rows() * g.col_cols());
    for (std::size_t i = 0; i < n; ++i) {
        im2col(x.data().data() + i * in_sz, g, col.data());
        simd::gemm(false, false, f, g.col_cols(), g.col_rows(), 1.0, kernel.data().data(),
                   g.col_rows(), col.data(), g.col_cols(), 0.0, out.data() + i * out_sz,
                   g.col_cols());
    }

    auto backward = [g, n, f, in_sz, out_sz](detail::TensorImpl& self) {
        auto& px = parent(self, 0);
        auto& pk = parent(self, 1);
        std::vector<double> col(g.col_rows() * g.col_cols());
        std::vector<double> gcol(g.col_rows() * g.col_cols());
        for (std::size_t i = 0; i < n; ++i) {
            const double* gy = self.grad.data() + i * out_sz;
            im2col(px.data.data() + i * in_sz, g, col.data());
            // gW += gy * col^T
            simd::gemm(false, true, f, g.col_rows(), g.col_cols(), 1.0, gy, g.col_cols(), col.data(),
                       g.col_cols(), 1.0, pk.grad.data(), g.col_rows());
            // gcol = W^T * gy, then scatter back into gx
            simd::gemm(true, false, g.col_rows(), g.col_cols(), f, 1.0, pk.data.data(), g.col_rows(),
                       gy, g.col_cols(), 0.0, gcol.data(), g.col_cols());
            col2im(gcol.data(), g, px.grad.data() + i * in_sz);
        }
    };
    return Tensor::make_op("conv2d", {n, f, g.oh, g.ow}, std::move(out), {x, kernel}, backward);
}

Tensor deconv2d(const Tensor& x, const Tensor& kernel, std::size_t stride, std::size_t padding) {
    if (x.rank() != 4 || kernel.rank() != 4) {
        throw ShapeError("deconv2d: expected 4-d input and kernel, got " + shape_str(x.shape()) +
                         " and " + shape_str(kernel.shape()));
    }
    if (x.extent(1) != kernel.extent(0)) {
        throw ShapeError("deconv2d: input channels " + shape_str(x.shape()) +
                         " must match kernel filters " + shape_str(kernel.shape()));
    }
    const std::size_t n = x.extent(0), f = kernel.extent(0), c = kernel.extent(1);
    const std::size_t hin = x.extent(2), win = x.extent(3);
    const std::size_t kh = kernel.extent(2), kw = kernel.extent(3);
    if (stride == 0 || (hin - 1) * stride + kh <= 2 * padding || (win - 1) * stride + kw <= 2 * padding) {
        throw ConfigError("deconv2d: output extent is not positive");
    }
    // Geometry of the conv this op transposes: its input is our output.
    ConvGeom g;
    g.c = c;
    g.h = (hin - 1) * stride + kh - 2 * padding;
    g.w = (win - 1) * stride + kw - 2 * padding;
    g.kh = kh;
    g.kw = kw;
    g.stride = stride;
    g.pad = padding;
    g.oh = hin;
    g.ow = win;

    const std::size_t in_sz = f * hin * win, out_sz = c * g.h * g.w;
    std::vector<double> out(n * out_sz, 0.0);
    std::vector<double> col(g.col_rows() * g.col_cols());
    for (std::size_t i = 0; i < n; ++i) {
        // col = W^T * x_i, then scatter into the (larger) output image.
        simd::gemm(true, false, g.col_rows(), g.col_cols(), f, 1.0, kernel.data().data(),
                   g.col_rows(), x.data().data() + i * in_sz, g.col_cols(), 0.0, col.data(),
                   g.col_cols());
        col2im(col.data(), g, out.data() + i * out_sz);
    }

    auto backward = [g, n, f, in_sz, out_sz](detail::TensorImpl& self) {
        auto& px = parent(self, 0);
        auto& pk = parent(self, 1);
        std::vector<double> gcol(g.col_rows() * g.col_cols());
        for (std::size_t i = 0; i < n; ++i) {
            im2col(self.grad.data() + i * out_sz, g, gcol.data());
            // gx_i += W * im2col(gy_i)
            simd::gemm(false, false, f, g.col_cols(), g.col_rows(), 1.0, pk.data.data(),
                       g.col_rows(), gcol.data(), g.col_cols(), 1.0, px.grad.data() + i * in_sz,
                       g.col_cols());
            // gW += x_i * im2col(gy_i)^T  (shapes [f x s] * [s x ckk])
            simd::gemm(false, true, f, g.col_rows(), g.col_cols(), 1.0, px.data.data() + i * in_sz,
                       g.col_cols(), gcol.data(), g.col_cols(), 1.0, pk.grad.data(), g.col_rows());
        }
    };
    return Tensor::make_op("deconv2d", {n, c, g.h, g.w}, std::move(out), {x, kernel}, backward);
}

Tensor bce_with_logits(const Tensor& x, const Tensor& logits) {
    require_same_shape("bce_with_logits", x, logits);
    if (x.rank() < 1) throw ShapeError("bce_with_logits: scalar inputs unsupported");
    for (double v : x.data()) {
        if (v < 0.0 || v > 1.0 || !std::isfinite(v)) {
            throw DomainError("bce_with_logits: targets must lie in [0,1]");
        }
    }
    const std::size_t rows = x.extent(0);
    const double inv_rows = 1.0 / static_cast<double>(rows);
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double l = logits.data()[i];
        const double t = x.data()[i];
        total += std::max(l, 0.0) - l * t + std::log1p(std::exp(-std::fabs(l)));
    }
    std::vector<double> out{total * inv_rows};

    auto backward = [inv_rows](detail::TensorImpl& self) {
        auto& px = parent(self, 0);
        auto& pl = parent(self, 1);
        const double g = self.grad[0] * inv_rows;
        for (std::size_t i = 0; i < px.data.size(); ++i) {
            const double l = pl.data[i];
            const double s = l >= 0.0 ? 1.0 / (1.0 + std::exp(-l)) : std::exp(l) / (1.0 + std::exp(l));
            pl.grad[i] += g * (s - px.data[i]);
            px.grad[i] += g * (-l);
        }
    };
    return Tensor::make_op("bce_with_logits", {1}, std::move(out), {x, logits}, backward);
}

Tensor gaussian_nll(const Tensor& x, const Tensor& xhat, double sigma2, std::size_t dim) {
    require_same_shape("gaussian_nll", x, xhat);
    if (!(sigma2 > 0.0)) throw DomainError("gaussian_nll: sigma2 must be positive");
    const std::size_t rows = x.extent(0);
    const double inv = 1.0 / (2.0 * sigma2 * static_cast<double>(rows));
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = xhat.data()[i] - x.data()[i];
        ss += r * r;
    }
    const double d = static_cast<double>(dim);
    std::vector<double> out{ss * inv + d * std::log(std::sqrt(sigma2))};

    auto backward = [inv](detail::TensorImpl& self) {
        auto& px = parent(self, 0);
        auto& ph = parent(self, 1);
        const double g = self.grad[0] * 2.0 * inv;
        for (std::size_t i = 0; i < px.data.size(); ++i) {
            const double r = ph.data[i] - px.data[i];
            ph.grad[i] += g * r;
            px.grad[i] -= g * r;
        }
    };
    return Tensor::make_op("gaussian_nll", {1}, std::move(out), {x, xhat}, backward);
}

}  // namespace bvlab
