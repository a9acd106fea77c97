#include "dipfill/ops.hpp"

#include <cmath>
#include <cstring>
#include <utility>

#include "dipfill/errors.hpp"

namespace dipfill {

namespace {

using NodePtr = std::shared_ptr<TensorNode>;

Tensor make_op(const char* op, std::vector<int> shape, std::vector<double> values,
               std::vector<NodePtr> parents, std::function<void(TensorNode&)> bwd) {
    auto n = std::make_shared<TensorNode>();
    n->shape = std::move(shape);
    n->values = std::move(values);
    n->parents = std::move(parents);
    n->op = op;
    for (const auto& p : n->parents) {
        if (p->requires_grad) {
            n->requires_grad = true;
            break;
        }
    }
    if (n->requires_grad) n->backward_fn = std::move(bwd);
    return Tensor(n);
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    }
}

void require_rank3(const char* op, const Tensor& t) {
    if (t.shape().size() != 3) {
        throw DimensionError(std::string(op) + ": expected C×H×W tensor, got " +
                             shape_str(t.shape()));
    }
}

// y += a*x, the only hot loop in the engine. Per-element summation order is
// the loop order of the caller, which is fixed.
inline void axpy(double a, const double* __restrict x, double* __restrict y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// Mirror index around the borders without repeating them (reflect-101).
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int m = 2 * n - 2;
    i %= m;
    if (i < 0) i += m;
    return i < n ? i : m - i;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape("add", a, b);
    std::vector<double> out(a.size());
    const double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = pa[i] + pb[i];
    return make_op("add", a.shape(), std::move(out), {a.node(), b.node()}, [](TensorNode& self) {
        for (int k = 0; k < 2; ++k) {
            auto& p = *self.parents[k];
            if (!p.requires_grad) continue;
            auto& g = p.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape("mul", a, b);
    std::vector<double> out(a.size());
    const double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = pa[i] * pb[i];
    return make_op("mul", a.shape(), std::move(out), {a.node(), b.node()}, [](TensorNode& self) {
        auto& a_ = *self.parents[0];
        auto& b_ = *self.parents[1];
        if (a_.requires_grad) {
            auto& g = a_.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * b_.values[i];
        }
        if (b_.requires_grad) {
            auto& g = b_.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * a_.values[i];
        }
    });
}

Tensor scale(const Tensor& a, double k) {
    std::vector<double> out(a.size());
    const double* pa = a.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = k * pa[i];
    return make_op("scale", a.shape(), std::move(out), {a.node()}, [k](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += k * self.grad[i];
    });
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    const double* pa = a.data();
    for (std::size_t i = 0; i < a.size(); ++i) s += pa[i];
    return make_op("sum", {1}, {s}, {a.node()}, [](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        auto& g = p.ensure_grad();
        const double go = self.grad[0];
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += go;
    });
}

Tensor pad2d(const Tensor& x, int pad, Padding mode) {
    require_rank3("pad2d", x);
    if (pad < 0) throw ConfigError("pad2d: pad must be non-negative");
    if (pad == 0) return x;
    const int C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
    const int Hp = H + 2 * pad, Wp = W + 2 * pad;
    std::vector<double> out(static_cast<std::size_t>(C) * Hp * Wp, 0.0);
    const double* in = x.data();
    for (int c = 0; c < C; ++c) {
        for (int y = 0; y < Hp; ++y) {
            const int sy = mode == Padding::reflect ? reflect_index(y - pad, H) : y - pad;
            if (mode == Padding::zero && (sy < 0 || sy >= H)) continue;
            for (int xq = 0; xq < Wp; ++xq) {
                const int sx = mode == Padding::reflect ? reflect_index(xq - pad, W) : xq - pad;
                if (mode == Padding::zero && (sx < 0 || sx >= W)) continue;
                out[(static_cast<std::size_t>(c) * Hp + y) * Wp + xq] =
                    in[(static_cast<std::size_t>(c) * H + sy) * W + sx];
            }
        }
    }
    return make_op("pad2d", {C, Hp, Wp}, std::move(out), {x.node()},
                   [pad, mode, C, H, W, Hp, Wp](TensorNode& self) {
                       auto& p = *self.parents[0];
                       if (!p.requires_grad) return;
                       auto& g = p.ensure_grad();
                       for (int c = 0; c < C; ++c) {
                           for (int y = 0; y < Hp; ++y) {
                               const int sy = mode == Padding::reflect ? reflect_index(y - pad, H)
                                                                       : y - pad;
                               if (mode == Padding::zero && (sy < 0 || sy >= H)) continue;
                               for (int xq = 0; xq < Wp; ++xq) {
                                   const int sx = mode == Padding::reflect
                                                      ? reflect_index(xq - pad, W)
                                                      : xq - pad;
                                   if (mode == Padding::zero && (sx < 0 || sx >= W)) continue;
                                   g[(static_cast<std::size_t>(c) * H + sy) * W + sx] +=
                                       self.grad[(static_cast<std::size_t>(c) * Hp + y) * Wp + xq];
                               }
                           }
                       }
                   });
}

namespace {

struct ConvDims {
    int Ci, Hp, Wp;        // padded input
    int Co, kh, kw;        // kernel
    int Ho, Wo, stride;    // output
    std::size_t K() const { return static_cast<std::size_t>(Ci) * kh * kw; }
    std::size_t N() const { return static_cast<std::size_t>(Ho) * Wo; }
};

// Conv scratch is reused across calls (grow-only) so the hot loop does not
// hit the allocator with multi-megabyte buffers every iteration.
std::vector<double>& scratch(int which, std::size_t n) {
    thread_local std::vector<double> bufs[3];
    auto& b = bufs[which];
    if (b.size() < n) b.resize(n);
    return b;
}

// Patch-major layout col[K][N]; one row per (ci, ki, kj).
void im2col(const double* in, const ConvDims& d, std::vector<double>& col) {
    std::size_t row = 0;
    for (int ci = 0; ci < d.Ci; ++ci) {
        for (int ki = 0; ki < d.kh; ++ki) {
            for (int kj = 0; kj < d.kw; ++kj, ++row) {
                double* dst = col.data() + row * d.N();
                for (int oy = 0; oy < d.Ho; ++oy) {
                    const double* src =
                        in + (static_cast<std::size_t>(ci) * d.Hp + oy * d.stride + ki) * d.Wp + kj;
                    if (d.stride == 1) {
                        std::memcpy(dst, src, sizeof(double) * d.Wo);
                        dst += d.Wo;
                    } else {
                        for (int ox = 0; ox < d.Wo; ++ox) *dst++ = src[ox * d.stride];
                    }
                }
            }
        }
    }
}

// Scatter-add of dcol[K][N] back onto the padded-input gradient.
void col2im_add(const std::vector<double>& dcol, const ConvDims& d, double* gin) {
    std::size_t row = 0;
    for (int ci = 0; ci < d.Ci; ++ci) {
        for (int ki = 0; ki < d.kh; ++ki) {
            for (int kj = 0; kj < d.kw; ++kj, ++row) {
                const double* src = dcol.data() + row * d.N();
                for (int oy = 0; oy < d.Ho; ++oy) {
                    double* dst =
                        gin + (static_cast<std::size_t>(ci) * d.Hp + oy * d.stride + ki) * d.Wp + kj;
                    for (int ox = 0; ox < d.Wo; ++ox) dst[ox * d.stride] += src[oy * d.Wo + ox];
                }
            }
        }
    }
}

// Valid strided cross-correlation on an already padded input.
Tensor conv2d_core(const Tensor& padded, const Tensor& weight, const Tensor& bias, int stride) {
    const int Ci = padded.shape()[0], Hp = padded.shape()[1], Wp = padded.shape()[2];
    const int Co = weight.shape()[0], kh = weight.shape()[2], kw = weight.shape()[3];
    const int Ho = (Hp - kh) / stride + 1;
    const int Wo = (Wp - kw) / stride + 1;
    ConvDims d{Ci, Hp, Wp, Co, kh, kw, Ho, Wo, stride};
    const std::size_t K = d.K(), N = d.N();

    std::vector<double>& col = scratch(0, K * N);
    im2col(padded.data(), d, col);

    // Blocked over output channels and pixel tiles so each col row is
    // streamed once per block instead of once per channel. The per-element
    // operation order (bias, then kk ascending) is unchanged, so results
    // are bit-identical to the flat loop.
    constexpr std::size_t kTile = 512;
    constexpr int kBlock = 8;
    std::vector<double> out(static_cast<std::size_t>(Co) * N);
    const double* w = weight.data();
    const double* b = bias.data();
    for (std::size_t n0 = 0; n0 < N; n0 += kTile) {
        const std::size_t nt = std::min(kTile, N - n0);
        for (int co0 = 0; co0 < Co; co0 += kBlock) {
            const int ce = std::min(co0 + kBlock, Co);
            for (int co = co0; co < ce; ++co) {
                double* yrow = out.data() + static_cast<std::size_t>(co) * N + n0;
                std::fill(yrow, yrow + nt, b[co]);
            }
            for (std::size_t kk = 0; kk < K; ++kk) {
                const double* crow = col.data() + kk * N + n0;
                for (int co = co0; co < ce; ++co) {
                    axpy(w[static_cast<std::size_t>(co) * K + kk], crow,
                         out.data() + static_cast<std::size_t>(co) * N + n0, nt);
                }
            }
        }
    }

    return make_op("conv2d", {Co, Ho, Wo}, std::move(out),
                   {padded.node(), weight.node(), bias.node()}, [d](TensorNode& self) {
                       auto& in_ = *self.parents[0];
                       auto& w_ = *self.parents[1];
                       auto& b_ = *self.parents[2];
                       const std::size_t K = d.K(), N = d.N();
                       const double* gy = self.grad.data();

                       if (b_.requires_grad) {
                           auto& gb = b_.ensure_grad();
                           for (int co = 0; co < d.Co; ++co) {
                               double s = 0.0;
                               const double* row = gy + static_cast<std::size_t>(co) * N;
                               for (std::size_t n = 0; n < N; ++n) s += row[n];
                               gb[co] += s;
                           }
                       }

                       if (w_.requires_grad) {
                           // dW[co][kk] = sum_n gy[co][n] * col[kk][n]; run it as
                           // axpy over kk with a transposed col so n stays the
                           // (fixed) summation order.
                           std::vector<double>& col = scratch(0, K * N);
                           im2col(in_.values.data(), d, col);
                           std::vector<double>& colT = scratch(1, N * K);
                           for (std::size_t kk = 0; kk < K; ++kk)
                               for (std::size_t n = 0; n < N; ++n)
                                   colT[n * K + kk] = col[kk * N + n];
                           auto& gw = w_.ensure_grad();
                           constexpr int kBlock = 8;
                           for (int co0 = 0; co0 < d.Co; co0 += kBlock) {
                               const int ce = std::min(co0 + kBlock, d.Co);
                               for (std::size_t n = 0; n < N; ++n) {
                                   const double* crow = colT.data() + n * K;
                                   for (int co = co0; co < ce; ++co) {
                                       axpy(gy[static_cast<std::size_t>(co) * N + n], crow,
                                            gw.data() + static_cast<std::size_t>(co) * K, K);
                                   }
                               }
                           }
                       }

                       if (in_.requires_grad) {
                           std::vector<double>& dcol = scratch(2, K * N);
                           std::fill(dcol.begin(), dcol.begin() + K * N, 0.0);
                           const double* w = w_.values.data();
                           constexpr std::size_t kTile = 512;
                           constexpr std::size_t kBlock = 8;
                           for (std::size_t n0 = 0; n0 < N; n0 += kTile) {
                               const std::size_t nt = std::min(kTile, N - n0);
                               for (std::size_t kk0 = 0; kk0 < K; kk0 += kBlock) {
                                   const std::size_t ke = std::min(kk0 + kBlock, K);
                                   for (int co = 0; co < d.Co; ++co) {
                                       const double* gyrow =
                                           gy + static_cast<std::size_t>(co) * N + n0;
                                       const double* wrow = w + static_cast<std::size_t>(co) * K;
                                       for (std::size_t kk = kk0; kk < ke; ++kk)
                                           axpy(wrow[kk], gyrow, dcol.data() + kk * N + n0, nt);
                                   }
                               }
                           }
                           col2im_add(dcol, d, in_.ensure_grad().data());
                       }
                   });
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              Padding padding, int pad) {
    require_rank3("conv2d", input);
    if (weight.shape().size() != 4) {
        throw DimensionError("conv2d: expected C_out×C_in×kh×kw weight, got " +
                             shape_str(weight.shape()));
    }
    if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
    if (pad < 0) throw ConfigError("conv2d: pad must be >= 0");
    const int Ci = input.shape()[0];
    if (weight.shape()[1] != Ci) {
        throw DimensionError("conv2d: input has " + std::to_string(Ci) +
                             " channels but weight expects " + std::to_string(weight.shape()[1]));
    }
    const int Co = weight.shape()[0];
    if (bias.shape() != std::vector<int>{Co}) {
        throw DimensionError("conv2d: bias shape " + shape_str(bias.shape()) +
                             " does not match " + std::to_string(Co) + " output channels");
    }
    const int kh = weight.shape()[2], kw = weight.shape()[3];
    const int H = input.shape()[1], W = input.shape()[2];
    if (H + 2 * pad < kh || W + 2 * pad < kw) {
        throw DimensionError("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                             " larger than padded input " + std::to_string(H + 2 * pad) + "x" +
                             std::to_string(W + 2 * pad));
    }
    Tensor padded = pad == 0 ? input : pad2d(input, pad, padding);
    return conv2d_core(padded, weight, bias, stride);
}

Tensor leaky_relu(const Tensor& x, double slope) {
    if (!(slope > 0.0 && slope < 1.0)) throw ConfigError("leaky_relu: slope must be in (0,1)");
    std::vector<double> out(x.size());
    const double* px = x.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = px[i] >= 0.0 ? px[i] : slope * px[i];
    return make_op("leaky_relu", x.shape(), std::move(out), {x.node()}, [slope](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        auto& g = p.ensure_grad();
        // derivative at exactly 0 takes the positive branch
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] += self.grad[i] * (p.values[i] >= 0.0 ? 1.0 : slope);
    });
}

Tensor sigmoid(const Tensor& x) {
    std::vector<double> out(x.size());
    const double* px = x.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = px[i];
        out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    return make_op("sigmoid", x.shape(), std::move(out), {x.node()}, [](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double y = self.values[i];
            g[i] += self.grad[i] * y * (1.0 - y);
        }
    });
}

Tensor upsample_nearest(const Tensor& x, int factor) {
    require_rank3("upsample_nearest", x);
    if (factor < 1) throw ConfigError("upsample_nearest: factor must be >= 1");
    if (factor == 1) return x;
    const int C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
    const int Ho = H * factor, Wo = W * factor;
    std::vector<double> out(static_cast<std::size_t>(C) * Ho * Wo);
    const double* in = x.data();
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < Ho; ++y) {
            const double* src = in + (static_cast<std::size_t>(c) * H + y / factor) * W;
            double* dst = out.data() + (static_cast<std::size_t>(c) * Ho + y) * Wo;
            for (int xq = 0; xq < Wo; ++xq) dst[xq] = src[xq / factor];
        }
    return make_op("upsample_nearest", {C, Ho, Wo}, std::move(out), {x.node()},
                   [factor, C, H, W, Ho, Wo](TensorNode& self) {
                       auto& p = *self.parents[0];
                       if (!p.requires_grad) return;
                       auto& g = p.ensure_grad();
                       for (int c = 0; c < C; ++c)
                           for (int y = 0; y < Ho; ++y) {
                               const double* src =
                                   self.grad.data() + (static_cast<std::size_t>(c) * Ho + y) * Wo;
                               double* dst = g.data() + (static_cast<std::size_t>(c) * H + y / factor) * W;
                               for (int xq = 0; xq < Wo; ++xq) dst[xq / factor] += src[xq];
                           }
                   });
}

Tensor channel_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    require_rank3("channel_norm", x);
    const int C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
    if (gamma.shape() != std::vector<int>{C} || beta.shape() != std::vector<int>{C}) {
        throw DimensionError("channel_norm: gamma/beta must have shape [" + std::to_string(C) + "]");
    }
    if (eps < 0.0) throw ConfigError("channel_norm: eps must be >= 0");
    const std::size_t N = static_cast<std::size_t>(H) * W;
    std::vector<double> out(x.size());
    std::vector<double> means(C), invs(C);
    const double* px = x.data();
    const double* pg = gamma.data();
    const double* pb = beta.data();
    for (int c = 0; c < C; ++c) {
        const double* ch = px + c * N;
        double mean = 0.0;
        for (std::size_t i = 0; i < N; ++i) mean += ch[i];
        mean /= static_cast<double>(N);
        double var = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double dvi = ch[i] - mean;
            var += dvi * dvi;
        }
        var /= static_cast<double>(N);
        const double denom = std::sqrt(var + eps);
        const double inv = denom > 0.0 ? 1.0 / denom : 0.0;  // constant channel, eps 0
        means[c] = mean;
        invs[c] = inv;
        double* oc = out.data() + c * N;
        for (std::size_t i = 0; i < N; ++i) oc[i] = pg[c] * (ch[i] - mean) * inv + pb[c];
    }
    return make_op(
        "channel_norm", x.shape(), std::move(out), {x.node(), gamma.node(), beta.node()},
        [C, N, means = std::move(means), invs = std::move(invs)](TensorNode& self) {
            auto& x_ = *self.parents[0];
            auto& g_ = *self.parents[1];
            auto& b_ = *self.parents[2];
            for (int c = 0; c < C; ++c) {
                const double* xc = x_.values.data() + c * N;
                const double* gyc = self.grad.data() + c * N;
                const double mean = means[c], inv = invs[c];
                const double gamma_c = g_.values[c];
                // accumulate the channel sums once; reused by all three grads
                double sum_gy = 0.0, sum_gy_xhat = 0.0;
                for (std::size_t i = 0; i < N; ++i) {
                    const double xhat = (xc[i] - mean) * inv;
                    sum_gy += gyc[i];
                    sum_gy_xhat += gyc[i] * xhat;
                }
                if (g_.requires_grad) g_.ensure_grad()[c] += sum_gy_xhat;
                if (b_.requires_grad) b_.ensure_grad()[c] += sum_gy;
                if (x_.requires_grad) {
                    auto& gx = x_.ensure_grad();
                    const double mean_gy = sum_gy / static_cast<double>(N);
                    const double mean_gy_xhat = sum_gy_xhat / static_cast<double>(N);
                    double* gxc = gx.data() + c * N;
                    for (std::size_t i = 0; i < N; ++i) {
                        const double xhat = (xc[i] - mean) * inv;
                        gxc[i] += gamma_c * inv * (gyc[i] - mean_gy - xhat * mean_gy_xhat);
                    }
                }
            }
        });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    require_rank3("concat_channels", a);
    require_rank3("concat_channels", b);
    if (a.shape()[1] != b.shape()[1] || a.shape()[2] != b.shape()[2]) {
        throw DimensionError("concat_channels: spatial mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
    const int Ca = a.shape()[0], Cb = b.shape()[0];
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.values().begin(), a.values().end());
    out.insert(out.end(), b.values().begin(), b.values().end());
    return make_op("concat_channels", {Ca + Cb, a.shape()[1], a.shape()[2]}, std::move(out),
                   {a.node(), b.node()}, [](TensorNode& self) {
                       auto& a_ = *self.parents[0];
                       auto& b_ = *self.parents[1];
                       const std::size_t na = a_.values.size();
                       if (a_.requires_grad) {
                           auto& g = a_.ensure_grad();
                           for (std::size_t i = 0; i < na; ++i) g[i] += self.grad[i];
                       }
                       if (b_.requires_grad) {
                           auto& g = b_.ensure_grad();
                           for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[na + i];
                       }
                   });
}

Tensor slice_channels(const Tensor& x, int first, int count) {
    require_rank3("slice_channels", x);
    const int C = x.shape()[0];
    if (first < 0 || count < 1 || first + count > C) {
        throw DimensionError("slice_channels: range [" + std::to_string(first) + ", " +
                             std::to_string(first + count) + ") out of " + std::to_string(C) +
                             " channels");
    }
    const std::size_t N = static_cast<std::size_t>(x.shape()[1]) * x.shape()[2];
    std::vector<double> out(x.values().begin() + first * N,
                            x.values().begin() + (first + count) * N);
    return make_op("slice_channels", {count, x.shape()[1], x.shape()[2]}, std::move(out),
                   {x.node()}, [first, N](TensorNode& self) {
                       auto& p = *self.parents[0];
                       if (!p.requires_grad) return;
                       auto& g = p.ensure_grad();
                       for (std::size_t i = 0; i < self.grad.size(); ++i)
                           g[first * N + i] += self.grad[i];
                   });
}

Tensor masked_mse(const Tensor& pred, const Tensor& target, const Tensor& mask) {
    require_same_shape("masked_mse", pred, target);
    require_same_shape("masked_mse", pred, mask);
    const double* pp = pred.data();
    const double* pt = target.data();
    const double* pm = mask.data();
    double count = 0.0, loss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) count += pm[i];
    if (count == 0.0) throw DegenerateError("masked_mse: mask has no observed pixels");
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double r = pp[i] - pt[i];
        loss += pm[i] * r * r;
    }
    loss /= count;
    return make_op("masked_mse", {1}, {loss}, {pred.node(), target.node(), mask.node()},
                   [count](TensorNode& self) {
                       auto& p_ = *self.parents[0];
                       auto& t_ = *self.parents[1];
                       auto& m_ = *self.parents[2];
                       const double coeff = self.grad[0] * 2.0 / count;
                       if (p_.requires_grad) {
                           auto& g = p_.ensure_grad();
                           for (std::size_t i = 0; i < g.size(); ++i)
                               g[i] += coeff * m_.values[i] * (p_.values[i] - t_.values[i]);
                       }
                       if (t_.requires_grad) {
                           auto& g = t_.ensure_grad();
                           for (std::size_t i = 0; i < g.size(); ++i)
                               g[i] -= coeff * m_.values[i] * (p_.values[i] - t_.values[i]);
                       }
                   });
}

}  // namespace dipfill
