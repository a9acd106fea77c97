#pragma once

#include "dipfill/tensor.hpp"

namespace dipfill {

enum class Padding { zero, reflect };

// Elementwise and reduction primitives.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double k);
Tensor sum(const Tensor& a);

// Border padding on a C×H×W tensor. Reflection excludes the border pixel
// (reflect-101, matching the usual image-restoration convention).
Tensor pad2d(const Tensor& x, int pad, Padding mode);

// Strided 2-D cross-correlation (no kernel flip) over C×H×W input with
// C_out×C_in×kh×kw weights. Output H' = floor((H + 2*pad - kh)/stride) + 1.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride = 1, Padding padding = Padding::reflect, int pad = 0);

Tensor leaky_relu(const Tensor& x, double slope);
Tensor sigmoid(const Tensor& x);

// Nearest-neighbour upsampling by an integer factor; backward sums the
// gradient over each factor×factor block.
Tensor upsample_nearest(const Tensor& x, int factor);

// Per-channel normalization with statistics over the current H·W values
// (single image, batch of 1): y = gamma*(x - mean)/sqrt(var + eps) + beta.
Tensor channel_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);

Tensor concat_channels(const Tensor& a, const Tensor& b);
Tensor slice_channels(const Tensor& x, int first, int count);

// Mean squared error over mask==1 pixels only:
// sum(mask*(pred-target)^2) / sum(mask).
Tensor masked_mse(const Tensor& pred, const Tensor& target, const Tensor& mask);

}  // namespace dipfill
