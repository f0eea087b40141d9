#pragma once

#include <array>

#include "vid/tensor.hpp"

namespace vid {

// Geometry of one 3D cross-correlation. Input N x Cin x T x H x W, weights
// Cout x Cin x Kt x Kh x Kw, zero padding; output dims follow
// floor((in + 2p - k) / s) + 1.
struct Conv3dDims {
    int n, cin, t, h, w;
    int cout, kt, kh, kw;
    int st, sh, sw;
    int pt, ph, pw;
    int to, ho, wo;
};

Conv3dDims conv3d_dims(const std::vector<int>& x_shape, const std::vector<int>& w_shape,
                       std::array<int, 3> stride, std::array<int, 3> pad);

namespace kernels {

// OpenMP-parallel kernels. Each output element is produced by exactly one
// thread with a fixed serial accumulation order, so results are bit-identical
// for any thread count.
void conv3d_forward(const double* x, const double* w, const double* b, double* y, const Conv3dDims& d);
void conv3d_backward_input(const double* dy, const double* w, double* dx, const Conv3dDims& d);
void conv3d_backward_weights(const double* x, const double* dy, double* dw, double* db,
                             const Conv3dDims& d);

// y[n,m] = sum_d x[n,d] * w[d,m] + b[m]
void affine_forward(const double* x, const double* w, const double* b, double* y, int n, int d, int m);
void affine_backward(const double* x, const double* w, const double* dy, double* dx, double* dw,
                     double* db, int n, int d, int m);

namespace ref {

// Serial reference implementations (plain nested loops), kept as the oracle
// for the parallel kernels and for the benchmark baseline.
void conv3d_forward(const double* x, const double* w, const double* b, double* y, const Conv3dDims& d);
void conv3d_backward_input(const double* dy, const double* w, double* dx, const Conv3dDims& d);
void conv3d_backward_weights(const double* x, const double* dy, double* dw, double* db,
                             const Conv3dDims& d);

}  // namespace ref

}  // namespace kernels

}  // namespace vid
