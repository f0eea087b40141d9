#include "vid/kernels.hpp"

#include <algorithm>
#include <cstring>

#include "vid/errors.hpp"

namespace vid {

Conv3dDims conv3d_dims(const std::vector<int>& x_shape, const std::vector<int>& w_shape,
                       std::array<int, 3> stride, std::array<int, 3> pad) {
    if (x_shape.size() != 5) throw ShapeError("conv3d: input must be N x C x T x H x W");
    if (w_shape.size() != 5) throw ShapeError("conv3d: weights must be Cout x Cin x Kt x Kh x Kw");
    Conv3dDims d{};
    d.n = x_shape[0];
    d.cin = x_shape[1];
    d.t = x_shape[2];
    d.h = x_shape[3];
    d.w = x_shape[4];
    d.cout = w_shape[0];
    d.kt = w_shape[2];
    d.kh = w_shape[3];
    d.kw = w_shape[4];
    if (w_shape[1] != d.cin) throw ShapeError("conv3d: input channels mismatch");
    d.st = stride[0];
    d.sh = stride[1];
    d.sw = stride[2];
    d.pt = pad[0];
    d.ph = pad[1];
    d.pw = pad[2];
    if (d.st < 1 || d.sh < 1 || d.sw < 1) throw ShapeError("conv3d: strides must be >= 1");
    if (d.pt < 0 || d.ph < 0 || d.pw < 0) throw ShapeError("conv3d: padding must be >= 0");
    d.to = (d.t + 2 * d.pt - d.kt) / d.st + 1;
    d.ho = (d.h + 2 * d.ph - d.kh) / d.sh + 1;
    d.wo = (d.w + 2 * d.pw - d.kw) / d.sw + 1;
    if (d.t + 2 * d.pt < d.kt || d.h + 2 * d.ph < d.kh || d.w + 2 * d.pw < d.kw)
        throw ShapeError("conv3d: kernel larger than padded input");
    return d;
}

namespace kernels {

namespace {

inline int lo_index(int pad, int k, int s) {
    const int a = pad - k;
    return a > 0 ? (a + s - 1) / s : 0;
}

inline int hi_index(int in, int pad, int k, int s, int out) {
    return std::min(out, (in - 1 - k + pad) / s + 1);
}

}  // namespace

void conv3d_forward(const double* x, const double* w, const double* b, double* y, const Conv3dDims& d) {
#pragma omp parallel for collapse(3) schedule(static)
    for (int n = 0; n < d.n; ++n) {
        for (int o = 0; o < d.cout; ++o) {
            for (int to = 0; to < d.to; ++to) {
                double* yslice =
                    y + ((static_cast<std::size_t>(n) * d.cout + o) * d.to + to) * d.ho * d.wo;
                const double bias = b ? b[o] : 0.0;
                for (int i = 0; i < d.ho * d.wo; ++i) yslice[i] = bias;

                for (int c = 0; c < d.cin; ++c) {
                    for (int kt = 0; kt < d.kt; ++kt) {
                        const int t = to * d.st + kt - d.pt;
                        if (t < 0 || t >= d.t) continue;
                        for (int kh = 0; kh < d.kh; ++kh) {
                            const int yo_lo = lo_index(d.ph, kh, d.sh);
                            const int yo_hi = hi_index(d.h, d.ph, kh, d.sh, d.ho);
                            const double* wrow =
                                w + ((static_cast<std::size_t>(o) * d.cin + c) * d.kt + kt) * d.kh * d.kw +
                                static_cast<std::size_t>(kh) * d.kw;
                            for (int yo = yo_lo; yo < yo_hi; ++yo) {
                                const int yy = yo * d.sh + kh - d.ph;
                                const double* xrow =
                                    x + ((static_cast<std::size_t>(n) * d.cin + c) * d.t + t) * d.h * d.w +
                                    static_cast<std::size_t>(yy) * d.w;
                                double* yrow = yslice + static_cast<std::size_t>(yo) * d.wo;
                                for (int kw = 0; kw < d.kw; ++kw) {
                                    const double wv = wrow[kw];
                                    if (wv == 0.0) continue;
                                    const int xo_lo = lo_index(d.pw, kw, d.sw);
                                    const int xo_hi = hi_index(d.w, d.pw, kw, d.sw, d.wo);
                                    const double* xs = xrow + kw - d.pw;
                                    for (int xo = xo_lo; xo < xo_hi; ++xo)
                                        yrow[xo] += wv * xs[static_cast<std::size_t>(xo) * d.sw];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

void conv3d_backward_input(const double* dy, const double* w, double* dx, const Conv3dDims& d) {
    std::memset(dx, 0, static_cast<std::size_t>(d.n) * d.cin * d.t * d.h * d.w * sizeof(double));
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < d.n; ++n) {
        for (int c = 0; c < d.cin; ++c) {
            double* dxs = dx + (static_cast<std::size_t>(n) * d.cin + c) * d.t * d.h * d.w;
            for (int o = 0; o < d.cout; ++o) {
                const double* dys = dy + (static_cast<std::size_t>(n) * d.cout + o) * d.to * d.ho * d.wo;
                const double* wbase = w + (static_cast<std::size_t>(o) * d.cin + c) * d.kt * d.kh * d.kw;
                for (int to = 0; to < d.to; ++to) {
                    for (int kt = 0; kt < d.kt; ++kt) {
                        const int t = to * d.st + kt - d.pt;
                        if (t < 0 || t >= d.t) continue;
                        for (int yo = 0; yo < d.ho; ++yo) {
                            for (int kh = 0; kh < d.kh; ++kh) {
                                const int yy = yo * d.sh + kh - d.ph;
                                if (yy < 0 || yy >= d.h) continue;
                                const double* dyrow =
                                    dys + (static_cast<std::size_t>(to) * d.ho + yo) * d.wo;
                                double* dxrow = dxs + (static_cast<std::size_t>(t) * d.h + yy) * d.w;
                                const double* wrow =
                                    wbase + (static_cast<std::size_t>(kt) * d.kh + kh) * d.kw;
                                for (int xo = 0; xo < d.wo; ++xo) {
                                    const double g = dyrow[xo];
                                    if (g == 0.0) continue;
                                    const int xbase = xo * d.sw - d.pw;
                                    const int kw_lo = std::max(0, -xbase);
                                    const int kw_hi = std::min(d.kw, d.w - xbase);
                                    for (int kw = kw_lo; kw < kw_hi; ++kw)
                                        dxrow[xbase + kw] += g * wrow[kw];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

void conv3d_backward_weights(const double* x, const double* dy, double* dw, double* db,
                             const Conv3dDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int o = 0; o < d.cout; ++o) {
        for (int c = 0; c < d.cin; ++c) {
            double* dwb = dw + (static_cast<std::size_t>(o) * d.cin + c) * d.kt * d.kh * d.kw;
            std::memset(dwb, 0, static_cast<std::size_t>(d.kt) * d.kh * d.kw * sizeof(double));
            for (int n = 0; n < d.n; ++n) {
                const double* dys = dy + (static_cast<std::size_t>(n) * d.cout + o) * d.to * d.ho * d.wo;
                const double* xs = x + (static_cast<std::size_t>(n) * d.cin + c) * d.t * d.h * d.w;
                for (int to = 0; to < d.to; ++to) {
                    for (int kt = 0; kt < d.kt; ++kt) {
                        const int t = to * d.st + kt - d.pt;
                        if (t < 0 || t >= d.t) continue;
                        for (int yo = 0; yo < d.ho; ++yo) {
                            for (int kh = 0; kh < d.kh; ++kh) {
                                const int yy = yo * d.sh + kh - d.ph;
                                if (yy < 0 || yy >= d.h) continue;
                                const double* dyrow =
                                    dys + (static_cast<std::size_t>(to) * d.ho + yo) * d.wo;
                                const double* xrow = xs + (static_cast<std::size_t>(t) * d.h + yy) * d.w;
                                double* dwrow = dwb + (static_cast<std::size_t>(kt) * d.kh + kh) * d.kw;
                                for (int xo = 0; xo < d.wo; ++xo) {
                                    const double g = dyrow[xo];
                                    if (g == 0.0) continue;
                                    const int xbase = xo * d.sw - d.pw;
                                    const int kw_lo = std::max(0, -xbase);
                                    const int kw_hi = std::min(d.kw, d.w - xbase);
                                    for (int kw = kw_lo; kw < kw_hi; ++kw)
                                        dwrow[kw] += g * xrow[xbase + kw];
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    if (db) {
#pragma omp parallel for schedule(static)
        for (int o = 0; o < d.cout; ++o) {
            double acc = 0.0;
            for (int n = 0; n < d.n; ++n) {
                const double* dys = dy + (static_cast<std::size_t>(n) * d.cout + o) * d.to * d.ho * d.wo;
                for (int i = 0; i < d.to * d.ho * d.wo; ++i) acc += dys[i];
            }
            db[o] = acc;
        }
    }
}

void affine_forward(const double* x, const double* w, const double* b, double* y, int n, int d, int m) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        double* yrow = y + static_cast<std::size_t>(i) * m;
        for (int j = 0; j < m; ++j) yrow[j] = b ? b[j] : 0.0;
        const double* xrow = x + static_cast<std::size_t>(i) * d;
        for (int k = 0; k < d; ++k) {
            const double xv = xrow[k];
            if (xv == 0.0) continue;
            const double* wrow = w + static_cast<std::size_t>(k) * m;
            for (int j = 0; j < m; ++j) yrow[j] += xv * wrow[j];
        }
    }
}

void affine_backward(const double* x, const double* w, const double* dy, double* dx, double* dw,
                     double* db, int n, int d, int m) {
    if (dx) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            const double* dyrow = dy + static_cast<std::size_t>(i) * m;
            double* dxrow = dx + static_cast<std::size_t>(i) * d;
            for (int k = 0; k < d; ++k) {
                const double* wrow = w + static_cast<std::size_t>(k) * m;
                double acc = 0.0;
                for (int j = 0; j < m; ++j) acc += dyrow[j] * wrow[j];
                dxrow[k] = acc;
            }
        }
    }
    if (dw) {
#pragma omp parallel for schedule(static)
        for (int k = 0; k < d; ++k) {
            double* dwrow = dw + static_cast<std::size_t>(k) * m;
            std::memset(dwrow, 0, static_cast<std::size_t>(m) * sizeof(double));
            for (int i = 0; i < n; ++i) {
                const double xv = x[static_cast<std::size_t>(i) * d + k];
                if (xv == 0.0) continue;
                const double* dyrow = dy + static_cast<std::size_t>(i) * m;
                for (int j = 0; j < m; ++j) dwrow[j] += xv * dyrow[j];
            }
        }
    }
    if (db) {
        std::memset(db, 0, static_cast<std::size_t>(m) * sizeof(double));
        for (int i = 0; i < n; ++i) {
            const double* dyrow = dy + static_cast<std::size_t>(i) * m;
            for (int j = 0; j < m; ++j) db[j] += dyrow[j];
        }
    }
}

}  // namespace kernels

}  // namespace vid
