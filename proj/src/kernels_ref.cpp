#include <cstring>

#include "vid/kernels.hpp"

namespace vid::kernels::ref {

namespace {

inline std::size_t xidx(const Conv3dDims& d, int n, int c, int t, int y, int x) {
    return (((static_cast<std::size_t>(n) * d.cin + c) * d.t + t) * d.h + y) * d.w + x;
}

inline std::size_t yidx(const Conv3dDims& d, int n, int o, int t, int y, int x) {
    return (((static_cast<std::size_t>(n) * d.cout + o) * d.to + t) * d.ho + y) * d.wo + x;
}

inline std::size_t widx(const Conv3dDims& d, int o, int c, int kt, int kh, int kw) {
    return (((static_cast<std::size_t>(o) * d.cin + c) * d.kt + kt) * d.kh + kh) * d.kw + kw;
}

}  // namespace

void conv3d_forward(const double* x, const double* w, const double* b, double* y, const Conv3dDims& d) {
    for (int n = 0; n < d.n; ++n)
        for (int o = 0; o < d.cout; ++o)
            for (int to = 0; to < d.to; ++to)
                for (int yo = 0; yo < d.ho; ++yo)
                    for (int xo = 0; xo < d.wo; ++xo) {
                        double acc = b ? b[o] : 0.0;
                        for (int c = 0; c < d.cin; ++c)
                            for (int kt = 0; kt < d.kt; ++kt)
                                for (int kh = 0; kh < d.kh; ++kh)
                                    for (int kw = 0; kw < d.kw; ++kw) {
                                        const int t = to * d.st + kt - d.pt;
                                        const int yy = yo * d.sh + kh - d.ph;
                                        const int xx = xo * d.sw + kw - d.pw;
                                        if (t < 0 || t >= d.t || yy < 0 || yy >= d.h || xx < 0 ||
                                            xx >= d.w)
                                            continue;
                                        acc += x[xidx(d, n, c, t, yy, xx)] * w[widx(d, o, c, kt, kh, kw)];
                                    }
                        y[yidx(d, n, o, to, yo, xo)] = acc;
                    }
}

void conv3d_backward_input(const double* dy, const double* w, double* dx, const Conv3dDims& d) {
    std::memset(dx, 0, static_cast<std::size_t>(d.n) * d.cin * d.t * d.h * d.w * sizeof(double));
    for (int n = 0; n < d.n; ++n)
        for (int o = 0; o < d.cout; ++o)
            for (int to = 0; to < d.to; ++to)
                for (int yo = 0; yo < d.ho; ++yo)
                    for (int xo = 0; xo < d.wo; ++xo) {
                        const double g = dy[yidx(d, n, o, to, yo, xo)];
                        for (int c = 0; c < d.cin; ++c)
                            for (int kt = 0; kt < d.kt; ++kt)
                                for (int kh = 0; kh < d.kh; ++kh)
                                    for (int kw = 0; kw < d.kw; ++kw) {
                                        const int t = to * d.st + kt - d.pt;
                                        const int yy = yo * d.sh + kh - d.ph;
                                        const int xx = xo * d.sw + kw - d.pw;
                                        if (t < 0 || t >= d.t || yy < 0 || yy >= d.h || xx < 0 ||
                                            xx >= d.w)
                                            continue;
                                        dx[xidx(d, n, c, t, yy, xx)] += g * w[widx(d, o, c, kt, kh, kw)];
                                    }
                    }
}

void conv3d_backward_weights(const double* x, const double* dy, double* dw, double* db,
                             const Conv3dDims& d) {
    std::memset(dw, 0, static_cast<std::size_t>(d.cout) * d.cin * d.kt * d.kh * d.kw * sizeof(double));
    if (db) std::memset(db, 0, static_cast<std::size_t>(d.cout) * sizeof(double));
    for (int n = 0; n < d.n; ++n)
        for (int o = 0; o < d.cout; ++o)
            for (int to = 0; to < d.to; ++to)
                for (int yo = 0; yo < d.ho; ++yo)
                    for (int xo = 0; xo < d.wo; ++xo) {
                        const double g = dy[yidx(d, n, o, to, yo, xo)];
                        if (db) db[o] += g;
                        for (int c = 0; c < d.cin; ++c)
                            for (int kt = 0; kt < d.kt; ++kt)
                                for (int kh = 0; kh < d.kh; ++kh)
                                    for (int kw = 0; kw < d.kw; ++kw) {
                                        const int t = to * d.st + kt - d.pt;
                                        const int yy = yo * d.sh + kh - d.ph;
                                        const int xx = xo * d.sw + kw - d.pw;
                                        if (t < 0 || t >= d.t || yy < 0 || yy >= d.h || xx < 0 ||
                                            xx >= d.w)
                                            continue;
                                        dw[widx(d, o, c, kt, kh, kw)] += g * x[xidx(d, n, c, t, yy, xx)];
                                    }
                    }
}

}  // namespace vid::kernels::ref
