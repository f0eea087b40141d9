// Timing comparison of the OpenMP conv3d kernels against the serial reference
// implementation, with a max-|diff| agreement check on every case.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "vid/kernels.hpp"
#include "vid/rng.hpp"
#include "vid/threads.hpp"

using h_clock = std::chrono::high_resolution_clock;

namespace {

double ms_since(h_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(h_clock::now() - t0).count();
}

struct Case {
    const char* name;
    std::vector<int> x_shape;
    std::vector<int> w_shape;
    std::array<int, 3> stride;
    std::array<int, 3> pad;
};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace

int main() {
    vid::apply_worker_threads();
    std::printf("threads: %d\n", vid::worker_threads());

    const std::vector<Case> cases = {
        {"stage1 16x1x8x32x32 -> 8ch", {16, 1, 8, 32, 32}, {8, 1, 3, 3, 3}, {1, 2, 2}, {1, 1, 1}},
        {"stage2 16x8x8x16x16 -> 16ch", {16, 8, 8, 16, 16}, {16, 8, 3, 3, 3}, {2, 2, 2}, {1, 1, 1}},
        {"stage3 16x16x4x8x8 -> 32ch", {16, 16, 4, 8, 8}, {32, 16, 3, 3, 3}, {2, 2, 2}, {1, 1, 1}},
    };

    vid::RngStream rng(7);
    for (const auto& c : cases) {
        const auto d = vid::conv3d_dims(c.x_shape, c.w_shape, c.stride, c.pad);
        const vid::Tensor x = vid::Tensor::uniform(c.x_shape, 1.0, rng);
        const vid::Tensor w = vid::Tensor::uniform(c.w_shape, 1.0, rng);
        const vid::Tensor b = vid::Tensor::uniform({d.cout}, 1.0, rng);
        const std::size_t out_n = static_cast<std::size_t>(d.n) * d.cout * d.to * d.ho * d.wo;
        std::vector<double> y_omp(out_n), y_ref(out_n);

        const double flops = 2.0 * static_cast<double>(out_n) * d.cin * d.kt * d.kh * d.kw;
        const int reps = 20;

        auto t0 = h_clock::now();
        for (int r = 0; r < reps; ++r)
            vid::kernels::conv3d_forward(x.data.data(), w.data.data(), b.data.data(), y_omp.data(), d);
        const double omp_ms = ms_since(t0) / reps;

        t0 = h_clock::now();
        for (int r = 0; r < reps; ++r)
            vid::kernels::ref::conv3d_forward(x.data.data(), w.data.data(), b.data.data(), y_ref.data(),
                                              d);
        const double ref_ms = ms_since(t0) / reps;

        std::printf("%-30s omp %8.3f ms (%6.2f GFLOP/s) | ref %8.3f ms (%6.2f GFLOP/s) | x%.2f | max diff %.2e\n",
                    c.name, omp_ms, flops / omp_ms * 1e-6, ref_ms, flops / ref_ms * 1e-6,
                    ref_ms / omp_ms, max_abs_diff(y_omp, y_ref));

        // backward kernels, same comparison
        vid::RngStream grng(11);
        const vid::Tensor dy = vid::Tensor::uniform({d.n, d.cout, d.to, d.ho, d.wo}, 1.0, grng);
        std::vector<double> dx_omp(x.data.size()), dx_ref(x.data.size());
        std::vector<double> dw_omp(w.data.size()), dw_ref(w.data.size());
        std::vector<double> db_omp(static_cast<std::size_t>(d.cout)), db_ref(static_cast<std::size_t>(d.cout));

        t0 = h_clock::now();
        for (int r = 0; r < reps; ++r) {
            vid::kernels::conv3d_backward_input(dy.data.data(), w.data.data(), dx_omp.data(), d);
            vid::kernels::conv3d_backward_weights(x.data.data(), dy.data.data(), dw_omp.data(),
                                                  db_omp.data(), d);
        }
        const double bw_omp_ms = ms_since(t0) / reps;

        t0 = h_clock::now();
        for (int r = 0; r < reps; ++r) {
            vid::kernels::ref::conv3d_backward_input(dy.data.data(), w.data.data(), dx_ref.data(), d);
            vid::kernels::ref::conv3d_backward_weights(x.data.data(), dy.data.data(), dw_ref.data(),
                                                       db_ref.data(), d);
        }
        const double bw_ref_ms = ms_since(t0) / reps;

        const double bw_diff = std::max({max_abs_diff(dx_omp, dx_ref), max_abs_diff(dw_omp, dw_ref),
                                         max_abs_diff(db_omp, db_ref)});
        std::printf("%-30s omp %8.3f ms | ref %8.3f ms | x%.2f | max diff %.2e (backward)\n", "",
                    bw_omp_ms, bw_ref_ms, bw_ref_ms / bw_omp_ms, bw_diff);
    }
    return 0;
}
