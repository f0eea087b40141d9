#include "vid/threads.hpp"

#include <algorithm>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vid {

int worker_threads(int override_threads) {
    if (override_threads > 0) return override_threads;
#ifdef _OPENMP
    int n = omp_get_max_threads();
#else
    int n = 1;
#endif
    if (const char* cap = std::getenv("VID_THREADS")) {
        const int c = std::atoi(cap);
        if (c > 0) n = std::min(n, c);
    }
    return std::max(1, n);
}

void apply_worker_threads(int override_threads) {
#ifdef _OPENMP
    omp_set_num_threads(worker_threads(override_threads));
#else
    (void)override_threads;
#endif
}

}  // namespace vid
