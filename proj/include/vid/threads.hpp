#pragma once

namespace vid {

// Number of OpenMP worker threads to use. Respects the VID_THREADS environment
// variable as an upper cap; `override_threads > 0` takes precedence over both.
int worker_threads(int override_threads = 0);

// Pin the OpenMP thread count for subsequent parallel regions.
void apply_worker_threads(int override_threads = 0);

}  // namespace vid
