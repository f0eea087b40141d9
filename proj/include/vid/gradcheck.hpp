#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vid/graph.hpp"

namespace vid {

struct GradCheckResult {
    std::string op;
    double max_rel_err = 0.0;
    double tol = 1e-4;
    bool pass = false;
};

// Central finite differences (eps = 1e-5) against the analytic backward pass
// for every primitive op, plus directional checks through a small
// encoder+heads+total-loss composite (tol 1e-3).
std::vector<GradCheckResult> run_grad_checks(std::uint64_t seed);

// Max relative FD error over every element of every input tensor.
// The builder receives one graph node per input, in order, and must return a
// scalar node.
double finite_diff_max_rel_err(
    const std::vector<Tensor>& inputs,
    const std::function<NodeRef(Graph&, const std::vector<NodeRef>&)>& builder, double eps = 1e-5);

}  // namespace vid
