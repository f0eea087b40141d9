#pragma once

#include <array>
#include <functional>
#include <vector>

#include "vid/tensor.hpp"

namespace vid {

struct NodeRef {
    int id = -1;
};

// Reverse-mode tape. Nodes are appended in construction order, which is a
// topological order by construction, so backward() is a single reverse sweep
// that visits each node exactly once. Gradients accumulate additively across
// fan-out. One graph instance per training step; not thread-safe.
class Graph {
public:
    // Constant leaf (no gradient is ever propagated into it).
    NodeRef input(Tensor value);
    // Differentiable leaf.
    NodeRef param(Tensor value);

    NodeRef conv3d(NodeRef x, NodeRef w, NodeRef b, std::array<int, 3> stride, std::array<int, 3> pad);
    NodeRef affine(NodeRef x, NodeRef w, NodeRef b);
    NodeRef relu(NodeRef x);
    // N x C x T x H x W -> N x C, mean over T, H, W.
    NodeRef global_avg_pool(NodeRef x);
    // Mean of numerically stabilized softmax cross-entropy over rows; scalar.
    NodeRef softmax_xent(NodeRef logits, std::vector<int> labels);
    // Cosine similarity between two same-shape tensors treated as flat vectors.
    NodeRef cosine(NodeRef u, NodeRef v);
    // Intra-video contrastive loss over a 2N x d projection matrix.
    // sibling[i] is the row index of clip i's positive partner (an involution
    // with no fixed points); every other row is a negative. No temperature in
    // the base formulation; `temperature` (default 1) is an extension knob.
    NodeRef icl_loss(NodeRef proj, std::vector<int> sibling, double temperature = 1.0);
    // Weighted sum of scalar nodes.
    NodeRef wsum(const std::vector<NodeRef>& terms, const std::vector<double>& coeffs);
    // Scalar inner product with a constant tensor (test plumbing).
    NodeRef inner(NodeRef x, Tensor weights);

    const Tensor& val(NodeRef r) const;
    // Zero tensor if no gradient reached the node.
    const Tensor& grad(NodeRef r) const;

    void backward(NodeRef root);

    // Reject NaN/Inf at op boundaries.
    void set_checked(bool on) { checked_ = on; }

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;  // empty until a gradient is accumulated
        bool needs_grad = false;
        std::function<void(Graph&)> backward_fn;
    };

    std::vector<Node> nodes_;
    bool checked_ = false;

    int add_node(Tensor value, bool needs_grad, std::function<void(Graph&)> fn);
    const Node& at(NodeRef r) const;
    Node& at(NodeRef r);
    // Gradient accumulator of node `id`, or nullptr if it needs no gradient.
    Tensor* grad_sink(int id);
    bool has_grad(int id) const;
    void check_finite(const Tensor& t, const char* op) const;

    friend struct GraphOps;
};

int argmax_row(const Tensor& t, int row);

}  // namespace vid
