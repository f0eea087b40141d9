#pragma once

#include <vector>

#include "vid/graph.hpp"
#include "vid/optim.hpp"
#include "vid/rng.hpp"

namespace vid {

// Coefficients of the three loss terms. Any may be zero, which switches the
// corresponding sub-task off.
struct LossWeights {
    double alpha = 1.0;   // location detection
    double beta = 0.1;    // length detection
    double lambda = 0.1;  // intra-video contrastive

    void validate() const;
};

struct HeadsConfig {
    int feature_dim = 32;
    int loc_classes = 15;  // clip_len - 1
    int len_classes = 8;   // inc_max - inc_min + 1
    int proj_dim = 16;
};

// Store indices for the three heads: plain affine maps for location and
// length, affine followed by ReLU for the contrastive projection.
struct HeadsParams {
    int loc_w = -1, loc_b = -1;
    int len_w = -1, len_b = -1;
    int proj_w = -1, proj_b = -1;
};

HeadsParams init_heads(ParamStore& store, const HeadsConfig& cfg, RngStream& rng);

// Per-batch head outputs and labels. Clips are grouped two per source video;
// video_ids must contain exactly two entries per id.
struct BatchOutputs {
    NodeRef loc_logits;  // 2N x loc_classes
    NodeRef len_logits;  // 2N x len_classes
    NodeRef proj;        // 2N x proj_dim, elementwise >= 0
    std::vector<int> loc_labels;
    std::vector<int> len_labels;
    std::vector<int> video_ids;
};

// Run the three heads on pooled encoder features.
BatchOutputs apply_heads(Graph& g, NodeRef features, const HeadsParams& heads,
                         const std::vector<NodeRef>& params);

// sibling[i] = index of the other clip with the same video id.
std::vector<int> sibling_pairing(const std::vector<int>& video_ids);

NodeRef lod_loss(Graph& g, const BatchOutputs& batch);
NodeRef led_loss(Graph& g, const BatchOutputs& batch);
NodeRef icl_loss(Graph& g, const BatchOutputs& batch, double temperature = 1.0);

// alpha * LoD + beta * LeD + lambda * ICL.
NodeRef total_loss(Graph& g, const BatchOutputs& batch, const LossWeights& w, double temperature = 1.0);

}  // namespace vid
