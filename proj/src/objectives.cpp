#include "vid/objectives.hpp"

#include <cmath>
#include <map>

#include "vid/errors.hpp"

namespace vid {

void LossWeights::validate() const {
    if (alpha < 0.0 || beta < 0.0 || lambda < 0.0)
        throw ConfigError("loss weights must be non-negative");
}

HeadsParams init_heads(ParamStore& store, const HeadsConfig& cfg, RngStream& rng) {
    if (cfg.feature_dim < 1 || cfg.loc_classes < 1 || cfg.len_classes < 1 || cfg.proj_dim < 1)
        throw ConfigError("heads: dimensions must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.feature_dim));
    HeadsParams h;
    RngStream r0 = rng.split(0), r1 = rng.split(1), r2 = rng.split(2);
    h.loc_w = store.add("head.loc.w", Tensor::uniform({cfg.feature_dim, cfg.loc_classes}, bound, r0));
    h.loc_b = store.add("head.loc.b", Tensor::zeros({cfg.loc_classes}));
    h.len_w = store.add("head.len.w", Tensor::uniform({cfg.feature_dim, cfg.len_classes}, bound, r1));
    h.len_b = store.add("head.len.b", Tensor::zeros({cfg.len_classes}));
    h.proj_w = store.add("head.proj.w", Tensor::uniform({cfg.feature_dim, cfg.proj_dim}, bound, r2));
    h.proj_b = store.add("head.proj.b", Tensor::zeros({cfg.proj_dim}));
    return h;
}

BatchOutputs apply_heads(Graph& g, NodeRef features, const HeadsParams& heads,
                         const std::vector<NodeRef>& params) {
    auto p = [&](int i) { return params[static_cast<std::size_t>(i)]; };
    BatchOutputs out;
    out.loc_logits = g.affine(features, p(heads.loc_w), p(heads.loc_b));
    out.len_logits = g.affine(features, p(heads.len_w), p(heads.len_b));
    out.proj = g.relu(g.affine(features, p(heads.proj_w), p(heads.proj_b)));
    return out;
}

std::vector<int> sibling_pairing(const std::vector<int>& video_ids) {
    std::map<int, std::vector<int>> groups;
    for (std::size_t i = 0; i < video_ids.size(); ++i)
        groups[video_ids[i]].push_back(static_cast<int>(i));
    std::vector<int> sibling(video_ids.size(), -1);
    for (const auto& [id, members] : groups) {
        if (members.size() != 2)
            throw ShapeError("batch: video id " + std::to_string(id) + " must appear exactly twice");
        sibling[static_cast<std::size_t>(members[0])] = members[1];
        sibling[static_cast<std::size_t>(members[1])] = members[0];
    }
    return sibling;
}

NodeRef lod_loss(Graph& g, const BatchOutputs& batch) {
    return g.softmax_xent(batch.loc_logits, batch.loc_labels);
}

NodeRef led_loss(Graph& g, const BatchOutputs& batch) {
    return g.softmax_xent(batch.len_logits, batch.len_labels);
}

NodeRef icl_loss(Graph& g, const BatchOutputs& batch, double temperature) {
    return g.icl_loss(batch.proj, sibling_pairing(batch.video_ids), temperature);
}

NodeRef total_loss(Graph& g, const BatchOutputs& batch, const LossWeights& w, double temperature) {
    w.validate();
    const NodeRef lod = lod_loss(g, batch);
    const NodeRef led = led_loss(g, batch);
    const NodeRef icl = icl_loss(g, batch, temperature);
    return g.wsum({lod, led, icl}, {w.alpha, w.beta, w.lambda});
}

}  // namespace vid
