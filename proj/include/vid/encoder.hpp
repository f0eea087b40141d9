#pragma once

#include <array>
#include <string>
#include <vector>

#include "vid/graph.hpp"
#include "vid/optim.hpp"
#include "vid/rng.hpp"

namespace vid {

struct ConvStage {
    int out_channels = 8;
    std::array<int, 3> kernel{3, 3, 3};
    std::array<int, 3> stride{1, 2, 2};
    std::array<int, 3> pad{1, 1, 1};
};

// Small 3D CNN: conv + ReLU stages followed by global average pooling, so the
// per-clip feature dimension equals the last stage's channel count.
struct EncoderSpec {
    int in_channels = 1;
    // Multiplier on the fan-in-scaled uniform init bound. Without batch
    // normalization the pooled-feature scale is set entirely at init; this
    // keeps it near unity so the heads see well-scaled inputs.
    double init_gain = 4.5;
    std::vector<ConvStage> stages{
        {8, {3, 3, 3}, {1, 2, 2}, {1, 1, 1}},
        {16, {3, 3, 3}, {2, 2, 2}, {1, 1, 1}},
        {32, {3, 3, 3}, {2, 2, 2}, {1, 1, 1}},
    };

    int feature_dim() const { return stages.back().out_channels; }
    void validate() const;

    // Compact stage syntax for config files: "out:ktxkhxkw:stxshxsw" per
    // stage, comma separated (padding fixed at 1).
    std::string stages_str() const;
    static std::vector<ConvStage> parse_stages(const std::string& text);
};

struct EncoderParams {
    std::vector<std::pair<int, int>> stage_params;  // (weight, bias) store indices
};

// Kaiming-style fan-in scaled uniform initialization for the conv weights,
// zero biases.
EncoderParams init_encoder(ParamStore& store, const EncoderSpec& spec, RngStream& rng);

// clips: N x C x T x H x W -> pooled features N x feature_dim.
NodeRef encoder_forward(Graph& g, NodeRef clips, const EncoderSpec& spec, const EncoderParams& enc,
                        const std::vector<NodeRef>& params);

}  // namespace vid
