#pragma once

#include <array>

#include "vid/rng.hpp"
#include "vid/video.hpp"

namespace vid {

// Clip augmentation settings. Jitter factors are drawn once per clip and
// applied identically to every frame (temporal consistency); set per_frame to
// redraw per frame instead. `enabled` switches colour jitter on/off; crop and
// flip are controlled by crop size and flip_prob.
struct AugmentConfig {
    std::array<double, 2> brightness{0.2, 1.8};
    std::array<double, 2> contrast{0.2, 1.8};
    std::array<double, 2> saturation{0.2, 1.8};
    std::array<double, 2> hue{-0.2, 0.2};
    int crop_h = 32;
    int crop_w = 32;
    double flip_prob = 0.5;
    bool enabled = true;
    bool per_frame = false;

    void validate() const;
};

// u8 [0,255] -> f32 [0,1]; f32 passes through.
VideoTensor to_float(const VideoTensor& v);

// Colour jitter: brightness, contrast, saturation, hue, in that order, each
// factor drawn uniformly from its range. Saturation and hue are no-ops on
// single-channel clips; hue is a rotation of RGB space about the gray axis.
// Identity when cfg.enabled is false. Output is f32 [0,1].
VideoTensor jitter(const VideoTensor& v, const AugmentConfig& cfg, RngStream& rng);

// Random spatial crop to (crop_h, crop_w); one placement for the whole clip.
VideoTensor crop(const VideoTensor& v, const AugmentConfig& cfg, RngStream& rng);

VideoTensor center_crop(const VideoTensor& v, int crop_h, int crop_w);

// Horizontal flip of every frame with probability flip_prob (all or none).
VideoTensor hflip(const VideoTensor& v, const AugmentConfig& cfg, RngStream& rng);

VideoTensor hflip_forced(const VideoTensor& v);

// Map to zero-mean unit-range floats: u8 -> v/255 - 0.5, unit f32 -> v - 0.5.
VideoTensor normalize(const VideoTensor& v);

// Training path: jitter -> random crop -> random flip -> normalize.
VideoTensor prepare_train_clip(const VideoTensor& clip, const AugmentConfig& cfg, RngStream& rng);

// Evaluation path: center crop -> normalize (no randomness).
VideoTensor prepare_eval_clip(const VideoTensor& clip, int crop_h, int crop_w);

}  // namespace vid
