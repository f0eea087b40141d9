#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vid/augment.hpp"
#include "vid/checkpoint.hpp"
#include "vid/encoder.hpp"
#include "vid/objectives.hpp"
#include "vid/sampler.hpp"
#include "vid/video.hpp"

namespace vid {

struct TrainConfig {
    SamplerConfig sampler;
    AugmentConfig augment;
    SgdConfig sgd;
    EncoderSpec encoder;
    LossWeights weights;
    double icl_temperature = 1.0;
    int proj_dim = 16;
    int batch_videos = 8;  // N raw videos per step; two clips each
    int epochs = 10;
    int max_steps = 0;  // 0 = run all epochs
    int threads = 0;    // 0 = all available (capped by VID_THREADS)
    std::uint64_t seed = 0;
    std::string checkpoint_dir = "checkpoints";
    std::string metrics_path = "metrics.csv";

    void validate() const;
};

// Flat key=value config file covering every TrainConfig field.
void save_train_config(const TrainConfig& cfg, const std::filesystem::path& path);
TrainConfig load_train_config(const std::filesystem::path& path);

struct TrainResult {
    int steps = 0;
    int epochs = 0;
    double final_loss = 0.0;
    std::string checkpoint_path;
};

// Self-supervised pretraining: per step draw batch_videos raw videos,
// generate two incoherent clips from each, augment, encode, apply the three
// heads, take one SGD step on the weighted objective. Writes one metrics CSV
// row per step and a checkpoint (plus config.txt) every epoch. Deterministic
// for a fixed seed.
TrainResult pretrain(const TrainConfig& cfg, const std::vector<ManifestEntry>& manifest);

HeadsParams heads_from_store(const ParamStore& store);
EncoderParams encoder_params_from_store(const ParamStore& store, const EncoderSpec& spec);

// Forward-only encoding of a prepared batch (N x C x T x H x W).
Tensor encode_clips(const ParamStore& store, const EncoderSpec& spec, const Tensor& batch);

// Evaluation-mode features for raw clips: center crop, normalize, encode.
Tensor extract_features(const ParamStore& store, const EncoderSpec& spec,
                        const std::vector<VideoTensor>& clips, int crop_h, int crop_w);

// 1-based start indices of `count` uniformly spaced coherent clips (count=1
// gives the centered clip).
std::vector<int> coherent_clip_starts(int raw_len, int clip_len, int count);

// Per-video features over a manifest: coherent clips, eval preprocessing,
// feature averaging across clips_per_video. Returns M x feature_dim plus the
// class label per row.
struct FeatureSet {
    Tensor features;
    std::vector<int> labels;
};
FeatureSet features_for_manifest(const ParamStore& store, const EncoderSpec& spec,
                                 const std::vector<ManifestEntry>& manifest, int clip_len, int crop_h,
                                 int crop_w, int clips_per_video = 1);

// Held-out incoherence-location accuracy: draw incoherent clips from each
// manifest video (no jitter/flip; center crop), classify with the location
// head. Returns top-1 accuracy.
double lod_holdout_accuracy(const ParamStore& store, const EncoderSpec& spec,
                            const SamplerConfig& sampler, const std::vector<ManifestEntry>& manifest,
                            int crop_h, int crop_w, int clips_per_video, std::uint64_t seed);

// Fresh randomly initialized parameters matching a train config (for
// random-baseline comparisons).
ParamStore init_model(const TrainConfig& cfg);

}  // namespace vid
