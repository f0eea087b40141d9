#include "vid/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "vid/errors.hpp"
#include "vid/threads.hpp"

namespace vid {

void TrainConfig::validate() const {
    sampler.validate();
    augment.validate();
    sgd.validate();
    encoder.validate();
    weights.validate();
    if (batch_videos < 2) throw ConfigError("train: batch_videos must be >= 2 (ICL needs negatives)");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (max_steps < 0 || threads < 0) throw ConfigError("train: max_steps/threads must be >= 0");
    if (proj_dim < 1) throw ConfigError("train: proj_dim must be >= 1");
    if (icl_temperature <= 0.0) throw ConfigError("train: icl_temperature must be positive");
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_range(const std::array<double, 2>& r) {
    return fmt_double(r[0]) + ":" + fmt_double(r[1]);
}

std::array<double, 2> parse_range(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw FormatError("config: expected lo:hi range, got " + s);
    return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
}

}  // namespace

void save_train_config(const TrainConfig& cfg, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("config: cannot open for writing: " + path.string());
    os << "sampler.l0=" << cfg.sampler.clip_len << '\n';
    os << "sampler.inc_min=" << cfg.sampler.inc_min << '\n';
    os << "sampler.inc_max=" << cfg.sampler.inc_max << '\n';
    os << "sampler.k=" << cfg.sampler.num_subclips << '\n';
    os << "augment.enabled=" << (cfg.augment.enabled ? 1 : 0) << '\n';
    os << "augment.per_frame=" << (cfg.augment.per_frame ? 1 : 0) << '\n';
    os << "augment.brightness=" << fmt_range(cfg.augment.brightness) << '\n';
    os << "augment.contrast=" << fmt_range(cfg.augment.contrast) << '\n';
    os << "augment.saturation=" << fmt_range(cfg.augment.saturation) << '\n';
    os << "augment.hue=" << fmt_range(cfg.augment.hue) << '\n';
    os << "augment.crop=" << cfg.augment.crop_h << 'x' << cfg.augment.crop_w << '\n';
    os << "augment.flip_prob=" << fmt_double(cfg.augment.flip_prob) << '\n';
    os << "encoder.in_channels=" << cfg.encoder.in_channels << '\n';
    os << "encoder.init_gain=" << fmt_double(cfg.encoder.init_gain) << '\n';
    os << "encoder.stages=" << cfg.encoder.stages_str() << '\n';
    os << "sgd.lr=" << fmt_double(cfg.sgd.lr) << '\n';
    os << "sgd.momentum=" << fmt_double(cfg.sgd.momentum) << '\n';
    os << "sgd.weight_decay=" << fmt_double(cfg.sgd.weight_decay) << '\n';
    os << "sgd.lr_decay_epochs=" << cfg.sgd.lr_decay_epochs << '\n';
    os << "weights.alpha=" << fmt_double(cfg.weights.alpha) << '\n';
    os << "weights.beta=" << fmt_double(cfg.weights.beta) << '\n';
    os << "weights.lambda=" << fmt_double(cfg.weights.lambda) << '\n';
    os << "icl_temperature=" << fmt_double(cfg.icl_temperature) << '\n';
    os << "proj_dim=" << cfg.proj_dim << '\n';
    os << "batch_videos=" << cfg.batch_videos << '\n';
    os << "epochs=" << cfg.epochs << '\n';
    os << "max_steps=" << cfg.max_steps << '\n';
    os << "threads=" << cfg.threads << '\n';
    os << "seed=" << cfg.seed << '\n';
    os << "checkpoint_dir=" << cfg.checkpoint_dir << '\n';
    os << "metrics_path=" << cfg.metrics_path << '\n';
}

TrainConfig load_train_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("config: cannot open: " + path.string());
    TrainConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("config: expected key=value at line " + std::to_string(lineno));
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        try {
            if (key == "sampler.l0") cfg.sampler.clip_len = std::stoi(val);
            else if (key == "sampler.inc_min") cfg.sampler.inc_min = std::stoi(val);
            else if (key == "sampler.inc_max") cfg.sampler.inc_max = std::stoi(val);
            else if (key == "sampler.k") cfg.sampler.num_subclips = std::stoi(val);
            else if (key == "augment.enabled") cfg.augment.enabled = std::stoi(val) != 0;
            else if (key == "augment.per_frame") cfg.augment.per_frame = std::stoi(val) != 0;
            else if (key == "augment.brightness") cfg.augment.brightness = parse_range(val);
            else if (key == "augment.contrast") cfg.augment.contrast = parse_range(val);
            else if (key == "augment.saturation") cfg.augment.saturation = parse_range(val);
            else if (key == "augment.hue") cfg.augment.hue = parse_range(val);
            else if (key == "augment.crop") {
                const auto x = val.find('x');
                if (x == std::string::npos) throw FormatError("config: augment.crop expects HxW");
                cfg.augment.crop_h = std::stoi(val.substr(0, x));
                cfg.augment.crop_w = std::stoi(val.substr(x + 1));
            } else if (key == "augment.flip_prob") cfg.augment.flip_prob = std::stod(val);
            else if (key == "encoder.in_channels") cfg.encoder.in_channels = std::stoi(val);
            else if (key == "encoder.init_gain") cfg.encoder.init_gain = std::stod(val);
            else if (key == "encoder.stages") cfg.encoder.stages = EncoderSpec::parse_stages(val);
            else if (key == "sgd.lr") cfg.sgd.lr = std::stod(val);
            else if (key == "sgd.momentum") cfg.sgd.momentum = std::stod(val);
            else if (key == "sgd.weight_decay") cfg.sgd.weight_decay = std::stod(val);
            else if (key == "sgd.lr_decay_epochs") cfg.sgd.lr_decay_epochs = std::stoi(val);
            else if (key == "weights.alpha") cfg.weights.alpha = std::stod(val);
            else if (key == "weights.beta") cfg.weights.beta = std::stod(val);
            else if (key == "weights.lambda") cfg.weights.lambda = std::stod(val);
            else if (key == "icl_temperature") cfg.icl_temperature = std::stod(val);
            else if (key == "proj_dim") cfg.proj_dim = std::stoi(val);
            else if (key == "batch_videos") cfg.batch_videos = std::stoi(val);
            else if (key == "epochs") cfg.epochs = std::stoi(val);
            else if (key == "max_steps") cfg.max_steps = std::stoi(val);
            else if (key == "threads") cfg.threads = std::stoi(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "checkpoint_dir") cfg.checkpoint_dir = val;
            else if (key == "metrics_path") cfg.metrics_path = val;
            else throw FormatError("config: unknown key " + key);
        } catch (const FormatError&) {
            throw;
        } catch (const std::exception&) {
            throw FormatError("config: malformed value for " + key);
        }
    }
    return cfg;
}

namespace {

// Pack centered f32 clips (T x H x W x C each) into an N x C x T x H x W batch.
Tensor stack_clips(const std::vector<VideoTensor>& clips) {
    if (clips.empty()) throw ShapeError("stack_clips: empty batch");
    const auto& first = clips.front();
    Tensor batch({static_cast<int>(clips.size()), first.c, first.t, first.h, first.w});
    for (std::size_t i = 0; i < clips.size(); ++i) {
        const auto& v = clips[i];
        if (v.t != first.t || v.h != first.h || v.w != first.w || v.c != first.c ||
            v.dtype != Dtype::F32)
            throw ShapeError("stack_clips: inconsistent clip shapes");
        std::int64_t out = static_cast<std::int64_t>(i) * v.c * v.t * v.h * v.w;
        for (int c = 0; c < v.c; ++c)
            for (int t = 0; t < v.t; ++t)
                for (int y = 0; y < v.h; ++y)
                    for (int x = 0; x < v.w; ++x) batch[out++] = v.at_f32(t, y, x, c);
    }
    return batch;
}

std::vector<NodeRef> register_params(Graph& g, const ParamStore& store, bool trainable) {
    std::vector<NodeRef> nodes;
    nodes.reserve(static_cast<std::size_t>(store.size()));
    for (int i = 0; i < store.size(); ++i)
        nodes.push_back(trainable ? g.param(store.value(i)) : g.input(store.value(i)));
    return nodes;
}

struct LoadedDataset {
    std::vector<VideoTensor> videos;
    std::vector<ManifestEntry> entries;
};

LoadedDataset load_dataset(const std::vector<ManifestEntry>& manifest, const SamplerConfig& sampler,
                           int expected_channels) {
    if (manifest.empty()) throw ConfigError("dataset: empty manifest");
    LoadedDataset ds;
    ds.entries = manifest;
    for (const auto& e : manifest) {
        VideoTensor v = read_video(e.path);
        if (v.t < sampler.min_raw_len())
            throw InfeasibleError("dataset: video " + e.path + " has " + std::to_string(v.t) +
                                  " frames; sampler needs at least " +
                                  std::to_string(sampler.min_raw_len()));
        if (v.c != expected_channels)
            throw ShapeError("dataset: video " + e.path + " has " + std::to_string(v.c) +
                             " channels; encoder expects " + std::to_string(expected_channels));
        ds.videos.push_back(std::move(v));
    }
    return ds;
}

}  // namespace

ParamStore init_model(const TrainConfig& cfg) {
    ParamStore store;
    RngStream init_rng = RngStream(cfg.seed).split(0);
    RngStream enc_rng = init_rng.split(0);
    RngStream head_rng = init_rng.split(1);
    init_encoder(store, cfg.encoder, enc_rng);
    HeadsConfig hc;
    hc.feature_dim = cfg.encoder.feature_dim();
    hc.loc_classes = cfg.sampler.num_loc_classes();
    hc.len_classes = cfg.sampler.num_len_classes();
    hc.proj_dim = cfg.proj_dim;
    init_heads(store, hc, head_rng);
    return store;
}

TrainResult pretrain(const TrainConfig& cfg, const std::vector<ManifestEntry>& manifest) {
    cfg.validate();
    apply_worker_threads(cfg.threads);

    LoadedDataset ds = load_dataset(manifest, cfg.sampler, cfg.encoder.in_channels);
    const int n_videos = static_cast<int>(ds.videos.size());
    if (n_videos < cfg.batch_videos)
        throw ConfigError("train: manifest has fewer videos than batch_videos");

    ParamStore store = init_model(cfg);
    const EncoderParams enc = encoder_params_from_store(store, cfg.encoder);
    const HeadsParams heads = heads_from_store(store);

    std::filesystem::create_directories(cfg.checkpoint_dir);
    const std::filesystem::path ckpt_path = std::filesystem::path(cfg.checkpoint_dir) / "last.vidc";
    save_train_config(cfg, std::filesystem::path(cfg.checkpoint_dir) / "config.txt");

    std::ofstream metrics(cfg.metrics_path);
    if (!metrics) throw FormatError("train: cannot open metrics file " + cfg.metrics_path);
    metrics << "step,epoch,loss_lod,loss_led,loss_icl,loss_total,acc_lod,acc_led,lr\n";

    const RngStream master(cfg.seed);
    const RngStream shuffle_rng = master.split(1);
    const RngStream clip_rng = master.split(2);

    const int steps_per_epoch = n_videos / cfg.batch_videos;
    const std::size_t total_params = static_cast<std::size_t>(store.size());

    TrainResult result;
    int step = 0;
    bool done = false;
    std::vector<int> order(static_cast<std::size_t>(n_videos));
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
        RngStream ep = shuffle_rng.split(static_cast<std::uint64_t>(epoch));
        for (int i = n_videos - 1; i > 0; --i) {
            const int j = static_cast<int>(ep.uniform_int(0, i));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
        const double lr = scheduled_lr(cfg.sgd, epoch);

        for (int b = 0; b < steps_per_epoch && !done; ++b) {
            std::vector<VideoTensor> clips;
            std::vector<int> loc_labels, len_labels, video_ids;
            RngStream step_rng = clip_rng.split(static_cast<std::uint64_t>(step));
            for (int v = 0; v < cfg.batch_videos; ++v) {
                const int vid = order[static_cast<std::size_t>(b * cfg.batch_videos + v)];
                const VideoTensor& video = ds.videos[static_cast<std::size_t>(vid)];
                for (int j = 0; j < 2; ++j) {
                    RngStream r = step_rng.split(static_cast<std::uint64_t>(2 * v + j));
                    const IncoherentSample s =
                        generate(cfg.sampler, video.t, ds.entries[static_cast<std::size_t>(vid)].path, r);
                    const VideoTensor raw = gather_frames(video, s.frame_indices());
                    clips.push_back(prepare_train_clip(raw, cfg.augment, r));
                    loc_labels.push_back(s.loc_label());
                    len_labels.push_back(s.len_label());
                    video_ids.push_back(vid);
                }
            }

            Graph g;
            const std::vector<NodeRef> params = register_params(g, store, true);
            const NodeRef batch_in = g.input(stack_clips(clips));
            const NodeRef features = encoder_forward(g, batch_in, cfg.encoder, enc, params);
            BatchOutputs batch = apply_heads(g, features, heads, params);
            batch.loc_labels = loc_labels;
            batch.len_labels = len_labels;
            batch.video_ids = video_ids;

            const NodeRef lod = lod_loss(g, batch);
            const NodeRef led = led_loss(g, batch);
            const NodeRef icl = icl_loss(g, batch, cfg.icl_temperature);
            const NodeRef total =
                g.wsum({lod, led, icl}, {cfg.weights.alpha, cfg.weights.beta, cfg.weights.lambda});

            const double total_v = g.val(total)[0];
            if (!std::isfinite(total_v))
                throw std::runtime_error("train: non-finite loss at step " + std::to_string(step + 1) +
                                         " (lod=" + std::to_string(g.val(lod)[0]) +
                                         ", led=" + std::to_string(g.val(led)[0]) +
                                         ", icl=" + std::to_string(g.val(icl)[0]) + ")");

            g.backward(total);
            std::vector<Tensor> grads;
            grads.reserve(total_params);
            for (int i = 0; i < store.size(); ++i) grads.push_back(g.grad(params[static_cast<std::size_t>(i)]));
            store.step(grads, cfg.sgd, lr);

            const int rows = static_cast<int>(clips.size());
            int loc_hits = 0, len_hits = 0;
            for (int i = 0; i < rows; ++i) {
                loc_hits += argmax_row(g.val(batch.loc_logits), i) == loc_labels[static_cast<std::size_t>(i)];
                len_hits += argmax_row(g.val(batch.len_logits), i) == len_labels[static_cast<std::size_t>(i)];
            }

            ++step;
            metrics << step << ',' << epoch << ',' << fmt_double(g.val(lod)[0]) << ','
                    << fmt_double(g.val(led)[0]) << ',' << fmt_double(g.val(icl)[0]) << ','
                    << fmt_double(total_v) << ',' << fmt_double(static_cast<double>(loc_hits) / rows)
                    << ',' << fmt_double(static_cast<double>(len_hits) / rows) << ',' << fmt_double(lr)
                    << '\n';
            result.final_loss = total_v;
            if (cfg.max_steps > 0 && step >= cfg.max_steps) done = true;
        }
        save_checkpoint(ckpt_path, store, static_cast<std::uint64_t>(step));
        result.epochs = epoch + 1;
    }

    save_checkpoint(ckpt_path, store, static_cast<std::uint64_t>(step));
    result.steps = step;
    result.checkpoint_path = ckpt_path.string();
    return result;
}

HeadsParams heads_from_store(const ParamStore& store) {
    HeadsParams h;
    h.loc_w = store.index_of("head.loc.w");
    h.loc_b = store.index_of("head.loc.b");
    h.len_w = store.index_of("head.len.w");
    h.len_b = store.index_of("head.len.b");
    h.proj_w = store.index_of("head.proj.w");
    h.proj_b = store.index_of("head.proj.b");
    if (h.loc_w < 0 || h.loc_b < 0 || h.len_w < 0 || h.len_b < 0 || h.proj_w < 0 || h.proj_b < 0)
        throw FormatError("checkpoint: missing head parameters");
    return h;
}

EncoderParams encoder_params_from_store(const ParamStore& store, const EncoderSpec& spec) {
    EncoderParams enc;
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        const std::string prefix = "enc.stage" + std::to_string(i);
        const int w = store.index_of(prefix + ".w");
        const int b = store.index_of(prefix + ".b");
        if (w < 0 || b < 0) throw FormatError("checkpoint: missing encoder stage " + std::to_string(i));
        enc.stage_params.emplace_back(w, b);
    }
    return enc;
}

Tensor encode_clips(const ParamStore& store, const EncoderSpec& spec, const Tensor& batch) {
    Graph g;
    const std::vector<NodeRef> params = register_params(g, store, false);
    const EncoderParams enc = encoder_params_from_store(store, spec);
    const NodeRef features = encoder_forward(g, g.input(batch), spec, enc, params);
    return g.val(features);
}

Tensor extract_features(const ParamStore& store, const EncoderSpec& spec,
                        const std::vector<VideoTensor>& clips, int crop_h, int crop_w) {
    std::vector<VideoTensor> prepared;
    prepared.reserve(clips.size());
    for (const auto& c : clips) prepared.push_back(prepare_eval_clip(c, crop_h, crop_w));
    return encode_clips(store, spec, stack_clips(prepared));
}

std::vector<int> coherent_clip_starts(int raw_len, int clip_len, int count) {
    if (raw_len < clip_len) throw InfeasibleError("coherent clip: video shorter than clip_len");
    if (count < 1) throw ConfigError("coherent clip: count must be >= 1");
    std::vector<int> starts;
    if (count == 1) {
        starts.push_back((raw_len - clip_len) / 2 + 1);
        return starts;
    }
    for (int i = 0; i < count; ++i) {
        const double f = static_cast<double>(i) / (count - 1);
        starts.push_back(1 + static_cast<int>(std::lround(f * (raw_len - clip_len))));
    }
    return starts;
}

FeatureSet features_for_manifest(const ParamStore& store, const EncoderSpec& spec,
                                 const std::vector<ManifestEntry>& manifest, int clip_len, int crop_h,
                                 int crop_w, int clips_per_video) {
    if (manifest.empty()) throw ConfigError("features: empty manifest");
    const int d = spec.feature_dim();
    FeatureSet fs;
    fs.features = Tensor({static_cast<int>(manifest.size()), d});
    for (std::size_t m = 0; m < manifest.size(); ++m) {
        const VideoTensor video = read_video(manifest[m].path);
        std::vector<VideoTensor> clips;
        for (int start : coherent_clip_starts(video.t, clip_len, clips_per_video)) {
            std::vector<int> idx(static_cast<std::size_t>(clip_len));
            std::iota(idx.begin(), idx.end(), start);
            clips.push_back(gather_frames(video, idx));
        }
        const Tensor feats = extract_features(store, spec, clips, crop_h, crop_w);
        for (int j = 0; j < d; ++j) {
            double acc = 0.0;
            for (int i = 0; i < static_cast<int>(clips.size()); ++i)
                acc += feats[static_cast<std::int64_t>(i) * d + j];
            fs.features[static_cast<std::int64_t>(m) * d + j] = acc / static_cast<double>(clips.size());
        }
        fs.labels.push_back(manifest[m].class_id);
    }
    return fs;
}

double lod_holdout_accuracy(const ParamStore& store, const EncoderSpec& spec,
                            const SamplerConfig& sampler, const std::vector<ManifestEntry>& manifest,
                            int crop_h, int crop_w, int clips_per_video, std::uint64_t seed) {
    if (manifest.empty()) throw ConfigError("lod eval: empty manifest");
    const RngStream root(seed);
    std::vector<VideoTensor> clips;
    std::vector<int> labels;
    for (std::size_t m = 0; m < manifest.size(); ++m) {
        const VideoTensor video = read_video(manifest[m].path);
        RngStream vr = root.split(m);
        for (int j = 0; j < clips_per_video; ++j) {
            RngStream r = vr.split(static_cast<std::uint64_t>(j));
            const IncoherentSample s = generate(sampler, video.t, manifest[m].path, r);
            clips.push_back(gather_frames(video, s.frame_indices()));
            labels.push_back(s.loc_label());
        }
    }
    const Tensor feats = extract_features(store, spec, clips, crop_h, crop_w);

    Graph g;
    const std::vector<NodeRef> params = register_params(g, store, false);
    const HeadsParams heads = heads_from_store(store);
    const NodeRef logits = g.affine(g.input(feats), params[static_cast<std::size_t>(heads.loc_w)],
                                    params[static_cast<std::size_t>(heads.loc_b)]);
    int hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        hits += argmax_row(g.val(logits), static_cast<int>(i)) == labels[i];
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace vid
