#include "vid/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "vid/errors.hpp"
#include "vid/eval.hpp"
#include "vid/gradcheck.hpp"
#include "vid/trainer.hpp"

namespace vid {

namespace fs = std::filesystem;

namespace {

struct GenDataArgs {
    std::string out;
    int classes = 8, videos = 200, test_videos = 0;
    int frames = 48, height = 32, width = 32, channels = 1;
    double noise = 5.0, base_speed = 1.6, radius = 4.0;
    std::uint64_t seed = 0;
};

int cmd_gen_data(const GenDataArgs& a, std::ostream& out) {
    SyntheticSpec spec;
    spec.num_classes = a.classes;
    spec.frames = a.frames;
    spec.height = a.height;
    spec.width = a.width;
    spec.channels = a.channels;
    spec.noise_std = a.noise;
    spec.base_speed = a.base_speed;
    spec.shape_radius = a.radius;
    spec.seed = a.seed;

    const fs::path root(a.out);
    fs::create_directories(root / "videos");
    const RngStream master(a.seed);

    auto emit = [&](const char* stem, int count, std::uint64_t domain,
                    const fs::path& manifest_path) {
        std::vector<ManifestEntry> manifest;
        const RngStream branch = master.split(domain);
        for (int i = 0; i < count; ++i) {
            const int cls = i % a.classes;
            RngStream r = branch.split(static_cast<std::uint64_t>(i));
            const VideoTensor v = gen_synthetic(spec, cls, r);
            char name[64];
            std::snprintf(name, sizeof(name), "videos/%s_%04d.vidt", stem, i);
            write_video(v, root / name);
            manifest.push_back({name, cls, v.t});
        }
        write_manifest(manifest_path, manifest);
    };

    emit("vid", a.videos, 0, root / "manifest.txt");
    out << "wrote " << a.videos << " videos to " << (root / "manifest.txt").string() << '\n';
    if (a.test_videos > 0) {
        emit("test", a.test_videos, 1, root / "manifest_test.txt");
        out << "wrote " << a.test_videos << " videos to " << (root / "manifest_test.txt").string()
            << '\n';
    }
    return 0;
}

struct SampleArgs {
    int raw_len = 0;
    int l0 = 16, inc_min = 3, inc_max = 10, k = 2, n = 1;
    std::uint64_t seed = 0;
    std::string source_id = "video";
};

int cmd_sample(const SampleArgs& a, std::ostream& out) {
    SamplerConfig cfg;
    cfg.clip_len = a.l0;
    cfg.inc_min = a.inc_min;
    cfg.inc_max = a.inc_max;
    cfg.num_subclips = a.k;
    cfg.seed = a.seed;
    const RngStream master(a.seed);
    for (int i = 0; i < a.n; ++i) {
        RngStream r = master.split(static_cast<std::uint64_t>(i));
        out << to_plan_line(generate(cfg, a.raw_len, a.source_id, r), cfg) << '\n';
    }
    return 0;
}

int cmd_grad_check(std::uint64_t seed, std::ostream& out) {
    bool all_pass = true;
    for (const auto& r : run_grad_checks(seed)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-44s max_rel_err=%-12.3e tol=%.0e %s\n", r.op.c_str(),
                      r.max_rel_err, r.tol, r.pass ? "PASS" : "FAIL");
        out << buf;
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
}

// Shared by probe/retrieve: load a model either from a checkpoint or freshly
// initialized from a config (random baseline).
struct LoadedModel {
    TrainConfig cfg;
    ParamStore store;
};

LoadedModel load_model(const std::string& ckpt, std::string config, bool random_init,
                       std::uint64_t seed) {
    LoadedModel m;
    if (config.empty()) {
        if (ckpt.empty()) throw ConfigError("need --ckpt or --config");
        config = (fs::path(ckpt).parent_path() / "config.txt").string();
    }
    m.cfg = load_train_config(config);
    if (random_init) {
        m.cfg.seed = seed;
        m.store = init_model(m.cfg);
    } else {
        if (ckpt.empty()) throw ConfigError("need --ckpt (or --random-init)");
        m.store = load_checkpoint(ckpt).store;
    }
    return m;
}

struct EvalArgs {
    std::string ckpt, config, train_manifest, test_manifest, csv;
    std::vector<int> ks{1, 5, 10, 20, 50};
    int probe_epochs = 100;
    double probe_lr = 0.1;
    int clips_per_video = 1;
    bool random_init = false;
    std::uint64_t seed = 0;
};

ProbeReport run_probe(const LoadedModel& m, const EvalArgs& a) {
    const auto train = read_manifest(a.train_manifest);
    const auto test = read_manifest(a.test_manifest);
    const FeatureSet ftr = features_for_manifest(m.store, m.cfg.encoder, train, m.cfg.sampler.clip_len,
                                                 m.cfg.augment.crop_h, m.cfg.augment.crop_w,
                                                 a.clips_per_video);
    const FeatureSet fte = features_for_manifest(m.store, m.cfg.encoder, test, m.cfg.sampler.clip_len,
                                                 m.cfg.augment.crop_h, m.cfg.augment.crop_w,
                                                 a.clips_per_video);
    RngStream rng(a.seed);
    return linear_probe(ftr.features, ftr.labels, fte.features, fte.labels, a.probe_epochs, a.probe_lr,
                        rng);
}

int cmd_probe(const EvalArgs& a, std::ostream& out) {
    const LoadedModel m = load_model(a.ckpt, a.config, a.random_init, a.seed);
    const ProbeReport report = run_probe(m, a);
    out << report.table();
    if (!a.csv.empty()) {
        std::ofstream os(a.csv);
        os << "top1," << report.top1 << '\n';
    }
    return 0;
}

int cmd_retrieve(const EvalArgs& a, const std::string& query_manifest, std::ostream& out) {
    const LoadedModel m = load_model(a.ckpt, a.config, a.random_init, a.seed);
    const auto gallery = read_manifest(a.train_manifest);
    const FeatureSet fg = features_for_manifest(m.store, m.cfg.encoder, gallery, m.cfg.sampler.clip_len,
                                                m.cfg.augment.crop_h, m.cfg.augment.crop_w,
                                                a.clips_per_video);
    RetrievalReport report;
    if (query_manifest.empty()) {
        report = knn_retrieval(fg.features, fg.labels, fg.features, fg.labels, a.ks, true);
    } else {
        const auto query = read_manifest(query_manifest);
        const FeatureSet fq = features_for_manifest(m.store, m.cfg.encoder, query,
                                                    m.cfg.sampler.clip_len, m.cfg.augment.crop_h,
                                                    m.cfg.augment.crop_w, a.clips_per_video);
        report = knn_retrieval(fq.features, fq.labels, fg.features, fg.labels, a.ks, false);
    }
    out << report.table();
    if (!a.csv.empty()) {
        std::ofstream os(a.csv);
        os << report.csv();
    }
    return 0;
}

struct AblateArgs {
    std::string data, test, out_dir, config;
    int steps = 800;
    int seeds = 3;
    int probe_epochs = 100;
    double probe_lr = 0.1;
    int clips_per_video = 1;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_ablate(const AblateArgs& a, TrainConfig base, std::ostream& out) {
    struct Row {
        const char* name;
        double alpha, beta, lambda;
    };
    const std::vector<Row> rows = {
        {"LoD", 1, 0, 0},          {"LeD", 0, 1, 0},          {"ICL", 0, 0, 1},
        {"LoD+LeD", 1, 0.1, 0},    {"LoD+ICL", 1, 0, 0.1},    {"LeD+ICL", 0, 1, 0.1},
        {"LoD+LeD+ICL", 1, 0.1, 0.1},
    };

    const auto train_manifest = read_manifest(a.data);
    fs::create_directories(a.out_dir);

    EvalArgs ev;
    ev.train_manifest = a.data;
    ev.test_manifest = a.test;
    ev.probe_epochs = a.probe_epochs;
    ev.probe_lr = a.probe_lr;
    ev.clips_per_video = a.clips_per_video;

    out << "sub-tasks      alpha beta lambda  probe-top1 (median of " << a.seeds << " seeds)\n";

    // Random-initialization baseline.
    {
        std::vector<double> accs;
        for (int s = 0; s < a.seeds; ++s) {
            TrainConfig cfg = base;
            cfg.seed = static_cast<std::uint64_t>(s + 1);
            LoadedModel m{cfg, init_model(cfg)};
            accs.push_back(run_probe(m, ev).top1);
        }
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-14s %5s %4s %6s  %.4f\n", "random-init", "-", "-", "-",
                      median(accs));
        out << buf;
    }

    for (const auto& row : rows) {
        std::vector<double> accs;
        for (int s = 0; s < a.seeds; ++s) {
            TrainConfig cfg = base;
            cfg.weights = {row.alpha, row.beta, row.lambda};
            cfg.seed = static_cast<std::uint64_t>(s + 1);
            cfg.max_steps = a.steps;
            cfg.epochs = 1000000;  // bounded by max_steps
            char dir[64];
            std::snprintf(dir, sizeof(dir), "%s_s%d", row.name, s + 1);
            cfg.checkpoint_dir = (fs::path(a.out_dir) / dir).string();
            cfg.metrics_path = (fs::path(cfg.checkpoint_dir) / "metrics.csv").string();
            fs::create_directories(cfg.checkpoint_dir);
            const TrainResult tr = pretrain(cfg, train_manifest);
            LoadedModel m{cfg, load_checkpoint(tr.checkpoint_path).store};
            accs.push_back(run_probe(m, ev).top1);
        }
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-14s %5.2f %4.2f %6.2f  %.4f\n", row.name, row.alpha, row.beta,
                      row.lambda, median(accs));
        out << buf;
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"video incoherence detection: pretraining, sampling and evaluation tools"};
    app.require_subcommand(1);

    // gen-data
    GenDataArgs gd;
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic moving-shape dataset");
    gen->add_option("--out", gd.out, "output directory")->required();
    gen->add_option("--classes", gd.classes);
    gen->add_option("--videos", gd.videos);
    gen->add_option("--test-videos", gd.test_videos);
    gen->add_option("--frames", gd.frames);
    gen->add_option("--height", gd.height);
    gen->add_option("--width", gd.width);
    gen->add_option("--channels", gd.channels);
    gen->add_option("--noise", gd.noise);
    gen->add_option("--base-speed", gd.base_speed);
    gen->add_option("--radius", gd.radius);
    gen->add_option("--seed", gd.seed);

    // sample
    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "dump incoherent-clip plans for a raw video");
    sample->add_option("--T", sa.raw_len, "raw video length in frames")->required();
    sample->add_option("--l0", sa.l0);
    sample->add_option("--inc-min", sa.inc_min);
    sample->add_option("--inc-max", sa.inc_max);
    sample->add_option("--k", sa.k);
    sample->add_option("--n", sa.n);
    sample->add_option("--seed", sa.seed);
    sample->add_option("--source-id", sa.source_id);

    // pretrain
    std::string pt_data, pt_config;
    TrainConfig pt;
    auto* pre = app.add_subcommand("pretrain", "self-supervised pretraining");
    pre->add_option("--data", pt_data, "training manifest")->required();
    pre->add_option("--config", pt_config, "config file with defaults");
    auto* o_out = pre->add_option("--out", pt.checkpoint_dir, "checkpoint directory");
    auto* o_metrics = pre->add_option("--metrics", pt.metrics_path, "metrics CSV path");
    auto* o_epochs = pre->add_option("--epochs", pt.epochs);
    auto* o_steps = pre->add_option("--max-steps", pt.max_steps);
    auto* o_batch = pre->add_option("--batch-videos", pt.batch_videos);
    auto* o_l0 = pre->add_option("--l0", pt.sampler.clip_len);
    auto* o_imin = pre->add_option("--inc-min", pt.sampler.inc_min);
    auto* o_imax = pre->add_option("--inc-max", pt.sampler.inc_max);
    auto* o_lr = pre->add_option("--lr", pt.sgd.lr);
    auto* o_mom = pre->add_option("--momentum", pt.sgd.momentum);
    auto* o_wd = pre->add_option("--weight-decay", pt.sgd.weight_decay);
    auto* o_lrd = pre->add_option("--lr-decay-epochs", pt.sgd.lr_decay_epochs);
    auto* o_alpha = pre->add_option("--alpha", pt.weights.alpha);
    auto* o_beta = pre->add_option("--beta", pt.weights.beta);
    auto* o_lambda = pre->add_option("--lambda", pt.weights.lambda);
    auto* o_jit = pre->add_option("--jitter", pt.augment.enabled, "enable colour jitter (0/1)");
    auto* o_flip = pre->add_option("--flip-prob", pt.augment.flip_prob);
    auto* o_crop = pre->add_option("--crop", [&pt](const CLI::results_t& res) {
        try {
            const auto x = res[0].find('x');
            if (x == std::string::npos) return false;
            pt.augment.crop_h = std::stoi(res[0].substr(0, x));
            pt.augment.crop_w = std::stoi(res[0].substr(x + 1));
            return true;
        } catch (const std::exception&) {
            return false;
        }
    }, "training crop, HxW");
    auto* o_ch = pre->add_option("--channels", pt.encoder.in_channels);
    auto* o_seed = pre->add_option("--seed", pt.seed);
    auto* o_thr = pre->add_option("--threads", pt.threads);

    // grad-check
    std::uint64_t gc_seed = 0;
    auto* gc = app.add_subcommand("grad-check", "finite-difference checks for every primitive");
    gc->add_option("--seed", gc_seed);

    // probe
    EvalArgs pb;
    auto* probe = app.add_subcommand("probe", "linear probe on frozen features");
    probe->add_option("--ckpt", pb.ckpt, "checkpoint path");
    probe->add_option("--config", pb.config, "config (default: config.txt beside --ckpt)");
    probe->add_option("--train", pb.train_manifest, "probe training manifest")->required();
    probe->add_option("--test", pb.test_manifest, "probe test manifest")->required();
    probe->add_option("--epochs", pb.probe_epochs);
    probe->add_option("--lr", pb.probe_lr);
    probe->add_option("--clips-per-video", pb.clips_per_video);
    probe->add_flag("--random-init", pb.random_init, "probe a freshly initialized encoder");
    probe->add_option("--seed", pb.seed);
    probe->add_option("--csv", pb.csv, "write report CSV here");

    // retrieve
    EvalArgs rt;
    std::string rt_query;
    auto* retrieve = app.add_subcommand("retrieve", "top-k nearest-neighbour retrieval");
    retrieve->add_option("--ckpt", rt.ckpt);
    retrieve->add_option("--config", rt.config);
    retrieve->add_option("--gallery", rt.train_manifest, "gallery manifest")->required();
    retrieve->add_option("--query", rt_query, "query manifest (default: gallery, self-excluded)");
    retrieve->add_option("--k", rt.ks, "comma-separated k values")->delimiter(',');
    retrieve->add_option("--clips-per-video", rt.clips_per_video);
    retrieve->add_flag("--random-init", rt.random_init);
    retrieve->add_option("--seed", rt.seed);
    retrieve->add_option("--csv", rt.csv);

    // ablate
    AblateArgs ab;
    auto* ablate = app.add_subcommand("ablate", "sub-task ablation grid with linear-probe scores");
    ablate->add_option("--data", ab.data, "pretraining manifest")->required();
    ablate->add_option("--test", ab.test, "probe test manifest")->required();
    ablate->add_option("--out", ab.out_dir, "working directory for checkpoints")->required();
    ablate->add_option("--config", ab.config, "base config file");
    ablate->add_option("--steps", ab.steps);
    ablate->add_option("--seeds", ab.seeds);
    ablate->add_option("--probe-epochs", ab.probe_epochs);
    ablate->add_option("--probe-lr", ab.probe_lr);
    ablate->add_option("--clips-per-video", ab.clips_per_video);

    std::vector<std::string> rargs(args.rbegin(), args.rend());
    try {
        app.parse(rargs);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (gen->parsed()) return cmd_gen_data(gd, out);
        if (sample->parsed()) return cmd_sample(sa, out);
        if (gc->parsed()) return cmd_grad_check(gc_seed, out);
        if (pre->parsed()) {
            TrainConfig cfg;
            if (!pt_config.empty()) cfg = load_train_config(pt_config);
            if (*o_out) cfg.checkpoint_dir = pt.checkpoint_dir;
            if (*o_metrics) cfg.metrics_path = pt.metrics_path;
            if (*o_epochs) cfg.epochs = pt.epochs;
            if (*o_steps) cfg.max_steps = pt.max_steps;
            if (*o_batch) cfg.batch_videos = pt.batch_videos;
            if (*o_l0) cfg.sampler.clip_len = pt.sampler.clip_len;
            if (*o_imin) cfg.sampler.inc_min = pt.sampler.inc_min;
            if (*o_imax) cfg.sampler.inc_max = pt.sampler.inc_max;
            if (*o_lr) cfg.sgd.lr = pt.sgd.lr;
            if (*o_mom) cfg.sgd.momentum = pt.sgd.momentum;
            if (*o_wd) cfg.sgd.weight_decay = pt.sgd.weight_decay;
            if (*o_lrd) cfg.sgd.lr_decay_epochs = pt.sgd.lr_decay_epochs;
            if (*o_alpha) cfg.weights.alpha = pt.weights.alpha;
            if (*o_beta) cfg.weights.beta = pt.weights.beta;
            if (*o_lambda) cfg.weights.lambda = pt.weights.lambda;
            if (*o_jit) cfg.augment.enabled = pt.augment.enabled;
            if (*o_flip) cfg.augment.flip_prob = pt.augment.flip_prob;
            if (*o_crop) {
                cfg.augment.crop_h = pt.augment.crop_h;
                cfg.augment.crop_w = pt.augment.crop_w;
            }
            if (*o_ch) cfg.encoder.in_channels = pt.encoder.in_channels;
            if (*o_seed) cfg.seed = pt.seed;
            if (*o_thr) cfg.threads = pt.threads;
            const TrainResult r = pretrain(cfg, read_manifest(pt_data));
            out << "trained " << r.steps << " steps (" << r.epochs << " epochs), final loss "
                << r.final_loss << ", checkpoint " << r.checkpoint_path << '\n';
            return 0;
        }
        if (probe->parsed()) return cmd_probe(pb, out);
        if (retrieve->parsed()) return cmd_retrieve(rt, rt_query, out);
        if (ablate->parsed()) {
            TrainConfig base;
            if (!ab.config.empty()) base = load_train_config(ab.config);
            return cmd_ablate(ab, base, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    err << "error: no subcommand\n";
    return 1;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace vid
