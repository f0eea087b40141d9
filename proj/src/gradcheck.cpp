#include "vid/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "vid/encoder.hpp"
#include "vid/errors.hpp"
#include "vid/objectives.hpp"
#include "vid/kernels.hpp"
#include "vid/rng.hpp"

namespace vid {

namespace {

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-2});
}

double eval_scalar(const std::vector<Tensor>& inputs,
                   const std::function<NodeRef(Graph&, const std::vector<NodeRef>&)>& builder) {
    Graph g;
    std::vector<NodeRef> nodes;
    nodes.reserve(inputs.size());
    for (const auto& t : inputs) nodes.push_back(g.input(t));
    return g.val(builder(g, nodes))[0];
}

}  // namespace

double finite_diff_max_rel_err(
    const std::vector<Tensor>& inputs,
    const std::function<NodeRef(Graph&, const std::vector<NodeRef>&)>& builder, double eps) {
    // Analytic gradients.
    Graph g;
    std::vector<NodeRef> nodes;
    nodes.reserve(inputs.size());
    for (const auto& t : inputs) nodes.push_back(g.param(t));
    g.backward(builder(g, nodes));
    std::vector<Tensor> analytic;
    analytic.reserve(inputs.size());
    for (const auto& n : nodes) analytic.push_back(g.grad(n));

    double worst = 0.0;
    std::vector<Tensor> work = inputs;
    for (std::size_t t = 0; t < work.size(); ++t) {
        for (std::int64_t i = 0; i < work[t].numel(); ++i) {
            const double saved = work[t][i];
            work[t][i] = saved + eps;
            const double hi = eval_scalar(work, builder);
            work[t][i] = saved - eps;
            const double lo = eval_scalar(work, builder);
            work[t][i] = saved;
            const double fd = (hi - lo) / (2.0 * eps);
            worst = std::max(worst, rel_err(analytic[t][i], fd));
        }
    }
    return worst;
}

namespace {

Tensor rand_tensor(std::vector<int> shape, RngStream& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (double& v : t.data) v = rng.uniform_real(-scale, scale);
    return t;
}

// Values bounded away from zero, for kinked ops.
Tensor rand_tensor_offzero(std::vector<int> shape, RngStream& rng, double margin = 0.15) {
    Tensor t(std::move(shape));
    for (double& v : t.data) {
        const double u = rng.uniform_real(margin, 1.0);
        v = rng.bernoulli(0.5) ? u : -u;
    }
    return t;
}

GradCheckResult check(const std::string& op, double tol, const std::vector<Tensor>& inputs,
                      const std::function<NodeRef(Graph&, const std::vector<NodeRef>&)>& builder) {
    GradCheckResult r;
    r.op = op;
    r.tol = tol;
    r.max_rel_err = finite_diff_max_rel_err(inputs, builder);
    r.pass = r.max_rel_err <= tol;
    return r;
}

GradCheckResult composite_check(std::uint64_t seed) {
    // Tiny encoder + heads + default-weight total loss, N=2 videos.
    EncoderSpec spec;
    spec.in_channels = 1;
    spec.stages = {{3, {3, 3, 3}, {1, 2, 2}, {1, 1, 1}}, {4, {3, 3, 3}, {2, 2, 2}, {1, 1, 1}}};
    HeadsConfig hc;
    hc.feature_dim = spec.feature_dim();
    hc.loc_classes = 5;
    hc.len_classes = 3;
    hc.proj_dim = 4;

    RngStream rng(seed);
    ParamStore store;
    RngStream enc_rng = rng.split(0), head_rng = rng.split(1);
    const EncoderParams enc = init_encoder(store, spec, enc_rng);
    const HeadsParams heads = init_heads(store, hc, head_rng);

    RngStream data_rng = rng.split(2);
    const Tensor clips = rand_tensor({4, 1, 6, 8, 8}, data_rng, 0.5);
    const std::vector<int> loc_labels{0, 3, 1, 4};
    const std::vector<int> len_labels{2, 0, 1, 2};
    const std::vector<int> video_ids{7, 7, 9, 9};
    const LossWeights weights;  // defaults (1, 0.1, 0.1)

    auto loss_of = [&](const ParamStore& s) {
        Graph g;
        std::vector<NodeRef> params;
        for (int i = 0; i < s.size(); ++i) params.push_back(g.input(s.value(i)));
        const NodeRef feats = encoder_forward(g, g.input(clips), spec, enc, params);
        BatchOutputs batch = apply_heads(g, feats, heads, params);
        batch.loc_labels = loc_labels;
        batch.len_labels = len_labels;
        batch.video_ids = video_ids;
        return g.val(total_loss(g, batch, weights))[0];
    };

    // Analytic gradient w.r.t. every parameter.
    Graph g;
    std::vector<NodeRef> params;
    for (int i = 0; i < store.size(); ++i) params.push_back(g.param(store.value(i)));
    const NodeRef feats = encoder_forward(g, g.input(clips), spec, enc, params);
    BatchOutputs batch = apply_heads(g, feats, heads, params);
    batch.loc_labels = loc_labels;
    batch.len_labels = len_labels;
    batch.video_ids = video_ids;
    g.backward(total_loss(g, batch, weights));

    RngStream dir_rng = rng.split(3);
    const double eps = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        // Random unit direction over the whole parameter vector.
        std::vector<Tensor> dir;
        double norm2 = 0.0;
        for (int i = 0; i < store.size(); ++i) {
            dir.push_back(rand_tensor(store.value(i).shape, dir_rng));
            for (double v : dir.back().data) norm2 += v * v;
        }
        const double inv_norm = 1.0 / std::sqrt(norm2);
        double analytic = 0.0;
        for (int i = 0; i < store.size(); ++i) {
            const Tensor& gi = g.grad(params[static_cast<std::size_t>(i)]);
            for (std::int64_t e = 0; e < gi.numel(); ++e)
                analytic += gi[e] * dir[static_cast<std::size_t>(i)][e] * inv_norm;
        }
        ParamStore hi = store, lo = store;
        for (int i = 0; i < store.size(); ++i) {
            hi.value(i).add_scaled(dir[static_cast<std::size_t>(i)], eps * inv_norm);
            lo.value(i).add_scaled(dir[static_cast<std::size_t>(i)], -eps * inv_norm);
        }
        const double fd = (loss_of(hi) - loss_of(lo)) / (2.0 * eps);
        worst = std::max(worst, rel_err(analytic, fd));
    }

    GradCheckResult r;
    r.op = "composite encoder+total_loss (directional)";
    r.tol = 1e-3;
    r.max_rel_err = worst;
    r.pass = worst <= r.tol;
    return r;
}

}  // namespace

std::vector<GradCheckResult> run_grad_checks(std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<GradCheckResult> results;

    {
        RngStream r = rng.split(1);
        const Tensor x = rand_tensor({2, 2, 3, 4, 5}, r);
        const Tensor w = rand_tensor({3, 2, 2, 2, 2}, r);
        const Tensor b = rand_tensor({3}, r);
        const Conv3dDims d = conv3d_dims(x.shape, w.shape, {1, 2, 1}, {1, 0, 1});
        const Tensor probe = rand_tensor({d.n, d.cout, d.to, d.ho, d.wo}, r);
        results.push_back(check("conv3d", 1e-4, {x, w, b}, [probe](Graph& g, const std::vector<NodeRef>& in) {
            return g.inner(g.conv3d(in[0], in[1], in[2], {1, 2, 1}, {1, 0, 1}), probe);
        }));
    }
    {
        RngStream r = rng.split(2);
        const Tensor x = rand_tensor({3, 4}, r);
        const Tensor w = rand_tensor({4, 5}, r);
        const Tensor b = rand_tensor({5}, r);
        const Tensor probe = rand_tensor({3, 5}, r);
        results.push_back(check("affine", 1e-4, {x, w, b}, [probe](Graph& g, const std::vector<NodeRef>& in) {
            return g.inner(g.affine(in[0], in[1], in[2]), probe);
        }));
    }
    {
        RngStream r = rng.split(3);
        const Tensor x = rand_tensor_offzero({3, 7}, r);
        const Tensor probe = rand_tensor({3, 7}, r);
        results.push_back(check("relu", 1e-4, {x}, [probe](Graph& g, const std::vector<NodeRef>& in) {
            return g.inner(g.relu(in[0]), probe);
        }));
    }
    {
        RngStream r = rng.split(4);
        const Tensor x = rand_tensor({2, 3, 2, 3, 2}, r);
        const Tensor probe = rand_tensor({2, 3}, r);
        results.push_back(
            check("global_avg_pool", 1e-4, {x}, [probe](Graph& g, const std::vector<NodeRef>& in) {
                return g.inner(g.global_avg_pool(in[0]), probe);
            }));
    }
    {
        RngStream r = rng.split(5);
        const Tensor z = rand_tensor({4, 6}, r, 2.0);
        const std::vector<int> labels{2, 0, 5, 3};
        results.push_back(
            check("softmax_xent", 1e-4, {z}, [labels](Graph& g, const std::vector<NodeRef>& in) {
                return g.softmax_xent(in[0], labels);
            }));
    }
    {
        RngStream r = rng.split(6);
        const Tensor u = rand_tensor_offzero({9}, r);
        const Tensor v = rand_tensor_offzero({9}, r);
        results.push_back(check("cosine", 1e-4, {u, v}, [](Graph& g, const std::vector<NodeRef>& in) {
            return g.cosine(in[0], in[1]);
        }));
    }
    {
        RngStream r = rng.split(7);
        const Tensor z = rand_tensor_offzero({6, 5}, r);
        const std::vector<int> sibling{1, 0, 3, 2, 5, 4};
        results.push_back(check("icl_loss", 1e-4, {z}, [sibling](Graph& g, const std::vector<NodeRef>& in) {
            return g.icl_loss(in[0], sibling);
        }));
    }
    {
        RngStream r = rng.split(8);
        const Tensor a = rand_tensor({1}, r);
        const Tensor b = rand_tensor({1}, r);
        const Tensor c = rand_tensor({1}, r);
        results.push_back(check("wsum", 1e-4, {a, b, c}, [](Graph& g, const std::vector<NodeRef>& in) {
            return g.wsum({in[0], in[1], in[2]}, {1.0, 0.1, 0.1});
        }));
    }
    {
        RngStream r = rng.split(9);
        const Tensor x = rand_tensor({4, 3}, r);
        const Tensor probe = rand_tensor({4, 3}, r);
        results.push_back(check("inner", 1e-4, {x}, [probe](Graph& g, const std::vector<NodeRef>& in) {
            return g.inner(in[0], probe);
        }));
    }

    results.push_back(composite_check(seed + 17));
    return results;
}

}  // namespace vid
