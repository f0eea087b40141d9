#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vid/errors.hpp"
#include "vid/gradcheck.hpp"
#include "vid/graph.hpp"
#include "vid/optim.hpp"
#include "vid/rng.hpp"

using namespace vid;

TEST_CASE("d/dx of x*x at x=3 is 6") {
    // x*x via cosine-free plumbing: inner(x, x) is not a graph op, so use
    // affine with x as both input and weight: y = x * x (1x1 matrices).
    Graph g;
    const NodeRef x = g.param(Tensor({1, 1}, {3.0}));
    const NodeRef y = g.affine(x, x, g.input(Tensor::zeros({1})));
    g.backward(y);
    CHECK(g.grad(x)[0] == doctest::Approx(6.0));
}

TEST_CASE("gradients accumulate across fan-out") {
    // L = <u, r> + <u, r>  =>  dL/du = 2r
    Graph g;
    const NodeRef u = g.param(Tensor({3}, {1.0, 2.0, 3.0}));
    const Tensor r({3}, {0.5, -1.0, 2.0});
    const NodeRef a = g.inner(u, r);
    const NodeRef b = g.inner(u, r);
    g.backward(g.wsum({a, b}, {1.0, 1.0}));
    for (int i = 0; i < 3; ++i) CHECK(g.grad(u)[i] == doctest::Approx(2.0 * r[i]));
}

TEST_CASE("backward rejects non-scalar roots") {
    Graph g;
    const NodeRef x = g.param(Tensor::zeros({2, 2}));
    const NodeRef y = g.relu(x);
    CHECK_THROWS_AS(g.backward(y), ShapeError);
}

TEST_CASE("no gradient flows into plain inputs") {
    Graph g;
    const NodeRef x = g.input(Tensor({2}, {1.0, 2.0}));
    const NodeRef l = g.inner(x, Tensor({2}, {1.0, 1.0}));
    g.backward(l);
    CHECK(g.grad(x)[0] == 0.0);
    CHECK(g.grad(x)[1] == 0.0);
}

TEST_CASE("every primitive passes the finite-difference oracle") {
    for (const auto& r : run_grad_checks(2026)) {
        INFO(r.op, " max_rel_err=", r.max_rel_err);
        CHECK(r.pass);
        CHECK(r.max_rel_err <= r.tol);
    }
}

TEST_CASE("grad checks are seed-robust") {
    for (const auto& r : run_grad_checks(7)) {
        INFO(r.op);
        CHECK(r.pass);
    }
}

TEST_CASE("sgd leaves params alone with zero grads and zero decay") {
    SgdConfig cfg;
    cfg.weight_decay = 0.0;
    Tensor p({3}, {1.0, -2.0, 3.0});
    const Tensor p0 = p;
    Tensor v = Tensor::zeros({3});
    sgd_step(p, Tensor::zeros({3}), v, cfg, cfg.lr);
    for (int i = 0; i < 3; ++i) CHECK(p[i] == p0[i]);
}

TEST_CASE("one sgd step without momentum moves by lr * grad") {
    SgdConfig cfg;
    cfg.momentum = 0.0;
    cfg.weight_decay = 0.0;
    cfg.lr = 0.1;
    Tensor p({1}, {1.0});
    Tensor v = Tensor::zeros({1});
    sgd_step(p, Tensor({1}, {1.0}), v, cfg, cfg.lr);
    CHECK(p[0] == doctest::Approx(0.9));
}

TEST_CASE("momentum accumulates: two steps on constant grad 1 drop 1 + 1.9") {
    SgdConfig cfg;
    cfg.momentum = 0.9;
    cfg.weight_decay = 0.0;
    cfg.lr = 1.0;
    Tensor p({1}, {10.0});
    Tensor v = Tensor::zeros({1});
    const Tensor grad({1}, {1.0});
    sgd_step(p, grad, v, cfg, cfg.lr);
    CHECK(p[0] == doctest::Approx(9.0));
    sgd_step(p, grad, v, cfg, cfg.lr);
    CHECK(p[0] == doctest::Approx(10.0 - 1.0 - 1.9));
}

TEST_CASE("weight decay couples into the gradient") {
    SgdConfig cfg;
    cfg.momentum = 0.0;
    cfg.weight_decay = 0.5;
    cfg.lr = 0.1;
    Tensor p({1}, {2.0});
    Tensor v = Tensor::zeros({1});
    sgd_step(p, Tensor::zeros({1}), v, cfg, cfg.lr);
    CHECK(p[0] == doctest::Approx(2.0 - 0.1 * (0.5 * 2.0)));
}

TEST_CASE("learning-rate schedule divides by 10 at the configured interval") {
    SgdConfig cfg;
    cfg.lr = 0.001;
    cfg.lr_decay_epochs = 6;
    CHECK(scheduled_lr(cfg, 0) == doctest::Approx(0.001));
    CHECK(scheduled_lr(cfg, 5) == doctest::Approx(0.001));
    CHECK(scheduled_lr(cfg, 6) == doctest::Approx(0.0001));
    CHECK(scheduled_lr(cfg, 17) == doctest::Approx(0.00001));
    cfg.lr_decay_epochs = 0;
    CHECK(scheduled_lr(cfg, 100) == doctest::Approx(0.001));
}

TEST_CASE("softmax_xent under SGD decreases on a separable toy problem") {
    // Two well-separated 2-d blobs, full-batch gradient descent.
    RngStream rng(33);
    const int n = 40;
    Tensor x({n, 2});
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int cls = i % 2;
        labels[static_cast<std::size_t>(i)] = cls;
        x[static_cast<std::int64_t>(i) * 2] = (cls ? 2.0 : -2.0) + rng.uniform_real(-0.5, 0.5);
        x[static_cast<std::int64_t>(i) * 2 + 1] = rng.uniform_real(-0.5, 0.5);
    }

    SgdConfig sgd;
    sgd.lr = 0.05;
    sgd.momentum = 0.0;
    sgd.weight_decay = 0.0;
    Tensor w = Tensor::zeros({2, 2});
    Tensor b = Tensor::zeros({2});
    Tensor vw = Tensor::zeros({2, 2});
    Tensor vb = Tensor::zeros({2});

    double prev = std::numeric_limits<double>::infinity();
    int decreases = 0;
    for (int step = 0; step < 100; ++step) {
        Graph g;
        const NodeRef wn = g.param(w);
        const NodeRef bn = g.param(b);
        const NodeRef loss = g.softmax_xent(g.affine(g.input(x), wn, bn), labels);
        const double v = g.val(loss)[0];
        if (v < prev) ++decreases;
        prev = v;
        g.backward(loss);
        sgd_step(w, g.grad(wn), vw, sgd, sgd.lr);
        sgd_step(b, g.grad(bn), vb, sgd, sgd.lr);
    }
    CHECK(decreases == 100);
    CHECK(prev < std::log(2.0) * 0.2);
}
