#include "vid/graph.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "vid/errors.hpp"
#include "vid/kernels.hpp"

namespace vid {

namespace {
constexpr double kNormEps = 1e-12;
}

int Graph::add_node(Tensor value, bool needs_grad, std::function<void(Graph&)> fn) {
    if (checked_) check_finite(value, "node");
    nodes_.push_back(Node{std::move(value), Tensor{}, needs_grad, std::move(fn)});
    return static_cast<int>(nodes_.size()) - 1;
}

const Graph::Node& Graph::at(NodeRef r) const {
    if (r.id < 0 || r.id >= static_cast<int>(nodes_.size())) throw ShapeError("graph: invalid node ref");
    return nodes_[static_cast<std::size_t>(r.id)];
}

Graph::Node& Graph::at(NodeRef r) {
    if (r.id < 0 || r.id >= static_cast<int>(nodes_.size())) throw ShapeError("graph: invalid node ref");
    return nodes_[static_cast<std::size_t>(r.id)];
}

Tensor* Graph::grad_sink(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad) return nullptr;
    if (n.grad.data.empty()) n.grad = Tensor::zeros(n.value.shape);
    return &n.grad;
}

bool Graph::has_grad(int id) const {
    return !nodes_[static_cast<std::size_t>(id)].grad.data.empty();
}

void Graph::check_finite(const Tensor& t, const char* op) const {
    if (!t.all_finite()) throw DegenerateInputError(std::string("non-finite values in ") + op);
}

NodeRef Graph::input(Tensor value) {
    return {add_node(std::move(value), false, nullptr)};
}

NodeRef Graph::param(Tensor value) {
    return {add_node(std::move(value), true, nullptr)};
}

const Tensor& Graph::val(NodeRef r) const {
    return at(r).value;
}

const Tensor& Graph::grad(NodeRef r) const {
    const Node& n = at(r);
    if (n.grad.data.empty()) {
        static thread_local Tensor zero;
        zero = Tensor::zeros(n.value.shape);
        return zero;
    }
    return n.grad;
}

void Graph::backward(NodeRef root) {
    Node& r = at(root);
    if (r.value.numel() != 1) throw ShapeError("backward: root must be a scalar");
    for (auto& n : nodes_) n.grad = Tensor{};
    r.grad = Tensor::scalar(1.0);
    for (int i = root.id; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (!n.backward_fn || !n.needs_grad || n.grad.data.empty()) continue;
        n.backward_fn(*this);
    }
}

NodeRef Graph::conv3d(NodeRef x, NodeRef w, NodeRef b, std::array<int, 3> stride, std::array<int, 3> pad) {
    const Tensor& xv = at(x).value;
    const Tensor& wv = at(w).value;
    const Tensor& bv = at(b).value;
    const Conv3dDims d = conv3d_dims(xv.shape, wv.shape, stride, pad);
    if (bv.numel() != d.cout) throw ShapeError("conv3d: bias size must equal output channels");

    Tensor y({d.n, d.cout, d.to, d.ho, d.wo});
    kernels::conv3d_forward(xv.data.data(), wv.data.data(), bv.data.data(), y.data.data(), d);
    if (checked_) check_finite(y, "conv3d");

    const bool needs = at(x).needs_grad || at(w).needs_grad || at(b).needs_grad;
    const int xi = x.id, wi = w.id, bi = b.id;
    const int id = add_node(std::move(y), needs, nullptr);
    nodes_[static_cast<std::size_t>(id)].backward_fn = [d, xi, wi, bi, id](Graph& g) {
        const Tensor& go = g.nodes_[static_cast<std::size_t>(id)].grad;
        const Tensor& xt = g.nodes_[static_cast<std::size_t>(xi)].value;
        const Tensor& wt = g.nodes_[static_cast<std::size_t>(wi)].value;
        if (Tensor* dx = g.grad_sink(xi)) {
            Tensor scratch(xt.shape);
            kernels::conv3d_backward_input(go.data.data(), wt.data.data(), scratch.data.data(), d);
            dx->add_scaled(scratch, 1.0);
        }
        Tensor* dw = g.grad_sink(wi);
        Tensor* db = g.grad_sink(bi);
        if (dw || db) {
            Tensor sw(wt.shape);
            Tensor sb({d.cout});
            kernels::conv3d_backward_weights(xt.data.data(), go.data.data(), sw.data.data(),
                                             sb.data.data(), d);
            if (dw) dw->add_scaled(sw, 1.0);
            if (db) db->add_scaled(sb, 1.0);
        }
    };
    return {id};
}

NodeRef Graph::affine(NodeRef x, NodeRef w, NodeRef b) {
    const Tensor& xv = at(x).value;
    const Tensor& wv = at(w).value;
    const Tensor& bv = at(b).value;
    if (xv.ndim() != 2 || wv.ndim() != 2) throw ShapeError("affine: x and w must be 2-d");
    const int n = xv.dim(0), d = xv.dim(1), m = wv.dim(1);
    if (wv.dim(0) != d) throw ShapeError("affine: inner dimensions mismatch");
    if (bv.numel() != m) throw ShapeError("affine: bias size mismatch");

    Tensor y({n, m});
    kernels::affine_forward(xv.data.data(), wv.data.data(), bv.data.data(), y.data.data(), n, d, m);
    if (checked_) check_finite(y, "affine");

    const bool needs = at(x).needs_grad || at(w).needs_grad || at(b).needs_grad;
    const int xi = x.id, wi = w.id, bi = b.id;
    const int id = add_node(std::move(y), needs, nullptr);
    nodes_[static_cast<std::size_t>(id)].backward_fn = [n, d, m, xi, wi, bi, id](Graph& g) {
        const Tensor& go = g.nodes_[static_cast<std::size_t>(id)].grad;
        const Tensor& xt = g.nodes_[static_cast<std::size_t>(xi)].value;
        const Tensor& wt = g.nodes_[static_cast<std::size_t>(wi)].value;
        Tensor* dx = g.grad_sink(xi);
        Tensor* dw = g.grad_sink(wi);
        Tensor* db = g.grad_sink(bi);
        Tensor sx = dx ? Tensor(xt.shape) : Tensor{};
        Tensor sw = dw ? Tensor(wt.shape) : Tensor{};
        Tensor sb = db ? Tensor({m}) : Tensor{};
        kernels::affine_backward(xt.data.data(), wt.data.data(), go.data.data(),
                                 dx ? sx.data.data() : nullptr, dw ? sw.data.data() : nullptr,
                                 db ? sb.data.data() : nullptr, n, d, m);
        if (dx) dx->add_scaled(sx, 1.0);
        if (dw) dw->add_scaled(sw, 1.0);
        if (db) db->add_scaled(sb, 1.0);
    };
    return {id};
}

NodeRef Graph::relu(NodeRef x) {
    const Tensor& xv = at(x).value;
    Tensor y(xv.shape);
    for (std::int64_t i = 0; i < xv.numel(); ++i) y[i] = xv[i] > 0.0 ? xv[i] : 0.0;

    const bool needs = at(x).needs_grad;
    const int xi = x.id;
    const int id = add_node(std::move(y), needs, nullptr);
    nodes_[static_cast<std::size_t>(id)].backward_fn = [xi, id](Graph& g) {
        Tensor* dx = g.grad_sink(xi);
        if (!dx) return;
        const Tensor& go = g.nodes_[static_cast<std::size_t>(id)].grad;
        const Tensor& xt = g.nodes_[static_cast<std::size_t>(xi)].value;
        for (std::int64_t i = 0; i < xt.numel(); ++i)
            if (xt[i] > 0.0) (*dx)[i] += go[i];
    };
    return {id};
}

NodeRef Graph::global_avg_pool(NodeRef x) {
    const Tensor& xv = at(x).value;
    if (xv.ndim() != 5) throw ShapeError("global_avg_pool: input must be N x C x T x H x W");
    const int n = xv.dim(0), c = xv.dim(1);
    const std::int64_t spatial = static_cast<std::int64_t>(xv.dim(2)) * xv.dim(3) * xv.dim(4);

    Tensor y({n, c});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) {
            const std::int64_t base = (static_cast<std::int64_t>(i) * c + j) * spatial;
            double acc = 0.0;
            for (std::int64_t s = 0; s < spatial; ++s) acc += xv[base + s];
            y[static_cast<std::int64_t>(i) * c + j] = acc / static_cast<double>(spatial);
        }

    const bool needs = at(x).needs_grad;
    const int xi = x.id;
    const int id = add_node(std::move(y), needs, nullptr);
    nodes_[static_cast<std::size_t>(id)].backward_fn = [n, c, spatial, xi, id](Graph& g) {
        Tensor* dx = g.grad_sink(xi);
        if (!dx) return;
        const Tensor& go = g.nodes_[static_cast<std::size_t>(id)].grad;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < c; ++j) {
                const double v = go[static_cast<std::int64_t>(i) * c + j] / static_cast<double>(spatial);
                const std::int64_t base = (static_cast<std::int64_t>(i) * c + j) * spatial;
                for (std::int64_t s = 0; s < spatial; ++s) (*dx)[base + s] += v;
            }
    };
    return {id};
}

NodeRef Graph::softmax_xent(NodeRef logits, std::vector<int> labels) {
    const Tensor& zv = at(logits).value;
    if (zv.ndim() != 2) throw ShapeError("softmax_xent: logits must be N x K");
    const int n = zv.dim(0), k = zv.dim(1);
    if (static_cast<int>(labels.size()) != n) throw ShapeError("softmax_xent: one label per row required");
    for (int lbl : labels)
        if (lbl < 0 || lbl >= k) throw ShapeError("softmax_xent: label out of range");

    auto probs = std::make_shared<Tensor>(zv.shape);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const std::int64_t base = static_cast<std::int64_t>(i) * k;
        double mx = zv[base];
        for (int j = 1; j < k; ++j) mx = std::max(mx, zv[base + j]);
        double sum = 0.0;
        for (int j = 0; j < k; ++j) sum += std::exp(zv[base + j] - mx);
        const double lse = mx + std::log(sum);
        for (int j = 0; j < k; ++j) (*probs)[base + j] = std::exp(zv[base + j] - lse);
        loss += lse - zv[base + labels[static_cast<std::size_t>(i)]];
    }
    loss /= n;

    const bool needs = at(logits).needs_grad;
    const int zi = logits.id;
    const int id = add_node(Tensor::scalar(loss), needs, nullptr);
    nodes_[static_cast<std::size_t>(id)].backward_fn = [n, k, zi, id, probs,
                                                        labels = std::move(labels)](Graph& g) {
        Tensor* dz = g.grad_sink(zi);
        if (!dz) return;
        const double go = g.nodes_[static_cast<std::size_t>(id)].grad[0];
        const double scale = go / n;
        for (int i = 0; i < n; ++i) {
            const std::int64_t base = static_cast<std::int64_t>(i) * k;
            for (int j = 0; j < k; ++j) {
                const double onehot = (j == labels[static_cast<std::size_t>(i)]) ? 1.0 : 0.0;
                (*dz)[base + j] += scale * ((*probs)[base + j] - onehot);
            }
        }
    };
    return {id};
}

NodeRef Graph::cosine(NodeRef u, NodeRef v) {
    const Tensor& uv = at(u).value;
    const Tensor& vv = at(v).value;
    if (!uv.same_shape(vv)) throw ShapeError("cosine: shape mismatch");

    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::int64_t i = 0; i < uv.numel(); ++i) {
        dot += uv[i] * vv[i];
        nu += uv[i] * uv[i];
        nv += vv[i] * vv[i];
    }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    if (nu < kNormEps || nv < kNormEps) throw DegenerateInputError("cosine: zero-norm vector");
    const double s = dot / (nu * nv);

    const bool needs = at(u).needs_grad || at(v).needs_grad;
    const int ui = u.id, vi = v.id;
    const int id = add_node(Tensor::scalar(s), needs, nullptr);
    nodes_[static_cast<std::size_t>(id)].backward_fn = [ui, vi, id, s, nu, nv](Graph& g) {
        const double go = g.nodes_[static_cast<std::size_t>(id)].grad[0];
        const Tensor& ut = g.nodes_[static_cast<std::size_t>(ui)].value;
        const Tensor& vt = g.nodes_[static_cast<std::size_t>(vi)].value;
        if (Tensor* du = g.grad_sink(ui))
            for (std::int64_t i = 0; i < ut.numel(); ++i)
                (*du)[i] += go * (vt[i] / (nu * nv) - s * ut[i] / (nu * nu));
        if (Tensor* dv = g.grad_sink(vi))
            for (std::int64_t i = 0; i < vt.numel(); ++i)
                (*dv)[i] += go * (ut[i] / (nu * nv) - s * vt[i] / (nv * nv));
    };
    return {id};
}

NodeRef Graph::icl_loss(NodeRef proj, std::vector<int> sibling, double temperature) {
    const Tensor& zv = at(proj).value;
    if (zv.ndim() != 2) throw ShapeError("icl_loss: projections must be 2N x d");
    const int rows = zv.dim(0), dim = zv.dim(1);
    if (rows < 4 || rows % 2 != 0)
        throw ShapeError("icl_loss: need at least two videos (four clips), an even row count");
    if (static_cast<int>(sibling.size()) != rows) throw ShapeError("icl_loss: sibling size mismatch");
    for (int i = 0; i < rows; ++i) {
        const int s = sibling[static_cast<std::size_t>(i)];
        if (s < 0 || s >= rows || s == i || sibling[static_cast<std::size_t>(s)] != i)
            throw ShapeError("icl_loss: sibling must be a fixed-point-free involution");
    }
    if (temperature <= 0.0) throw ConfigError("icl_loss: temperature must be positive");

    // Normalized rows and pairwise cosines.
    auto zhat = std::make_shared<Tensor>(zv.shape);
    auto norms = std::make_shared<std::vector<double>>(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i) {
        double nn = 0.0;
        const std::int64_t base = static_cast<std::int64_t>(i) * dim;
        for (int j = 0; j < dim; ++j) nn += zv[base + j] * zv[base + j];
        nn = std::sqrt(nn);
        if (nn < kNormEps) throw DegenerateInputError("icl_loss: zero-norm projection row");
        (*norms)[static_cast<std::size_t>(i)] = nn;
        for (int j = 0; j < dim; ++j) (*zhat)[base + j] = zv[base + j] / nn;
    }
    auto cos = std::make_shared<Tensor>(std::vector<int>{rows, rows});
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < rows; ++j) {
            double acc = 0.0;
            for (int c = 0; c < dim; ++c)
                acc += (*zhat)[static_cast<std::int64_t>(i) * dim + c] *
                       (*zhat)[static_cast<std::int64_t>(j) * dim + c];
            (*cos)[static_cast<std::int64_t>(i) * rows + j] = acc;
        }

    // softmax over k != i of cos/temperature, and the per-clip losses
    auto p = std::make_shared<Tensor>(std::vector<int>{rows, rows});
    double loss = 0.0;
    for (int i = 0; i < rows; ++i) {
        double mx = -2.0 / temperature;
        for (int k = 0; k < rows; ++k)
            if (k != i) mx = std::max(mx, (*cos)[static_cast<std::int64_t>(i) * rows + k] / temperature);
        double sum = 0.0;
        for (int k = 0; k < rows; ++k) {
            if (k == i) continue;
            sum += std::exp((*cos)[static_cast<std::int64_t>(i) * rows + k] / temperature - mx);
        }
        const double lse = mx + std::log(sum);
        for (int k = 0; k < rows; ++k)
            (*p)[static_cast<std::int64_t>(i) * rows + k] =
                (k == i) ? 0.0
                         : std::exp((*cos)[static_cast<std::int64_t>(i) * rows + k] / temperature - lse);
        loss += lse - (*cos)[static_cast<std::int64_t>(i) * rows +
                             sibling[static_cast<std::size_t>(i)]] /
                          temperature;
    }
    loss /= rows;

    const bool needs = at(proj).needs_grad;
    const int zi = proj.id;
    const int id = add_node(Tensor::scalar(loss), needs, nullptr);
    nodes_[static_cast<std::size_t>(id)].backward_fn = [rows, dim, zi, id, zhat, norms, cos, p,
                                                        temperature,
                                                        sibling = std::move(sibling)](Graph& g) {
        Tensor* dz = g.grad_sink(zi);
        if (!dz) return;
        const double go = g.nodes_[static_cast<std::size_t>(id)].grad[0];
        // dL/dcos_(i,k), ordered pairs; includes the 1/temperature factor.
        Tensor m({rows, rows});
        for (int i = 0; i < rows; ++i)
            for (int k = 0; k < rows; ++k) {
                if (k == i) continue;
                const double delta = (k == sibling[static_cast<std::size_t>(i)]) ? 1.0 : 0.0;
                m[static_cast<std::int64_t>(i) * rows + k] =
                    go * ((*p)[static_cast<std::int64_t>(i) * rows + k] - delta) /
                    (rows * temperature);
            }
        // dz_i += sum_k (m_ik + m_ki) * (zhat_k - cos_ik * zhat_i) / |z_i|
        for (int i = 0; i < rows; ++i) {
            const double inv_norm = 1.0 / (*norms)[static_cast<std::size_t>(i)];
            for (int k = 0; k < rows; ++k) {
                if (k == i) continue;
                const double coeff = m[static_cast<std::int64_t>(i) * rows + k] +
                                     m[static_cast<std::int64_t>(k) * rows + i];
                if (coeff == 0.0) continue;
                const double cik = (*cos)[static_cast<std::int64_t>(i) * rows + k];
                for (int c = 0; c < dim; ++c)
                    (*dz)[static_cast<std::int64_t>(i) * dim + c] +=
                        coeff * inv_norm *
                        ((*zhat)[static_cast<std::int64_t>(k) * dim + c] -
                         cik * (*zhat)[static_cast<std::int64_t>(i) * dim + c]);
            }
        }
    };
    return {id};
}

NodeRef Graph::wsum(const std::vector<NodeRef>& terms, const std::vector<double>& coeffs) {
    if (terms.empty() || terms.size() != coeffs.size())
        throw ShapeError("wsum: need matching non-empty terms and coefficients");
    double acc = 0.0;
    bool needs = false;
    std::vector<int> ids;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const Tensor& tv = at(terms[i]).value;
        if (tv.numel() != 1) throw ShapeError("wsum: terms must be scalars");
        acc += coeffs[i] * tv[0];
        needs = needs || at(terms[i]).needs_grad;
        ids.push_back(terms[i].id);
    }
    const int id = add_node(Tensor::scalar(acc), needs, nullptr);
    nodes_[static_cast<std::size_t>(id)].backward_fn = [ids, coeffs, id](Graph& g) {
        const double go = g.nodes_[static_cast<std::size_t>(id)].grad[0];
        for (std::size_t i = 0; i < ids.size(); ++i)
            if (Tensor* d = g.grad_sink(ids[i])) (*d)[0] += go * coeffs[i];
    };
    return {id};
}

NodeRef Graph::inner(NodeRef x, Tensor weights) {
    const Tensor& xv = at(x).value;
    if (!xv.same_shape(weights)) throw ShapeError("inner: shape mismatch");
    double acc = 0.0;
    for (std::int64_t i = 0; i < xv.numel(); ++i) acc += xv[i] * weights[i];

    const bool needs = at(x).needs_grad;
    const int xi = x.id;
    auto wts = std::make_shared<Tensor>(std::move(weights));
    const int id = add_node(Tensor::scalar(acc), needs, nullptr);
    nodes_[static_cast<std::size_t>(id)].backward_fn = [xi, id, wts](Graph& g) {
        Tensor* dx = g.grad_sink(xi);
        if (!dx) return;
        const double go = g.nodes_[static_cast<std::size_t>(id)].grad[0];
        dx->add_scaled(*wts, go);
    };
    return {id};
}

int argmax_row(const Tensor& t, int row) {
    if (t.ndim() != 2) throw ShapeError("argmax_row: expects a 2-d tensor");
    const int k = t.dim(1);
    const std::int64_t base = static_cast<std::int64_t>(row) * k;
    int best = 0;
    for (int j = 1; j < k; ++j)
        if (t[base + j] > t[base + best]) best = j;
    return best;
}

}  // namespace vid
