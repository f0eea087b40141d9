#include "vid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "vid/errors.hpp"
#include "vid/graph.hpp"
#include "vid/optim.hpp"

namespace vid {

namespace {

std::vector<double> row_norms(const Tensor& feats) {
    const int n = feats.dim(0), d = feats.dim(1);
    std::vector<double> norms(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) {
            const double v = feats[static_cast<std::int64_t>(i) * d + j];
            acc += v * v;
        }
        norms[static_cast<std::size_t>(i)] = std::sqrt(acc);
    }
    return norms;
}

}  // namespace

RetrievalReport knn_retrieval(const Tensor& query_feats, const std::vector<int>& query_labels,
                              const Tensor& gallery_feats, const std::vector<int>& gallery_labels,
                              std::vector<int> ks, bool same_set) {
    if (query_feats.ndim() != 2 || gallery_feats.ndim() != 2)
        throw ShapeError("retrieval: features must be 2-d");
    if (query_feats.dim(1) != gallery_feats.dim(1))
        throw ShapeError("retrieval: feature dimensions mismatch");
    const int nq = query_feats.dim(0), ng = gallery_feats.dim(0), d = query_feats.dim(1);
    if (ng < 1) throw ShapeError("retrieval: empty gallery");
    if (static_cast<int>(query_labels.size()) != nq || static_cast<int>(gallery_labels.size()) != ng)
        throw ShapeError("retrieval: label counts mismatch");
    if (ks.empty()) throw ConfigError("retrieval: no k values");
    std::sort(ks.begin(), ks.end());

    RetrievalReport report;
    const int max_candidates = same_set ? ng - 1 : ng;
    if (max_candidates < 1) throw ShapeError("retrieval: gallery has no candidates after self-exclusion");
    for (int k : ks) {
        if (k < 1) throw ConfigError("retrieval: k must be >= 1");
        if (k > max_candidates) {
            k = max_candidates;
            report.k_clamped = true;
        }
        report.ks.push_back(k);
    }

    const std::vector<double> qn = row_norms(query_feats);
    const std::vector<double> gn = row_norms(gallery_feats);

    const std::set<int> classes(query_labels.begin(), query_labels.end());
    report.class_ids.assign(classes.begin(), classes.end());
    auto class_of = [&](int label) {
        return static_cast<int>(std::lower_bound(report.class_ids.begin(), report.class_ids.end(), label) -
                                report.class_ids.begin());
    };

    std::vector<std::vector<int>> hits(report.ks.size(),
                                       std::vector<int>(report.class_ids.size(), 0));
    std::vector<int> class_counts(report.class_ids.size(), 0);

    std::vector<std::pair<double, int>> order(static_cast<std::size_t>(ng));
#pragma omp parallel for schedule(static) firstprivate(order)
    for (int q = 0; q < nq; ++q) {
        for (int i = 0; i < ng; ++i) {
            double sim = 0.0;
            if (qn[static_cast<std::size_t>(q)] > 1e-12 && gn[static_cast<std::size_t>(i)] > 1e-12) {
                double dot = 0.0;
                for (int j = 0; j < d; ++j)
                    dot += query_feats[static_cast<std::int64_t>(q) * d + j] *
                           gallery_feats[static_cast<std::int64_t>(i) * d + j];
                sim = dot / (qn[static_cast<std::size_t>(q)] * gn[static_cast<std::size_t>(i)]);
            }
            if (same_set && i == q) sim = -2.0;  // below any cosine, removes self-match
            order[static_cast<std::size_t>(i)] = {sim, i};
        }
        // descending similarity, ties by gallery index
        std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });

        const int cls = class_of(query_labels[static_cast<std::size_t>(q)]);
        int first_hit_rank = ng + 1;
        for (int r = 0; r < ng; ++r) {
            if (gallery_labels[static_cast<std::size_t>(order[static_cast<std::size_t>(r)].second)] ==
                query_labels[static_cast<std::size_t>(q)]) {
                first_hit_rank = r + 1;
                break;
            }
        }
#pragma omp critical
        {
            ++class_counts[static_cast<std::size_t>(cls)];
            for (std::size_t ki = 0; ki < report.ks.size(); ++ki)
                if (first_hit_rank <= report.ks[ki]) ++hits[ki][static_cast<std::size_t>(cls)];
        }
    }

    report.per_class.assign(report.class_ids.size(), std::vector<double>(report.ks.size(), 0.0));
    report.hit_rates.assign(report.ks.size(), 0.0);
    for (std::size_t ki = 0; ki < report.ks.size(); ++ki) {
        int total = 0;
        for (std::size_t c = 0; c < report.class_ids.size(); ++c) {
            total += hits[ki][c];
            report.per_class[c][ki] =
                class_counts[c] ? static_cast<double>(hits[ki][c]) / class_counts[c] : 0.0;
        }
        report.hit_rates[ki] = static_cast<double>(total) / nq;
    }
    return report;
}

std::string RetrievalReport::table() const {
    std::ostringstream os;
    os << "k      ";
    for (int k : ks) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%8d", k);
        os << buf;
    }
    os << "\nhit    ";
    for (double h : hit_rates) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%8.4f", h);
        os << buf;
    }
    os << '\n';
    for (std::size_t c = 0; c < class_ids.size(); ++c) {
        char head[16];
        std::snprintf(head, sizeof(head), "cls %-3d", class_ids[c]);
        os << head;
        for (double h : per_class[c]) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%8.4f", h);
            os << buf;
        }
        os << '\n';
    }
    if (k_clamped) os << "(warning: k clamped to gallery size)\n";
    return os.str();
}

std::string RetrievalReport::csv() const {
    std::ostringstream os;
    os << "class";
    for (int k : ks) os << ",top" << k;
    os << '\n';
    os << "all";
    for (double h : hit_rates) os << ',' << h;
    os << '\n';
    for (std::size_t c = 0; c < class_ids.size(); ++c) {
        os << class_ids[c];
        for (double h : per_class[c]) os << ',' << h;
        os << '\n';
    }
    return os.str();
}

ProbeReport linear_probe(const Tensor& train_feats, const std::vector<int>& train_labels,
                         const Tensor& test_feats, const std::vector<int>& test_labels, int epochs,
                         double lr, RngStream& rng) {
    if (train_feats.ndim() != 2 || test_feats.ndim() != 2) throw ShapeError("probe: features must be 2-d");
    const int n = train_feats.dim(0), d = train_feats.dim(1), m = test_feats.dim(0);
    if (test_feats.dim(1) != d) throw ShapeError("probe: feature dimensions mismatch");
    if (static_cast<int>(train_labels.size()) != n || static_cast<int>(test_labels.size()) != m)
        throw ShapeError("probe: label counts mismatch");
    if (epochs < 0) throw ConfigError("probe: epochs must be >= 0");

    int num_classes = 0;
    for (int lbl : train_labels) {
        if (lbl < 0) throw ShapeError("probe: negative label");
        num_classes = std::max(num_classes, lbl + 1);
    }
    for (int lbl : test_labels) num_classes = std::max(num_classes, lbl + 1);
    if (std::set<int>(train_labels.begin(), train_labels.end()).size() < 2)
        throw DegenerateInputError("probe: training labels contain a single class");

    // Standardize with train statistics.
    std::vector<double> mean(static_cast<std::size_t>(d), 0.0), stddev(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) mean[static_cast<std::size_t>(j)] += train_feats[static_cast<std::int64_t>(i) * d + j];
    for (double& v : mean) v /= n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            const double c = train_feats[static_cast<std::int64_t>(i) * d + j] - mean[static_cast<std::size_t>(j)];
            stddev[static_cast<std::size_t>(j)] += c * c;
        }
    for (double& v : stddev) v = std::max(std::sqrt(v / n), 1e-8);

    auto standardized = [&](const Tensor& feats, int rows) {
        Tensor out({rows, d});
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < d; ++j)
                out[static_cast<std::int64_t>(i) * d + j] =
                    (feats[static_cast<std::int64_t>(i) * d + j] - mean[static_cast<std::size_t>(j)]) /
                    stddev[static_cast<std::size_t>(j)];
        return out;
    };
    const Tensor xtr = standardized(train_feats, n);
    const Tensor xte = standardized(test_feats, m);

    Tensor weight = Tensor::zeros({d, num_classes});
    Tensor bias = Tensor::zeros({num_classes});
    Tensor vel_w = Tensor::zeros({d, num_classes});
    Tensor vel_b = Tensor::zeros({num_classes});
    SgdConfig sgd;
    sgd.lr = lr;
    sgd.momentum = 0.9;
    sgd.weight_decay = 0.0;

    const int batch = std::min(32, n);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.uniform_int(0, i));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
        for (int b0 = 0; b0 + batch <= n; b0 += batch) {
            Tensor xb({batch, d});
            std::vector<int> yb(static_cast<std::size_t>(batch));
            for (int i = 0; i < batch; ++i) {
                const int src = order[static_cast<std::size_t>(b0 + i)];
                yb[static_cast<std::size_t>(i)] = train_labels[static_cast<std::size_t>(src)];
                for (int j = 0; j < d; ++j)
                    xb[static_cast<std::int64_t>(i) * d + j] = xtr[static_cast<std::int64_t>(src) * d + j];
            }
            Graph g;
            const NodeRef w = g.param(weight);
            const NodeRef bb = g.param(bias);
            const NodeRef loss = g.softmax_xent(g.affine(g.input(std::move(xb)), w, bb), yb);
            g.backward(loss);
            sgd_step(weight, g.grad(w), vel_w, sgd, lr);
            sgd_step(bias, g.grad(bb), vel_b, sgd, lr);
        }
    }

    ProbeReport report;
    report.confusion.assign(static_cast<std::size_t>(num_classes),
                            std::vector<int>(static_cast<std::size_t>(num_classes), 0));
    Graph g;
    const NodeRef logits = g.affine(g.input(xte), g.input(weight), g.input(bias));
    int hits = 0;
    for (int i = 0; i < m; ++i) {
        const int pred = argmax_row(g.val(logits), i);
        const int truth = test_labels[static_cast<std::size_t>(i)];
        ++report.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
        hits += pred == truth;
    }
    report.top1 = static_cast<double>(hits) / m;
    return report;
}

std::string ProbeReport::table() const {
    std::ostringstream os;
    char line[64];
    std::snprintf(line, sizeof(line), "top-1 accuracy: %.4f\n", top1);
    os << line << "confusion (rows = true class):\n";
    for (const auto& row : confusion) {
        for (int v : row) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%6d", v);
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace vid
