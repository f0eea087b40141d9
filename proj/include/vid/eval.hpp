#pragma once

#include <string>
#include <vector>

#include "vid/rng.hpp"
#include "vid/tensor.hpp"

namespace vid {

// Top-k nearest-neighbour retrieval report. hit_rates[i] is the fraction of
// queries whose ks[i] nearest gallery items (cosine similarity, ties broken
// by gallery index) include at least one item of the query's class.
struct RetrievalReport {
    std::vector<int> ks;
    std::vector<double> hit_rates;
    std::vector<std::vector<double>> per_class;  // [class][k-index]
    std::vector<int> class_ids;
    bool k_clamped = false;

    std::string table() const;
    std::string csv() const;
};

// query/gallery: rows of features. When same_set is true, gallery row i is
// excluded as a match for query i (self-match suppression).
RetrievalReport knn_retrieval(const Tensor& query_feats, const std::vector<int>& query_labels,
                              const Tensor& gallery_feats, const std::vector<int>& gallery_labels,
                              std::vector<int> ks, bool same_set = false);

struct ProbeReport {
    double top1 = 0.0;
    std::vector<std::vector<int>> confusion;  // [true][predicted]

    std::string table() const;
};

// Single affine layer + softmax cross-entropy trained with minibatch SGD
// (momentum 0.9) on frozen, train-standardized features.
ProbeReport linear_probe(const Tensor& train_feats, const std::vector<int>& train_labels,
                         const Tensor& test_feats, const std::vector<int>& test_labels, int epochs,
                         double lr, RngStream& rng);

}  // namespace vid
