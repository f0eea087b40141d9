#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <stdexcept>
#include <vector>

namespace vid::testsupport {

// Pearson chi-square statistic against a uniform expectation.
inline double chi_square_stat(const std::vector<long>& counts) {
    long total = 0;
    for (long c : counts) total += c;
    const double expected = static_cast<double>(total) / counts.size();
    double stat = 0.0;
    for (long c : counts) {
        const double d = c - expected;
        stat += d * d / expected;
    }
    return stat;
}

// p-value of the uniformity test; df = bins - 1.
inline double chi_square_uniform_pvalue(const std::vector<long>& counts) {
    if (counts.size() < 2) throw std::invalid_argument("chi-square: need at least 2 bins");
    const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, chi_square_stat(counts)));
}

}  // namespace vid::testsupport
