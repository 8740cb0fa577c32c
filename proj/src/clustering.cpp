#include <algorithm>
#include <cmath>

#include "shapesense/estimator.hpp"

namespace shapesense {

Histogram cluster_candidates(const std::vector<double>& values, const ClusterParams& params) {
    if (values.empty())
        throw std::invalid_argument("cluster_candidates needs at least one candidate");

    Histogram h;
    h.total = static_cast<long>(values.size());
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    h.lo = *mn;
    h.hi = *mx;
    h.n_sub = std::max(
        1, static_cast<int>(std::lround(static_cast<double>(h.total) /
                                        (params.k_sub * std::max(1.0, params.bin_divisor)))));
    const double width = std::max(h.hi - h.lo, 1e-12);

    h.counts.assign(h.n_sub, 0);
    std::vector<double> sums(h.n_sub, 0.0);
    for (double x : values) {
        int bin = static_cast<int>((x - h.lo) / width * h.n_sub);
        bin = std::clamp(bin, 0, h.n_sub - 1);
        ++h.counts[bin];
        sums[bin] += x;
    }

    const double occupancy = static_cast<double>(h.total) / h.n_sub;
    h.threshold = std::max(static_cast<double>(params.min_cluster_count),
                           params.threshold_scale * occupancy);

    for (int b = 0; b < h.n_sub;) {
        if (h.counts[b] < h.threshold) {
            ++b;
            continue;
        }
        int e = b;
        long count = 0;
        double sum = 0.0;
        while (e < h.n_sub && h.counts[e] >= h.threshold) {
            count += h.counts[e];
            sum += sums[e];
            ++e;
        }
        Cluster c;
        c.center = sum / count;
        c.count = count;
        c.lo = h.lo + width * b / h.n_sub;
        c.hi = h.lo + width * e / h.n_sub;
        h.adopted.push_back(c);
        b = e;
    }
    return h;
}

std::vector<ClusterEstimate> estimate_counts(
    long n_samples, const Histogram& clusters,
    const std::function<double(double)>& expected_detections,
    double min_expected) {
    long count_sum = 0;
    for (const auto& c : clusters.adopted) count_sum += c.count;

    std::vector<ClusterEstimate> out;
    for (const auto& c : clusters.adopted) {
        ClusterEstimate est;
        est.center = c.center;
        est.count = c.count;
        est.lo = c.lo;
        est.hi = c.hi;
        est.bin_width = std::max(clusters.hi - clusters.lo, 1e-12) / clusters.n_sub;
        const double expected = expected_detections(c.center);
        if (expected < std::max(1e-12, min_expected) || count_sum == 0) {
            est.undetectable = true;
        } else {
            est.multiplicity = static_cast<double>(n_samples) * c.count /
                               (expected * static_cast<double>(count_sum));
        }
        out.push_back(est);
    }
    return out;
}

}  // namespace shapesense
