#pragma once

#include <cstdint>
#include <vector>

namespace acsa {

struct KMeansOptions {
    int max_iterations = 100;
    double tolerance = 1e-4;  // max centroid L2 shift that counts as converged
    std::uint64_t seed = 0;   // picks the first centroid
};

struct KMeansResult {
    std::vector<std::vector<double>> centroids;  // final positions, k entries
    std::vector<int> assignment;                 // per point, label in [0, k)
    /// Within-cluster sum of squared distances sampled once per Lloyd
    /// iteration (after assignment); non-increasing by construction and
    /// asserted so.
    std::vector<double> objective_trace;
    int iterations = 0;
};

/// Lloyd's algorithm. The first centroid is chosen by a seeded RNG, the
/// rest greedily as the point farthest from the chosen set (ties to the
/// lowest index). Assignment ties go to the lowest centroid index. A
/// cluster left empty is re-seeded with the point farthest from its own
/// centroid; when even that distance is zero (duplicate points beyond
/// the number of distinct locations) the cluster stays empty and its
/// label is simply never assigned. Requires 1 <= k <= points.size() and
/// uniform dimensions; throws ConfigError otherwise.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    const KMeansOptions& options = {});

}  // namespace acsa
