#include "acsa/kmeans.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "acsa/errors.hpp"

namespace acsa {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    const KMeansOptions& options) {
    const std::size_t n = points.size();
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw ConfigError("kmeans: k must be in [1, #points], got k=" + std::to_string(k) +
                          " for " + std::to_string(n) + " points");
    const std::size_t dim = points[0].size();
    for (const auto& p : points)
        if (p.size() != dim) throw ConfigError("kmeans: points have mixed dimensions");

    // Farthest-point seeding; the RNG only picks the first centroid, so
    // a fixed seed fixes the whole clustering.
    std::mt19937_64 rng(options.seed);
    std::vector<std::size_t> seed_idx;
    seed_idx.push_back(rng() % n);
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    std::vector<bool> chosen(n, false);
    chosen[seed_idx[0]] = true;
    while (seed_idx.size() < static_cast<std::size_t>(k)) {
        for (std::size_t i = 0; i < n; ++i)
            min_d[i] = std::min(min_d[i], sq_dist(points[i], points[seed_idx.back()]));
        std::size_t best = n;
        double best_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (chosen[i]) continue;
            if (min_d[i] > best_d) {
                best_d = min_d[i];
                best = i;
            }
        }
        seed_idx.push_back(best);
        chosen[best] = true;
    }

    KMeansResult result;
    result.centroids.reserve(static_cast<std::size_t>(k));
    for (std::size_t idx : seed_idx) result.centroids.push_back(points[idx]);
    result.assignment.assign(n, 0);
    std::vector<bool> active(static_cast<std::size_t>(k), true);

    double prev_objective = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        // Assignment, ties to the lowest active centroid index.
        for (std::size_t i = 0; i < n; ++i) {
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                if (!active[static_cast<std::size_t>(c)]) continue;
                double d = sq_dist(points[i], result.centroids[static_cast<std::size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            result.assignment[i] = best;
        }

        // Re-seed empty active clusters with the farthest point, or
        // retire them when every point already sits on its centroid.
        for (int c = 0; c < k; ++c) {
            if (!active[static_cast<std::size_t>(c)]) continue;
            bool empty = true;
            for (std::size_t i = 0; i < n; ++i)
                if (result.assignment[i] == c) {
                    empty = false;
                    break;
                }
            if (!empty) continue;
            std::size_t far = n;
            double far_d = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double d = sq_dist(points[i],
                                   result.centroids[static_cast<std::size_t>(result.assignment[i])]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far == n) {
                active[static_cast<std::size_t>(c)] = false;
            } else {
                result.centroids[static_cast<std::size_t>(c)] = points[far];
                result.assignment[far] = c;
            }
        }

        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            objective +=
                sq_dist(points[i], result.centroids[static_cast<std::size_t>(result.assignment[i])]);
        if (objective > prev_objective + 1e-9)
            throw Error("kmeans: objective increased from " + std::to_string(prev_objective) +
                        " to " + std::to_string(objective));
        result.objective_trace.push_back(objective);
        prev_objective = objective;
        result.iterations = iter + 1;

        // Update step.
        double max_shift = 0.0;
        for (int c = 0; c < k; ++c) {
            if (!active[static_cast<std::size_t>(c)]) continue;
            std::vector<double> mean(dim, 0.0);
            std::size_t count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (result.assignment[i] != c) continue;
                for (std::size_t d = 0; d < dim; ++d) mean[d] += points[i][d];
                ++count;
            }
            if (count == 0) continue;
            for (std::size_t d = 0; d < dim; ++d) mean[d] /= static_cast<double>(count);
            double shift = std::sqrt(sq_dist(mean, result.centroids[static_cast<std::size_t>(c)]));
            max_shift = std::max(max_shift, shift);
            result.centroids[static_cast<std::size_t>(c)] = std::move(mean);
        }
        if (max_shift < options.tolerance) break;
    }
    return result;
}

}  // namespace acsa
