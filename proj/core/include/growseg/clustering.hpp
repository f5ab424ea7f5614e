#pragma once

#include "growseg/prng.hpp"
#include "growseg/seeding.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace growseg {

using Descriptor = std::vector<double>;

struct KMeansResult {
    std::vector<Descriptor> centroids;
    /// descriptor index -> cluster 0..k-1
    std::vector<int> assignment;
    /// Sum of squared distances to the assigned centroid.
    double inertia = 0.0;
    /// Minimum pairwise centroid distance; +inf when k == 1.
    double separation = 0.0;
    int k_requested = 0;
    int k = 0;
    int iterations = 0;
    bool converged = false;
    /// Inertia after each assignment step.
    std::vector<double> inertia_history;
    /// Restart that produced this result (0 for a single run).
    std::size_t run_index = 0;
};

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

/// Number of distinct descriptors (exact equality).
std::size_t distinct_count(std::span<const Descriptor> descriptors);

/// Lloyd iterations from the given centroids. Stops when the assignment is
/// unchanged or after `max_iter` assignment steps. Empty clusters are
/// re-seeded with the point farthest from its current centroid.
KMeansResult kmeans_from(std::span<const Descriptor> descriptors, std::vector<Descriptor> initial,
                         int max_iter);

/// k-means with initial centroids sampled without replacement from the
/// distinct descriptors. k is lowered to the distinct count when needed
/// (`k_requested` keeps the original). Throws EmptyInputError on no input.
KMeansResult kmeans(std::span<const Descriptor> descriptors, int k, Prng& prng, int max_iter);

/// Runs `restarts` independent k-means, run r drawing from base.substream(r).
std::vector<KMeansResult> kmeans_restarts(std::span<const Descriptor> descriptors, int k,
                                          int restarts, const Prng& base, int max_iter,
                                          unsigned threads = 1);

/// Index of the run with the largest separation; ties go to lower inertia,
/// then to the earlier run.
std::size_t select_best_run(std::span<const KMeansResult> runs);

KMeansResult best_of_restarts(std::span<const Descriptor> descriptors, int k, int restarts,
                              const Prng& base, int max_iter, unsigned threads = 1);

/// Copies each region's cluster assignment into SeedRegion::cluster_label.
SeedSet apply_labels(SeedSet seeds, const KMeansResult& result);

}  // namespace growseg
