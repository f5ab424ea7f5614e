#include "growseg/clustering.hpp"

#include "growseg/error.hpp"
#include "growseg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace growseg {

namespace {

double min_pairwise_distance(const std::vector<Descriptor>& centroids) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        for (std::size_t j = i + 1; j < centroids.size(); ++j) {
            best = std::min(best, std::sqrt(squared_distance(centroids[i], centroids[j])));
        }
    }
    return best;
}

// Nearest centroid, ties to the lowest index.
int nearest(std::span<const double> x, const std::vector<Descriptor>& centroids, double& d2) {
    int best = 0;
    d2 = squared_distance(x, centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
        const double d = squared_distance(x, centroids[c]);
        if (d < d2) {
            d2 = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

void require_rectangular(std::span<const Descriptor> descriptors) {
    if (descriptors.empty()) {
        throw EmptyInputError("k-means needs at least one descriptor");
    }
    const auto dim = descriptors.front().size();
    for (const auto& d : descriptors) {
        if (d.size() != dim) {
            throw SizeError("descriptors have inconsistent lengths");
        }
        for (double v : d) {
            if (!std::isfinite(v)) {
                throw ValueError("descriptor contains a non-finite value");
            }
        }
    }
}

// First occurrence of each distinct descriptor, in lexicographic value order,
// so the sampling pool does not depend on input order.
std::vector<std::size_t> distinct_indices(std::span<const Descriptor> descriptors) {
    std::vector<std::size_t> order(descriptors.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
        return descriptors[a] < descriptors[b];
    });
    std::vector<std::size_t> firsts;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i == 0 || descriptors[order[i]] != descriptors[order[i - 1]]) {
            firsts.push_back(order[i]);
        }
    }
    return firsts;
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::size_t distinct_count(std::span<const Descriptor> descriptors) {
    return distinct_indices(descriptors).size();
}

KMeansResult kmeans_from(std::span<const Descriptor> descriptors, std::vector<Descriptor> initial,
                         int max_iter) {
    require_rectangular(descriptors);
    if (initial.empty()) {
        throw ValueError("k-means needs at least one initial centroid");
    }
    if (max_iter < 1) {
        throw ValueError("k-means max_iter must be >= 1");
    }
    const std::size_t n = descriptors.size();
    const std::size_t k = initial.size();
    const std::size_t dim = descriptors.front().size();

    KMeansResult res;
    res.k_requested = static_cast<int>(k);
    res.k = static_cast<int>(k);
    res.centroids = std::move(initial);
    res.assignment.assign(n, -1);

    std::vector<double> dist2(n);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const int c = nearest(descriptors[i], res.centroids, dist2[i]);
            changed |= c != res.assignment[i];
            res.assignment[i] = c;
            inertia += dist2[i];
        }
        res.inertia_history.push_back(inertia);
        res.inertia = inertia;
        res.iterations = iter + 1;
        if (!changed) {
            res.converged = true;
            break;
        }

        std::vector<Descriptor> sums(k, Descriptor(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(res.assignment[i]);
            ++counts[c];
            for (std::size_t d = 0; d < dim; ++d) {
                sums[c][d] += descriptors[i][d];
            }
        }
        std::vector<std::uint8_t> reseeded(n, 0);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                continue;
            }
            for (std::size_t d = 0; d < dim; ++d) {
                res.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) {
                continue;
            }
            std::size_t far = n;
            double far_d2 = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (reseeded[i]) {
                    continue;
                }
                const double d = squared_distance(
                    descriptors[i], res.centroids[static_cast<std::size_t>(res.assignment[i])]);
                if (d > far_d2) {
                    far_d2 = d;
                    far = i;
                }
            }
            if (far < n) {
                reseeded[far] = 1;
                res.centroids[c] = descriptors[far];
            }
        }
    }
    if (!res.converged) {
        // Out of iterations: the centroids were moved after the last
        // assignment, so report the inertia they actually achieve.
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            inertia += squared_distance(descriptors[i],
                                        res.centroids[static_cast<std::size_t>(res.assignment[i])]);
        }
        res.inertia = inertia;
    }
    res.separation = min_pairwise_distance(res.centroids);
    return res;
}

KMeansResult kmeans(std::span<const Descriptor> descriptors, int k, Prng& prng, int max_iter) {
    require_rectangular(descriptors);
    if (k < 1) {
        throw ValueError("k must be >= 1");
    }
    auto pool = distinct_indices(descriptors);
    const int k_used = std::min<int>(k, static_cast<int>(pool.size()));
    // Partial Fisher-Yates: the first k_used entries become the sample.
    for (std::size_t i = 0; i < static_cast<std::size_t>(k_used); ++i) {
        const std::size_t j = i + static_cast<std::size_t>(prng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    std::vector<Descriptor> initial;
    initial.reserve(static_cast<std::size_t>(k_used));
    for (int i = 0; i < k_used; ++i) {
        initial.push_back(descriptors[pool[static_cast<std::size_t>(i)]]);
    }
    auto res = kmeans_from(descriptors, std::move(initial), max_iter);
    res.k_requested = k;
    return res;
}

std::vector<KMeansResult> kmeans_restarts(std::span<const Descriptor> descriptors, int k,
                                          int restarts, const Prng& base, int max_iter,
                                          unsigned threads) {
    if (restarts < 1) {
        throw ValueError("restarts must be >= 1");
    }
    require_rectangular(descriptors);
    std::vector<KMeansResult> runs(static_cast<std::size_t>(restarts));
    parallel_chunks(runs.size(), threads, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t r = b; r < e; ++r) {
            Prng stream = base.substream(r);
            runs[r] = kmeans(descriptors, k, stream, max_iter);
            runs[r].run_index = r;
        }
    });
    return runs;
}

std::size_t select_best_run(std::span<const KMeansResult> runs) {
    if (runs.empty()) {
        throw EmptyInputError("no k-means runs to select from");
    }
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        const auto& a = runs[r];
        const auto& b = runs[best];
        if (a.separation > b.separation ||
            (a.separation == b.separation && a.inertia < b.inertia)) {
            best = r;
        }
    }
    return best;
}

KMeansResult best_of_restarts(std::span<const Descriptor> descriptors, int k, int restarts,
                              const Prng& base, int max_iter, unsigned threads) {
    auto runs = kmeans_restarts(descriptors, k, restarts, base, max_iter, threads);
    return std::move(runs[select_best_run(runs)]);
}

SeedSet apply_labels(SeedSet seeds, const KMeansResult& result) {
    if (result.assignment.size() != seeds.regions.size()) {
        throw SizeError("k-means assignment does not cover every seed region");
    }
    for (std::size_t i = 0; i < seeds.regions.size(); ++i) {
        seeds.regions[i].cluster_label = result.assignment[i];
    }
    return seeds;
}

}  // namespace growseg
