#include "glare/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "glare/rng.hpp"

namespace glare {

std::vector<IndexList> Partition::members() const {
    std::vector<IndexList> out(static_cast<std::size_t>(k));
    for (int i = 0; i < n_nodes; ++i) {
        out[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])].push_back(i);
    }
    return out;
}

void Partition::validate() const {
    if (static_cast<int>(assignment.size()) != n_nodes) {
        throw InvariantError("partition assignment size does not match node count");
    }
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int a : assignment) {
        if (a < 0 || a >= k) throw InvariantError("partition region id out of range");
        ++counts[static_cast<std::size_t>(a)];
    }
    for (int c : counts) {
        if (c == 0) throw InvariantError("partition has an empty region");
    }
}

EdgeList build_knn_edges(const Coords& coords, int k_nn) {
    const int n = static_cast<int>(coords.rows());
    if (n < 2) throw DegenerateInputError("build_knn_edges: need at least 2 nodes");
    if (k_nn < 1) throw DegenerateInputError("build_knn_edges: k_nn must be >= 1");
    const int kk = std::min(k_nn, n - 1);

    EdgeList edges;
    edges.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(kk));
    std::vector<std::pair<double, int>> cand;
    cand.reserve(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n; ++i) {
        cand.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            cand.emplace_back((coords.row(i) - coords.row(j)).squaredNorm(), j);
        }
        std::partial_sort(cand.begin(), cand.begin() + kk, cand.end());
        for (int t = 0; t < kk; ++t) {
            edges.push_back({cand[static_cast<std::size_t>(t)].second, i});
        }
    }
    return edges;
}

namespace {

// Lexicographic ordering of the rows; makes k-means independent of the input
// row order for tie-free coordinates.
IndexList canonical_order(const Coords& coords) {
    IndexList order(static_cast<std::size_t>(coords.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        for (int c = 0; c < 3; ++c) {
            if (coords(a, c) != coords(b, c)) return coords(a, c) < coords(b, c);
        }
        return false;
    });
    return order;
}

int nearest_centroid(const Coords& coords, const Coords& centroids, int i) {
    int best = 0;
    double best_d = (coords.row(i) - centroids.row(0)).squaredNorm();
    for (int c = 1; c < centroids.rows(); ++c) {
        const double d = (coords.row(i) - centroids.row(c)).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

// Means accumulated in canonical order so that sums are permutation-stable.
Coords compute_centroids(const Coords& coords, const IndexList& order,
                         const IndexList& assignment, int k) {
    Coords sums = Coords::Zero(k, 3);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int i : order) {
        const int a = assignment[static_cast<std::size_t>(i)];
        sums.row(a) += coords.row(i);
        ++counts[static_cast<std::size_t>(a)];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
            sums.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
        }
    }
    return sums;
}

double compute_inertia(const Coords& coords, const IndexList& order, const Coords& centroids,
                       const IndexList& assignment) {
    double s = 0.0;
    for (int i : order) {
        s += (coords.row(i) - centroids.row(assignment[static_cast<std::size_t>(i)]))
                 .squaredNorm();
    }
    return s;
}

Coords kmeanspp_seed(const Coords& coords, const IndexList& order, int k, Rng& rng) {
    const int n = static_cast<int>(coords.rows());
    Coords centroids(k, 3);
    const int first = order[rng.uniform_index(static_cast<std::size_t>(n))];
    centroids.row(0) = coords.row(first);

    Vector d2(n);
    for (int t = 1; t < k; ++t) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int c = 0; c < t; ++c) {
                best = std::min(best, (coords.row(i) - centroids.row(c)).squaredNorm());
            }
            d2(i) = best;
        }
        for (int i : order) total += d2(i);
        int chosen = -1;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double cum = 0.0;
            for (int i : order) {
                cum += d2(i);
                if (cum >= r) {
                    chosen = i;
                    break;
                }
            }
        }
        if (chosen < 0) {
            // All remaining mass is zero (duplicate points); take the first
            // canonical point not yet used as a centroid.
            for (int i : order) {
                if (d2(i) > 0.0 || total == 0.0) {
                    chosen = i;
                    break;
                }
            }
        }
        centroids.row(t) = coords.row(chosen);
    }
    return centroids;
}

}  // namespace

KMeansState kmeans_partition(const Coords& coords, int k, std::uint64_t seed) {
    const int n = static_cast<int>(coords.rows());
    if (k < 1) throw DegenerateInputError("kmeans_partition: k must be >= 1");
    if (n < k) {
        std::ostringstream os;
        os << "kmeans_partition: " << n << " points cannot fill " << k << " regions";
        throw DegenerateInputError(os.str());
    }

    const IndexList order = canonical_order(coords);
    Rng rng(seed);

    KMeansState state;
    state.centroids = kmeanspp_seed(coords, order, k, rng);
    state.partition.n_nodes = n;
    state.partition.k = k;
    state.partition.assignment.assign(static_cast<std::size_t>(n), -1);

    IndexList& assign = state.partition.assignment;
    constexpr int kMaxIter = 100;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            const int a = nearest_centroid(coords, state.centroids, i);
            if (a != assign[static_cast<std::size_t>(i)]) {
                assign[static_cast<std::size_t>(i)] = a;
                changed = true;
            }
        }

        // Empty-cluster repair: move the farthest point into each empty
        // region, never emptying another one.
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int a : assign) ++counts[static_cast<std::size_t>(a)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            int far = -1;
            double far_d = -1.0;
            for (int i : order) {
                const int a = assign[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(a)] < 2) continue;
                const double d = (coords.row(i) - state.centroids.row(a)).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far < 0) throw InvariantError("kmeans_partition: cannot repair empty region");
            --counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(far)])];
            assign[static_cast<std::size_t>(far)] = c;
            ++counts[static_cast<std::size_t>(c)];
            changed = true;
        }

        state.centroids = compute_centroids(coords, order, assign, k);
        state.inertia_trace.push_back(compute_inertia(coords, order, state.centroids, assign));
        state.iterations = iter + 1;
        if (!changed) {
            state.converged = true;
            break;
        }
    }
    state.inertia = state.inertia_trace.back();
    state.partition.validate();
    return state;
}

EdgeList induced_edges(const EdgeList& fine_edges, const Partition& partition) {
    EdgeList out;
    out.reserve(fine_edges.size());
    for (const Edge& e : fine_edges) {
        if (e.src < 0 || e.src >= partition.n_nodes || e.dst < 0 ||
            e.dst >= partition.n_nodes) {
            throw DimensionError("induced_edges: edge endpoint outside partition");
        }
        const int a = partition.assignment[static_cast<std::size_t>(e.src)];
        const int b = partition.assignment[static_cast<std::size_t>(e.dst)];
        if (a != b) out.push_back({a, b});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

QuotientGraph quotient_induced(const FineGraph& graph, const Partition& partition) {
    if (partition.n_nodes != graph.n_nodes()) {
        std::ostringstream os;
        os << "quotient_induced: partition covers " << partition.n_nodes << " nodes, graph has "
           << graph.n_nodes();
        throw DimensionError(os.str());
    }
    QuotientGraph q;
    q.k = partition.k;
    q.edges = induced_edges(graph.edges, partition);
    std::tie(q.region_features, q.region_coords) =
        region_pool(graph.features, graph.coords, partition);
    return q;
}

std::pair<Matrix, Coords> region_pool(const Matrix& features, const Coords& coords,
                                      const Partition& partition) {
    if (features.rows() != partition.n_nodes || coords.rows() != partition.n_nodes) {
        std::ostringstream os;
        os << "region_pool: rows " << features.rows() << "/" << coords.rows()
           << " vs partition over " << partition.n_nodes << " nodes";
        throw DimensionError(os.str());
    }
    const int k = partition.k;
    Matrix pooled_feat = Matrix::Zero(k, features.cols());
    Coords pooled_coord = Coords::Zero(k, 3);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    // Ascending node index = deterministic summation order.
    for (int i = 0; i < partition.n_nodes; ++i) {
        const int a = partition.assignment[static_cast<std::size_t>(i)];
        if (a < 0 || a >= k) throw InvariantError("region_pool: region id out of range");
        pooled_feat.row(a) += features.row(i);
        pooled_coord.row(a) += coords.row(i);
        ++counts[static_cast<std::size_t>(a)];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
            throw InvariantError("region_pool: empty region");
        }
        pooled_feat.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
        pooled_coord.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
    return {std::move(pooled_feat), std::move(pooled_coord)};
}

EdgeList build_region_knn(const Coords& region_coords, int k_q) {
    const int k = static_cast<int>(region_coords.rows());
    if (k < 2) throw DegenerateInputError("build_region_knn: need at least 2 regions");
    if (k_q < 1) throw DegenerateInputError("build_region_knn: k_q must be >= 1");
    return build_knn_edges(region_coords, std::min(k_q, k - 1));
}

long message_count(const EdgeList& edges, int n_layers) {
    return static_cast<long>(edges.size()) * static_cast<long>(n_layers);
}

EdgeList symmetrize_edges(const EdgeList& edges) {
    EdgeList out;
    out.reserve(edges.size() * 2);
    for (const Edge& e : edges) {
        out.push_back(e);
        out.push_back({e.dst, e.src});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace glare
