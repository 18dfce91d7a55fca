#pragma once

#include <cstdint>
#include <utility>

#include "glare/types.hpp"

namespace glare {

/// Landmark-level graph: one node per landmark, directed kNN edges.
struct FineGraph {
    Coords coords;    // N x 3, normalized positions
    Matrix features;  // N x (f+3)
    EdgeList edges;

    int n_nodes() const { return static_cast<int>(coords.rows()); }
};

/// Disjoint cover of fine nodes into k regions.
struct Partition {
    int n_nodes = 0;
    int k = 0;
    IndexList assignment;  // per-node region id in [0, k)

    /// Member node indices per region, ascending within each region.
    std::vector<IndexList> members() const;

    /// Throws InvariantError unless every node has a valid region id and
    /// every region is non-empty.
    void validate() const;
};

/// Region-level graph after coarsening.
struct QuotientGraph {
    int k = 0;
    Matrix region_features;  // k x d
    Coords region_coords;    // k x 3
    EdgeList edges;
};

struct KMeansState {
    Coords centroids;  // k x 3
    Partition partition;
    double inertia = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> inertia_trace;  // one entry per Lloyd iteration
};

/// Directed kNN edges (j -> i) for the min(k_nn, N-1) nearest neighbors j of
/// each node i. Distance ties break toward the lower node index. Output is
/// ordered by dst, then distance, then src.
EdgeList build_knn_edges(const Coords& coords, int k_nn);

/// Lloyd's algorithm with k-means++ seeding from a seeded generator.
/// Stops when the assignment is unchanged or after 100 iterations. Empty
/// clusters are repaired by reassigning the point farthest from its centroid.
/// The result does not depend on the input row order (beyond region
/// relabeling) for tie-free coordinates: seeding and all reductions run over
/// a canonical lexicographic ordering of the points.
KMeansState kmeans_partition(const Coords& coords, int k, std::uint64_t seed);

/// Region edges induced by the fine edges: (block(u) -> block(v)) for every
/// fine edge u -> v across distinct blocks, duplicates collapsed, no
/// self-loops. Ordered by dst then src.
EdgeList induced_edges(const EdgeList& fine_edges, const Partition& partition);

/// Classical quotient graph: one node per block, induced edges, features and
/// coordinates mean-pooled per region.
QuotientGraph quotient_induced(const FineGraph& graph, const Partition& partition);

/// Arithmetic mean of member rows per region, members summed in ascending
/// index order.
std::pair<Matrix, Coords> region_pool(const Matrix& features, const Coords& coords,
                                      const Partition& partition);

/// Same contract as build_knn_edges over region coordinates, k_q clamped to
/// k-1.
EdgeList build_region_knn(const Coords& region_coords, int k_q);

/// Number of edge-message (phi) evaluations an EdgeConv stack performs.
long message_count(const EdgeList& edges, int n_layers);

/// Union of the edge set with its reversed set, deduplicated, (dst, src)
/// ordered.
EdgeList symmetrize_edges(const EdgeList& edges);

}  // namespace glare
