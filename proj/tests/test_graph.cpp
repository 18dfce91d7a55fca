#include <doctest.h>

#include <algorithm>
#include <set>

#include "glare/graph.hpp"
#include "glare/rng.hpp"

using namespace glare;

namespace {

Coords random_coords(int n, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Coords c(n, 3);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform(lo, hi);
    return c;
}

// O(N^2) oracle: full distance matrix, stable sort per target node.
EdgeList knn_oracle(const Coords& coords, int k_nn) {
    const int n = static_cast<int>(coords.rows());
    const int kk = std::min(k_nn, n - 1);
    EdgeList edges;
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> d;
        for (int j = 0; j < n; ++j) {
            if (j != i) d.emplace_back((coords.row(i) - coords.row(j)).norm(), j);
        }
        std::sort(d.begin(), d.end());
        for (int t = 0; t < kk; ++t) edges.push_back({d[static_cast<std::size_t>(t)].second, i});
    }
    return edges;
}

}  // namespace

TEST_CASE("build_knn_edges on three collinear points") {
    Coords c(3, 3);
    c << 0, 0, 0, 1, 0, 0, 3, 0, 0;
    const EdgeList edges = build_knn_edges(c, 1);
    const EdgeList want = {{1, 0}, {0, 1}, {1, 2}};
    CHECK(edges == want);
}

TEST_CASE("build_knn_edges clamps k to the complete graph") {
    Rng rng(3);
    const Coords c = random_coords(5, rng);
    const EdgeList edges = build_knn_edges(c, 99);
    CHECK(edges.size() == 20);
    std::set<std::pair<int, int>> seen;
    for (const Edge& e : edges) {
        CHECK(e.src != e.dst);
        seen.insert({e.src, e.dst});
    }
    CHECK(seen.size() == 20);
}

TEST_CASE("build_knn_edges equals the brute-force oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(49));
        const int k = 1 + static_cast<int>(rng.uniform_index(8));
        const Coords c = random_coords(n, rng);
        CHECK(build_knn_edges(c, k) == knn_oracle(c, k));
    }
}

TEST_CASE("build_knn_edges distance ties break toward the lower index") {
    Coords c(3, 3);
    c << 0, 0, 0, 1, 0, 0, -1, 0, 0;  // nodes 1 and 2 both at distance 1 of node 0
    const EdgeList edges = build_knn_edges(c, 1);
    CHECK(edges[0] == Edge{1, 0});
}

TEST_CASE("build_knn_edges rejects degenerate input") {
    Coords c(1, 3);
    c.setZero();
    CHECK_THROWS_AS(build_knn_edges(c, 1), DegenerateInputError);
}

TEST_CASE("kmeans_partition separates well-separated clusters") {
    Rng rng(5);
    Coords c(10, 3);
    for (int i = 0; i < 5; ++i) c.row(i) = Eigen::RowVector3d(0, 0, 0) +
                                           0.1 * Eigen::RowVector3d(rng.normal(), rng.normal(),
                                                                     rng.normal());
    for (int i = 5; i < 10; ++i) c.row(i) = Eigen::RowVector3d(10, 0, 0) +
                                            0.1 * Eigen::RowVector3d(rng.normal(), rng.normal(),
                                                                      rng.normal());
    const KMeansState st = kmeans_partition(c, 2, 99);
    st.partition.validate();
    for (int i = 1; i < 5; ++i) CHECK(st.partition.assignment[i] == st.partition.assignment[0]);
    for (int i = 6; i < 10; ++i) CHECK(st.partition.assignment[i] == st.partition.assignment[5]);
    CHECK(st.partition.assignment[0] != st.partition.assignment[5]);
}

TEST_CASE("kmeans_partition with N = k gives singleton regions and zero inertia") {
    Rng rng(6);
    const Coords c = random_coords(7, rng);
    const KMeansState st = kmeans_partition(c, 7, 1);
    st.partition.validate();
    CHECK(st.inertia == 0.0);
    std::set<int> ids(st.partition.assignment.begin(), st.partition.assignment.end());
    CHECK(ids.size() == 7);
}

TEST_CASE("kmeans_partition inertia trace is non-increasing and converges") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 4 + static_cast<int>(rng.uniform_index(40));
        const int k = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n < 8 ? n : 8)));
        const KMeansState st = kmeans_partition(random_coords(n, rng), k, trial);
        st.partition.validate();
        CHECK(st.converged);
        CHECK(st.iterations <= 100);
        for (std::size_t i = 1; i < st.inertia_trace.size(); ++i) {
            CHECK(st.inertia_trace[i] <= st.inertia_trace[i - 1] + 1e-12);
        }
        CHECK(st.inertia == st.inertia_trace.back());
    }
}

TEST_CASE("kmeans_partition repairs empty clusters from duplicate points") {
    Coords c(9, 3);
    for (int i = 0; i < 9; ++i) {
        const int which = i % 3;
        c.row(i) = Eigen::RowVector3d(2.0 * which, 0, 0);
    }
    const KMeansState st = kmeans_partition(c, 5, 4);
    st.partition.validate();  // 5 non-empty regions out of 3 distinct locations
}

TEST_CASE("kmeans_partition is invariant to node order for a fixed seed") {
    Rng rng(8);
    const int n = 30;
    const Coords c = random_coords(n, rng);
    const KMeansState base = kmeans_partition(c, 4, 12345);

    IndexList perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int trial = 0; trial < 5; ++trial) {
        rng.shuffle(perm);
        Coords shuffled(n, 3);
        for (int i = 0; i < n; ++i) shuffled.row(i) = c.row(perm[static_cast<std::size_t>(i)]);
        const KMeansState st = kmeans_partition(shuffled, 4, 12345);
        for (int i = 0; i < n; ++i) {
            CHECK(st.partition.assignment[static_cast<std::size_t>(i)] ==
                  base.partition.assignment[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
        }
        CHECK(st.centroids == base.centroids);
    }
}

TEST_CASE("kmeans_partition rejects k > N") {
    Rng rng(9);
    CHECK_THROWS_AS(kmeans_partition(random_coords(3, rng), 4, 0), DegenerateInputError);
}

TEST_CASE("quotient_induced with singleton partition preserves the edge relation") {
    Rng rng(10);
    FineGraph g;
    g.coords = random_coords(12, rng);
    g.features = Matrix::Zero(12, 2);
    g.edges = build_knn_edges(g.coords, 3);

    Partition p;
    p.n_nodes = 12;
    p.k = 12;
    for (int i = 0; i < 12; ++i) p.assignment.push_back(i);

    const QuotientGraph q = quotient_induced(g, p);
    EdgeList fine_sorted = g.edges;
    std::sort(fine_sorted.begin(), fine_sorted.end());
    CHECK(q.edges == fine_sorted);
    CHECK(q.region_coords == g.coords);
}

TEST_CASE("quotient_induced with one block collapses everything") {
    Rng rng(11);
    FineGraph g;
    g.coords = random_coords(6, rng);
    g.features = Matrix::Ones(6, 4);
    g.edges = build_knn_edges(g.coords, 2);
    Partition p{6, 1, IndexList(6, 0)};
    const QuotientGraph q = quotient_induced(g, p);
    CHECK(q.k == 1);
    CHECK(q.edges.empty());
}

TEST_CASE("quotient_induced on a bidirected path with two blocks") {
    FineGraph g;
    g.coords = Coords::Zero(4, 3);
    for (int i = 0; i < 4; ++i) g.coords(i, 0) = i;
    g.features = Matrix::Zero(4, 1);
    g.edges = {{0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 3}, {3, 2}};
    Partition p{4, 2, {0, 0, 1, 1}};
    const QuotientGraph q = quotient_induced(g, p);
    const EdgeList want = {{1, 0}, {0, 1}};
    CHECK(q.edges == want);
}

TEST_CASE("quotient_induced rejects mismatched partitions") {
    FineGraph g;
    g.coords = Coords::Zero(4, 3);
    g.features = Matrix::Zero(4, 1);
    Partition p{3, 1, {0, 0, 0}};
    CHECK_THROWS_AS(quotient_induced(g, p), DimensionError);
}

TEST_CASE("region_pool midpoint and identity cases") {
    Matrix feats(2, 2);
    feats << 1, 2, 3, 4;
    Coords coords(2, 3);
    coords << 0, 0, 0, 2, 0, 0;
    Partition p{2, 1, {0, 0}};
    const auto [pf, pc] = region_pool(feats, coords, p);
    CHECK(pc.row(0) == Eigen::RowVector3d(1, 0, 0));
    CHECK(pf(0, 0) == 2.0);
    CHECK(pf(0, 1) == 3.0);

    Partition singles{2, 2, {1, 0}};  // region ids permute the rows
    const auto [sf, sc] = region_pool(feats, coords, singles);
    CHECK(sf.row(0) == feats.row(1));
    CHECK(sf.row(1) == feats.row(0));
    CHECK(sc.row(0) == coords.row(1));
}

TEST_CASE("region_pool equals a groupby-mean oracle") {
    Rng rng(12);
    Matrix feats(7, 4);
    for (Eigen::Index i = 0; i < feats.size(); ++i) feats.data()[i] = rng.uniform(-1.0, 1.0);
    const Coords coords = random_coords(7, rng);
    Partition p{7, 3, {2, 0, 1, 0, 2, 1, 0}};
    const auto [pf, pc] = region_pool(feats, coords, p);

    for (int r = 0; r < 3; ++r) {
        long double acc[4] = {0, 0, 0, 0};
        long double cacc[3] = {0, 0, 0};
        int cnt = 0;
        for (int i = 0; i < 7; ++i) {
            if (p.assignment[static_cast<std::size_t>(i)] != r) continue;
            ++cnt;
            for (int c = 0; c < 4; ++c) acc[c] += feats(i, c);
            for (int c = 0; c < 3; ++c) cacc[c] += coords(i, c);
        }
        for (int c = 0; c < 4; ++c) {
            CHECK(pf(r, c) == doctest::Approx(static_cast<double>(acc[c] / cnt)).epsilon(1e-14));
        }
        for (int c = 0; c < 3; ++c) {
            CHECK(pc(r, c) == doctest::Approx(static_cast<double>(cacc[c] / cnt)).epsilon(1e-14));
        }
    }
}

TEST_CASE("region_pool is symmetric under member permutation") {
    Rng rng(13);
    Matrix feats(9, 3);
    for (Eigen::Index i = 0; i < feats.size(); ++i) feats.data()[i] = rng.uniform(-1.0, 1.0);
    const Coords coords = random_coords(9, rng);
    Partition p{9, 2, {0, 1, 0, 1, 0, 1, 0, 1, 0}};
    const auto [pf, pc] = region_pool(feats, coords, p);

    IndexList perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Matrix feats2(9, 3);
    Coords coords2(9, 3);
    Partition p2{9, 2, IndexList(9)};
    for (int i = 0; i < 9; ++i) {
        feats2.row(i) = feats.row(perm[static_cast<std::size_t>(i)]);
        coords2.row(i) = coords.row(perm[static_cast<std::size_t>(i)]);
        p2.assignment[static_cast<std::size_t>(i)] =
            p.assignment[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    }
    const auto [qf, qc] = region_pool(feats2, coords2, p2);
    CHECK((qf - pf).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((qc - pc).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("region_pool rejects empty regions") {
    Matrix feats = Matrix::Zero(3, 1);
    Coords coords = Coords::Zero(3, 3);
    Partition p{3, 2, {0, 0, 0}};  // region 1 empty
    CHECK_THROWS_AS(region_pool(feats, coords, p), InvariantError);
}

TEST_CASE("build_region_knn gives each region exactly min(k_q, k-1) in-edges") {
    Rng rng(14);
    const Coords c = random_coords(8, rng);
    const EdgeList edges = build_region_knn(c, 3);
    std::vector<int> indeg(8, 0);
    for (const Edge& e : edges) ++indeg[static_cast<std::size_t>(e.dst)];
    for (int d : indeg) CHECK(d == 3);
    CHECK(edges == knn_oracle(c, 3));
}

TEST_CASE("build_region_knn clamps k_q for two regions") {
    Coords c(2, 3);
    c << 0, 0, 0, 1, 1, 1;
    const EdgeList edges = build_region_knn(c, 5);
    const EdgeList want = {{1, 0}, {0, 1}};
    CHECK(edges == want);
    CHECK_THROWS_AS(build_region_knn(Coords::Zero(1, 3), 1), DegenerateInputError);
}

TEST_CASE("message_count counts phi evaluations") {
    Rng rng(15);
    const Coords c = random_coords(68, rng);
    const EdgeList fine = build_knn_edges(c, 8);
    CHECK(fine.size() == 544);
    CHECK(message_count(fine, 2) == 1088);

    const KMeansState st = kmeans_partition(c, 8, 3);
    const auto [pf, pc] = region_pool(Matrix::Zero(68, 1), c, st.partition);
    const EdgeList region = build_region_knn(pc, 3);
    CHECK(message_count(region, 2) == 48);
    CHECK(message_count({}, 5) == 0);

    // The coarsening speedup in its exact form: with N > k_nn and k > k_q,
    // fine/quotient >= (N * k_nn) / (k * k_q), compared as integers.
    CHECK(message_count(fine, 1) * 8 * 3 >= message_count(region, 1) * 68 * 8);
}

TEST_CASE("symmetrize_edges is the union with the reversed set") {
    const EdgeList edges = {{0, 1}, {1, 0}, {2, 1}};
    const EdgeList sym = symmetrize_edges(edges);
    CHECK(sym.size() == 4);
    CHECK(std::count(sym.begin(), sym.end(), Edge{1, 2}) == 1);
    CHECK(std::count(sym.begin(), sym.end(), Edge{2, 1}) == 1);
    CHECK(std::count(sym.begin(), sym.end(), Edge{0, 1}) == 1);
    CHECK(std::count(sym.begin(), sym.end(), Edge{1, 0}) == 1);
}
