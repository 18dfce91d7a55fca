#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "glare/features.hpp"
#include "glare/graph.hpp"
#include "glare/numerics.hpp"
#include "glare/rng.hpp"
#include "glare/types.hpp"

namespace glare {

enum class RegionEdgeMode { kKnn, kInduced };

std::string to_string(RegionEdgeMode mode);
RegionEdgeMode region_edge_mode_from_string(const std::string& s);

/// Architecture and graph-construction hyperparameters.
struct GlareConfig {
    int appearance_dim = 16;  // f; node features are f+3 wide
    int fine_layers = 2;
    int fine_hidden = 32;
    int fine_out = 32;
    int region_layers = 2;
    int region_hidden = 64;
    int region_out = 64;
    int k_regions = 8;
    int k_nn = 8;
    int k_q = 3;
    int n_classes = 7;
    FeatureMode feature_mode = FeatureMode::kJoint;
    bool use_quotient = true;
    bool symmetrize_edges = false;
    RegionEdgeMode region_edges = RegionEdgeMode::kKnn;

    int d_in() const { return appearance_dim + 3; }

    /// Input width of fine layer l.
    int fine_in(int l) const { return l == 0 ? d_in() : fine_out; }

    /// Width of the node embeddings leaving the fine stack.
    int fine_stack_out() const { return fine_layers > 0 ? fine_out : d_in(); }

    /// Input width of region layer l.
    int region_in(int l) const { return l == 0 ? fine_stack_out() : region_out; }

    /// Width of the vector entering the classifier head.
    int head_in() const {
        if (use_quotient && region_layers > 0) return region_out;
        return fine_stack_out();
    }

    void validate() const;

    friend bool operator==(const GlareConfig&, const GlareConfig&) = default;
};

/// Closed-form count of trainable parameters for a config.
long param_count(const GlareConfig& config);

/// All trainable weights: the fine EdgeConv stack, the region EdgeConv
/// stack, and the linear classifier head.
struct ModelParams {
    std::vector<Mlp2Params> fine_convs;
    std::vector<Mlp2Params> region_convs;
    Matrix head_w;  // C x head_in
    Vector head_b;  // C

    long count() const;
    Vector flatten() const;
    void set_from_flat(const Vector& flat);

    static ModelParams zeros(const GlareConfig& config);
    static ModelParams init(const GlareConfig& config, Rng& rng);
};

/// Per-sample graph structure, fixed across training steps: fine edges, the
/// k-means partition, and region edges. Coordinates do not change during
/// training, so this is computed once per sample.
struct GraphPlan {
    EdgeList fine_edges;
    bool has_quotient = false;
    Partition partition;
    Coords region_coords;
    EdgeList region_edges;
};

GraphPlan make_plan(const Coords& coords, const GlareConfig& config, std::uint64_t kmeans_seed);
GraphPlan make_plan(const FineGraph& graph, const GlareConfig& config,
                    std::uint64_t kmeans_seed);

struct EdgeConvCache {
    EdgeList edges;  // input edges plus a self-edge per isolated node
    Mlp2Cache mlp;
    Eigen::MatrixXi argmax;  // n x d_out, winning message row per coordinate
};

/// EdgeConv: out_i = max over in-neighbors j of phi([h_i || h_j - h_i]),
/// element-wise. Nodes without in-edges use the virtual self-message
/// phi([h_i || 0]). Value ties route to the lower source index.
Matrix edgeconv_forward(const Matrix& node_feats, const EdgeList& edges, const Mlp2Params& phi,
                        EdgeConvCache* cache = nullptr);

/// Reverse-mode rule for edgeconv_forward: the upstream gradient of each
/// output coordinate routes to its argmax message. Accumulates into
/// phi_grads and returns d(loss)/d(node_feats).
Matrix edgeconv_backward(const Mlp2Params& phi, const EdgeConvCache& cache, const Matrix& d_out,
                         Mlp2Params& phi_grads);

/// Column sums in ascending region-id order.
Vector global_add_pool(const Matrix& region_feats);

/// logits = w * h_g + b.
Vector classify(const Vector& h_g, const Matrix& head_w, const Vector& head_b);

/// Everything the backward pass needs from a forward pass.
struct ForwardCache {
    const GraphPlan* plan = nullptr;
    std::vector<EdgeConvCache> fine;
    std::vector<EdgeConvCache> region;
    Vector h_g;
    int n_nodes = 0;
};

/// Full pipeline: fine EdgeConv stack -> mean-pool onto the partition ->
/// region EdgeConv stack -> global additive pooling -> linear head. With
/// use_quotient false the pooling runs directly over fine node embeddings.
Vector glare_forward(const Matrix& features, const GraphPlan& plan, const ModelParams& params,
                     const GlareConfig& config, ForwardCache* cache = nullptr);

/// Convenience overload that builds the plan from the graph.
Vector glare_forward(const FineGraph& graph, const ModelParams& params,
                     const GlareConfig& config, std::uint64_t kmeans_seed);

/// Exact reverse-mode gradients of the logits-side upstream gradient with
/// respect to every parameter. The partition is treated as a constant.
ModelParams glare_backward(const ForwardCache& cache, const Vector& d_logits,
                           const ModelParams& params, const GlareConfig& config);

/// Self-describing model file: config, optional PCA model, flat parameters,
/// and the k-means seed so evaluation reproduces the training partitions.
struct Checkpoint {
    GlareConfig config;
    ModelParams params;
    std::optional<PcaModel> pca;
    std::uint64_t kmeans_seed = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace glare
