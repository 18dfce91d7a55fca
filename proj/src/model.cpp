#include "glare/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace glare {

using nlohmann::json;

std::string to_string(RegionEdgeMode mode) {
    return mode == RegionEdgeMode::kKnn ? "knn" : "induced";
}

RegionEdgeMode region_edge_mode_from_string(const std::string& s) {
    if (s == "knn") return RegionEdgeMode::kKnn;
    if (s == "induced") return RegionEdgeMode::kInduced;
    throw UsageError("unknown region edge mode: " + s);
}

void GlareConfig::validate() const {
    auto positive = [](int v, const char* name) {
        if (v < 1) throw UsageError(std::string("config: ") + name + " must be >= 1");
    };
    if (appearance_dim < 0) throw UsageError("config: appearance_dim must be >= 0");
    if (fine_layers < 0 || region_layers < 0) {
        throw UsageError("config: layer counts must be >= 0");
    }
    if (fine_layers > 0) {
        positive(fine_hidden, "fine_hidden");
        positive(fine_out, "fine_out");
    }
    if (region_layers > 0) {
        positive(region_hidden, "region_hidden");
        positive(region_out, "region_out");
    }
    positive(k_nn, "k_nn");
    positive(k_q, "k_q");
    if (n_classes < 2) throw UsageError("config: n_classes must be >= 2");
    if (use_quotient && k_regions < 2) {
        throw UsageError("config: k_regions must be >= 2 when use_quotient is set");
    }
}

long param_count(const GlareConfig& config) {
    auto mlp = [](long in, long hidden, long out) {
        return 2 * in * hidden + hidden + hidden * out + out;
    };
    long total = 0;
    for (int l = 0; l < config.fine_layers; ++l) {
        total += mlp(config.fine_in(l), config.fine_hidden, config.fine_out);
    }
    if (config.use_quotient) {
        for (int l = 0; l < config.region_layers; ++l) {
            total += mlp(config.region_in(l), config.region_hidden, config.region_out);
        }
    }
    total += static_cast<long>(config.n_classes) * config.head_in() + config.n_classes;
    return total;
}

long ModelParams::count() const {
    long total = static_cast<long>(head_w.size() + head_b.size());
    for (const Mlp2Params& p : fine_convs) total += p.param_count();
    for (const Mlp2Params& p : region_convs) total += p.param_count();
    return total;
}

namespace {

void append_mlp(const Mlp2Params& p, Vector& flat, Eigen::Index& at) {
    auto put = [&](const double* data, Eigen::Index n) {
        flat.segment(at, n) = Eigen::Map<const Vector>(data, n);
        at += n;
    };
    put(p.w1.data(), p.w1.size());
    put(p.b1.data(), p.b1.size());
    put(p.w2.data(), p.w2.size());
    put(p.b2.data(), p.b2.size());
}

void read_mlp(Mlp2Params& p, const Vector& flat, Eigen::Index& at) {
    auto take = [&](double* data, Eigen::Index n) {
        Eigen::Map<Vector>(data, n) = flat.segment(at, n);
        at += n;
    };
    take(p.w1.data(), p.w1.size());
    take(p.b1.data(), p.b1.size());
    take(p.w2.data(), p.w2.size());
    take(p.b2.data(), p.b2.size());
}

Mlp2Params init_mlp(Eigen::Index in, Eigen::Index hidden, Eigen::Index out, Rng& rng) {
    Mlp2Params p = Mlp2Params::zeros(in, hidden, out);
    const double lim1 = std::sqrt(6.0 / static_cast<double>(in));
    const double lim2 = std::sqrt(6.0 / static_cast<double>(hidden));
    for (Eigen::Index i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = rng.uniform(-lim1, lim1);
    for (Eigen::Index i = 0; i < p.w2.size(); ++i) p.w2.data()[i] = rng.uniform(-lim2, lim2);
    return p;
}

}  // namespace

Vector ModelParams::flatten() const {
    Vector flat(count());
    Eigen::Index at = 0;
    for (const Mlp2Params& p : fine_convs) append_mlp(p, flat, at);
    for (const Mlp2Params& p : region_convs) append_mlp(p, flat, at);
    flat.segment(at, head_w.size()) = Eigen::Map<const Vector>(head_w.data(), head_w.size());
    at += head_w.size();
    flat.segment(at, head_b.size()) = head_b;
    return flat;
}

void ModelParams::set_from_flat(const Vector& flat) {
    if (flat.size() != count()) {
        std::ostringstream os;
        os << "flat parameter vector has " << flat.size() << " entries, model needs " << count();
        throw DimensionError(os.str());
    }
    Eigen::Index at = 0;
    for (Mlp2Params& p : fine_convs) read_mlp(p, flat, at);
    for (Mlp2Params& p : region_convs) read_mlp(p, flat, at);
    Eigen::Map<Vector>(head_w.data(), head_w.size()) = flat.segment(at, head_w.size());
    at += head_w.size();
    head_b = flat.segment(at, head_b.size());
}

ModelParams ModelParams::zeros(const GlareConfig& config) {
    config.validate();
    ModelParams m;
    for (int l = 0; l < config.fine_layers; ++l) {
        m.fine_convs.push_back(
            Mlp2Params::zeros(2 * config.fine_in(l), config.fine_hidden, config.fine_out));
    }
    if (config.use_quotient) {
        for (int l = 0; l < config.region_layers; ++l) {
            m.region_convs.push_back(Mlp2Params::zeros(2 * config.region_in(l),
                                                       config.region_hidden, config.region_out));
        }
    }
    m.head_w = Matrix::Zero(config.n_classes, config.head_in());
    m.head_b = Vector::Zero(config.n_classes);
    return m;
}

ModelParams ModelParams::init(const GlareConfig& config, Rng& rng) {
    config.validate();
    ModelParams m;
    for (int l = 0; l < config.fine_layers; ++l) {
        m.fine_convs.push_back(
            init_mlp(2 * config.fine_in(l), config.fine_hidden, config.fine_out, rng));
    }
    if (config.use_quotient) {
        for (int l = 0; l < config.region_layers; ++l) {
            m.region_convs.push_back(
                init_mlp(2 * config.region_in(l), config.region_hidden, config.region_out, rng));
        }
    }
    const int hin = config.head_in();
    const double lim = std::sqrt(6.0 / static_cast<double>(hin + config.n_classes));
    m.head_w.resize(config.n_classes, hin);
    for (Eigen::Index i = 0; i < m.head_w.size(); ++i) {
        m.head_w.data()[i] = rng.uniform(-lim, lim);
    }
    m.head_b = Vector::Zero(config.n_classes);
    return m;
}

GraphPlan make_plan(const Coords& coords, const GlareConfig& config,
                    std::uint64_t kmeans_seed) {
    FineGraph g;
    g.coords = coords;
    g.features.resize(coords.rows(), 0);
    g.edges = build_knn_edges(coords, config.k_nn);
    return make_plan(g, config, kmeans_seed);
}

GraphPlan make_plan(const FineGraph& graph, const GlareConfig& config,
                    std::uint64_t kmeans_seed) {
    GraphPlan plan;
    plan.fine_edges = config.symmetrize_edges ? symmetrize_edges(graph.edges) : graph.edges;
    if (!config.use_quotient) return plan;

    plan.has_quotient = true;
    KMeansState km = kmeans_partition(graph.coords, config.k_regions, kmeans_seed);
    plan.partition = std::move(km.partition);
    const Matrix empty(graph.coords.rows(), 0);
    plan.region_coords = region_pool(empty, graph.coords, plan.partition).second;
    plan.region_edges = config.region_edges == RegionEdgeMode::kKnn
                            ? build_region_knn(plan.region_coords, config.k_q)
                            : induced_edges(plan.fine_edges, plan.partition);
    return plan;
}

Matrix edgeconv_forward(const Matrix& node_feats, const EdgeList& edges, const Mlp2Params& phi,
                        EdgeConvCache* cache) {
    const Eigen::Index n = node_feats.rows();
    const Eigen::Index d = node_feats.cols();
    if (phi.in_dim() != 2 * d) {
        std::ostringstream os;
        os << "edgeconv_forward: phi expects width " << phi.in_dim() << ", node features give "
           << 2 * d;
        throw DimensionError(os.str());
    }

    std::vector<int> indeg(static_cast<std::size_t>(n), 0);
    for (const Edge& e : edges) {
        if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
            throw DimensionError("edgeconv_forward: edge endpoint out of range");
        }
        ++indeg[static_cast<std::size_t>(e.dst)];
    }
    EdgeList aug = edges;
    for (int i = 0; i < n; ++i) {
        if (indeg[static_cast<std::size_t>(i)] == 0) aug.push_back({i, i});
    }

    const Eigen::Index m = static_cast<Eigen::Index>(aug.size());
    Matrix msg_in(m, 2 * d);
    for (Eigen::Index e = 0; e < m; ++e) {
        const auto& [src, dst] = aug[static_cast<std::size_t>(e)];
        msg_in.row(e).head(d) = node_feats.row(dst);
        msg_in.row(e).tail(d) = node_feats.row(src) - node_feats.row(dst);
    }

    Mlp2Cache local_cache;
    Mlp2Cache* mlp_cache = cache != nullptr ? &cache->mlp : &local_cache;
    Matrix msgs = mlp2_forward(phi, msg_in, mlp_cache);

    const Eigen::Index dout = msgs.cols();
    Matrix out(n, dout);
    Eigen::MatrixXi argmax = Eigen::MatrixXi::Constant(n, dout, -1);
    for (Eigen::Index e = 0; e < m; ++e) {
        const auto& [src, dst] = aug[static_cast<std::size_t>(e)];
        for (Eigen::Index c = 0; c < dout; ++c) {
            const int cur = argmax(dst, c);
            if (cur < 0 || msgs(e, c) > out(dst, c) ||
                (msgs(e, c) == out(dst, c) && src < aug[static_cast<std::size_t>(cur)].src)) {
                out(dst, c) = msgs(e, c);
                argmax(dst, c) = static_cast<int>(e);
            }
        }
    }
    if (cache != nullptr) {
        cache->edges = std::move(aug);
        cache->argmax = std::move(argmax);
    }
    return out;
}

Matrix edgeconv_backward(const Mlp2Params& phi, const EdgeConvCache& cache, const Matrix& d_out,
                         Mlp2Params& phi_grads) {
    const Eigen::Index n = d_out.rows();
    const Eigen::Index dout = d_out.cols();
    const Eigen::Index m = static_cast<Eigen::Index>(cache.edges.size());
    if (cache.argmax.rows() != n || cache.argmax.cols() != dout) {
        throw InvariantError("edgeconv_backward: cache does not match upstream gradient");
    }

    Matrix d_msgs = Matrix::Zero(m, dout);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < dout; ++c) {
            d_msgs(cache.argmax(i, c), c) += d_out(i, c);
        }
    }

    Matrix d_msg_in = mlp2_backward(phi, cache.mlp, d_msgs, phi_grads);
    const Eigen::Index d = d_msg_in.cols() / 2;
    Matrix d_h = Matrix::Zero(n, d);
    for (Eigen::Index e = 0; e < m; ++e) {
        const auto& [src, dst] = cache.edges[static_cast<std::size_t>(e)];
        d_h.row(dst) += d_msg_in.row(e).head(d) - d_msg_in.row(e).tail(d);
        d_h.row(src) += d_msg_in.row(e).tail(d);
    }
    return d_h;
}

Vector global_add_pool(const Matrix& region_feats) {
    if (region_feats.rows() < 1) {
        throw DegenerateInputError("global_add_pool: need at least one row");
    }
    return region_feats.colwise().sum().transpose();
}

Vector classify(const Vector& h_g, const Matrix& head_w, const Vector& head_b) {
    if (head_w.cols() != h_g.size() || head_w.rows() != head_b.size()) {
        std::ostringstream os;
        os << "classify: head " << head_w.rows() << "x" << head_w.cols() << " vs input "
           << h_g.size();
        throw DimensionError(os.str());
    }
    return head_w * h_g + head_b;
}

namespace {

Matrix pool_features(const Matrix& feats, const Partition& partition,
                     std::vector<int>* counts_out) {
    Matrix pooled = Matrix::Zero(partition.k, feats.cols());
    std::vector<int> counts(static_cast<std::size_t>(partition.k), 0);
    for (int i = 0; i < partition.n_nodes; ++i) {
        const int a = partition.assignment[static_cast<std::size_t>(i)];
        pooled.row(a) += feats.row(i);
        ++counts[static_cast<std::size_t>(a)];
    }
    for (int c = 0; c < partition.k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
            throw InvariantError("glare_forward: empty region in partition");
        }
        pooled.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
    if (counts_out != nullptr) *counts_out = std::move(counts);
    return pooled;
}

}  // namespace

Vector glare_forward(const Matrix& features, const GraphPlan& plan, const ModelParams& params,
                     const GlareConfig& config, ForwardCache* cache) {
    if (features.cols() != config.d_in()) {
        std::ostringstream os;
        os << "glare_forward: features are " << features.cols() << " wide, config expects "
           << config.d_in();
        throw DimensionError(os.str());
    }
    if (cache != nullptr) {
        cache->plan = &plan;
        cache->fine.resize(static_cast<std::size_t>(config.fine_layers));
        cache->region.clear();
        cache->n_nodes = static_cast<int>(features.rows());
    }

    Matrix h = features;
    for (int l = 0; l < config.fine_layers; ++l) {
        h = edgeconv_forward(h, plan.fine_edges, params.fine_convs[static_cast<std::size_t>(l)],
                             cache != nullptr ? &cache->fine[static_cast<std::size_t>(l)]
                                              : nullptr);
    }

    Vector h_g;
    if (config.use_quotient) {
        if (!plan.has_quotient) {
            throw InvariantError("glare_forward: config wants a quotient but the plan has none");
        }
        Matrix hq = pool_features(h, plan.partition, nullptr);
        if (cache != nullptr) {
            cache->region.resize(static_cast<std::size_t>(config.region_layers));
        }
        for (int l = 0; l < config.region_layers; ++l) {
            hq = edgeconv_forward(hq, plan.region_edges,
                                  params.region_convs[static_cast<std::size_t>(l)],
                                  cache != nullptr ? &cache->region[static_cast<std::size_t>(l)]
                                                   : nullptr);
        }
        h_g = global_add_pool(hq);
    } else {
        h_g = global_add_pool(h);
    }

    if (cache != nullptr) cache->h_g = h_g;
    return classify(h_g, params.head_w, params.head_b);
}

Vector glare_forward(const FineGraph& graph, const ModelParams& params,
                     const GlareConfig& config, std::uint64_t kmeans_seed) {
    const GraphPlan plan = make_plan(graph, config, kmeans_seed);
    return glare_forward(graph.features, plan, params, config, nullptr);
}

ModelParams glare_backward(const ForwardCache& cache, const Vector& d_logits,
                           const ModelParams& params, const GlareConfig& config) {
    if (cache.plan == nullptr) throw InvariantError("glare_backward: cache was not filled");
    if (d_logits.size() != params.head_b.size()) {
        throw DimensionError("glare_backward: upstream gradient width mismatch");
    }

    ModelParams grads = ModelParams::zeros(config);
    grads.head_w.noalias() += d_logits * cache.h_g.transpose();
    grads.head_b += d_logits;
    const Vector d_hg = params.head_w.transpose() * d_logits;

    Matrix d_h;
    if (config.use_quotient) {
        const Partition& partition = cache.plan->partition;
        Matrix d_hq = d_hg.transpose().replicate(partition.k, 1);
        for (int l = config.region_layers - 1; l >= 0; --l) {
            d_hq = edgeconv_backward(params.region_convs[static_cast<std::size_t>(l)],
                                     cache.region[static_cast<std::size_t>(l)], d_hq,
                                     grads.region_convs[static_cast<std::size_t>(l)]);
        }
        // Mean-pool backward: each member receives 1/|R| of its region's row.
        std::vector<int> counts(static_cast<std::size_t>(partition.k), 0);
        for (int a : partition.assignment) ++counts[static_cast<std::size_t>(a)];
        d_h.resize(cache.n_nodes, d_hq.cols());
        for (int i = 0; i < partition.n_nodes; ++i) {
            const int a = partition.assignment[static_cast<std::size_t>(i)];
            d_h.row(i) = d_hq.row(a) / static_cast<double>(counts[static_cast<std::size_t>(a)]);
        }
    } else {
        d_h = d_hg.transpose().replicate(cache.n_nodes, 1);
    }

    for (int l = config.fine_layers - 1; l >= 0; --l) {
        d_h = edgeconv_backward(params.fine_convs[static_cast<std::size_t>(l)],
                                cache.fine[static_cast<std::size_t>(l)], d_h,
                                grads.fine_convs[static_cast<std::size_t>(l)]);
    }
    return grads;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O
// ---------------------------------------------------------------------------

namespace {

constexpr int kCheckpointVersion = 1;

json config_to_json(const GlareConfig& c) {
    json j;
    j["appearance_dim"] = c.appearance_dim;
    j["fine_layers"] = c.fine_layers;
    j["fine_hidden"] = c.fine_hidden;
    j["fine_out"] = c.fine_out;
    j["region_layers"] = c.region_layers;
    j["region_hidden"] = c.region_hidden;
    j["region_out"] = c.region_out;
    j["k_regions"] = c.k_regions;
    j["k_nn"] = c.k_nn;
    j["k_q"] = c.k_q;
    j["n_classes"] = c.n_classes;
    j["feature_mode"] = to_string(c.feature_mode);
    j["use_quotient"] = c.use_quotient;
    j["symmetrize_edges"] = c.symmetrize_edges;
    j["region_edges"] = to_string(c.region_edges);
    return j;
}

GlareConfig config_from_json(const json& j) {
    GlareConfig c;
    try {
        c.appearance_dim = j.at("appearance_dim").get<int>();
        c.fine_layers = j.at("fine_layers").get<int>();
        c.fine_hidden = j.at("fine_hidden").get<int>();
        c.fine_out = j.at("fine_out").get<int>();
        c.region_layers = j.at("region_layers").get<int>();
        c.region_hidden = j.at("region_hidden").get<int>();
        c.region_out = j.at("region_out").get<int>();
        c.k_regions = j.at("k_regions").get<int>();
        c.k_nn = j.at("k_nn").get<int>();
        c.k_q = j.at("k_q").get<int>();
        c.n_classes = j.at("n_classes").get<int>();
        c.feature_mode = feature_mode_from_string(j.at("feature_mode").get<std::string>());
        c.use_quotient = j.at("use_quotient").get<bool>();
        c.symmetrize_edges = j.at("symmetrize_edges").get<bool>();
        c.region_edges = region_edge_mode_from_string(j.at("region_edges").get<std::string>());
    } catch (const json::exception& e) {
        throw SchemaError(std::string("checkpoint config: ") + e.what());
    }
    return c;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    json j;
    j["format_version"] = kCheckpointVersion;
    j["kmeans_seed"] = ckpt.kmeans_seed;
    j["config"] = config_to_json(ckpt.config);
    if (ckpt.pca.has_value()) {
        json p;
        p["mean"] = std::vector<double>(ckpt.pca->mean.data(),
                                        ckpt.pca->mean.data() + ckpt.pca->mean.size());
        json comps = json::array();
        for (Eigen::Index r = 0; r < ckpt.pca->components.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < ckpt.pca->components.cols(); ++c) {
                row.push_back(ckpt.pca->components(r, c));
            }
            comps.push_back(std::move(row));
        }
        p["components"] = std::move(comps);
        j["pca"] = std::move(p);
    } else {
        j["pca"] = nullptr;
    }
    const Vector flat = ckpt.params.flatten();
    j["params"] = std::vector<double>(flat.data(), flat.data() + flat.size());

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << j.dump() << '\n';
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("checkpoint parse error: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != kCheckpointVersion) {
            throw SchemaError("unsupported checkpoint format version");
        }
        Checkpoint ckpt;
        ckpt.kmeans_seed = j.at("kmeans_seed").get<std::uint64_t>();
        ckpt.config = config_from_json(j.at("config"));
        ckpt.config.validate();
        ckpt.params = ModelParams::zeros(ckpt.config);
        const auto flat_vec = j.at("params").get<std::vector<double>>();
        if (static_cast<long>(flat_vec.size()) != param_count(ckpt.config)) {
            std::ostringstream os;
            os << "checkpoint has " << flat_vec.size() << " parameters, config expects "
               << param_count(ckpt.config);
            throw SchemaError(os.str());
        }
        ckpt.params.set_from_flat(
            Eigen::Map<const Vector>(flat_vec.data(), static_cast<Eigen::Index>(flat_vec.size())));
        if (!j.at("pca").is_null()) {
            const json& p = j.at("pca");
            const auto mean = p.at("mean").get<std::vector<double>>();
            PcaModel pca;
            pca.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
            const json& comps = p.at("components");
            pca.components.resize(static_cast<Eigen::Index>(comps.size()), pca.mean.size());
            Eigen::Index r = 0;
            for (const json& row : comps) {
                if (static_cast<Eigen::Index>(row.size()) != pca.mean.size()) {
                    throw SchemaError("checkpoint pca components width mismatch");
                }
                Eigen::Index c = 0;
                for (const json& v : row) pca.components(r, c++) = v.get<double>();
                ++r;
            }
            ckpt.pca = std::move(pca);
        }
        return ckpt;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("checkpoint: ") + e.what());
    }
}

}  // namespace glare
