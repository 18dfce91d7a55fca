// Command-line front end: dataset synthesis, training, evaluation,
// ablations, and inference over the JSONL dataset format.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "glare/train_eval.hpp"

namespace fs = std::filesystem;
using namespace glare;

namespace {

// Exit codes: 0 success, 2 usage, 3 I/O, 4 schema, 5 numeric.
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitSchema = 4;
constexpr int kExitNumeric = 5;

struct AppConfig {
    std::string data;
    std::string out;
    std::uint64_t seed = 0;
    GlareConfig model;
    TrainConfig train;
};

std::string fmt_double(double v) { return nlohmann::json(v).dump(); }

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw UsageError("config: expected boolean, got \"" + s + "\"");
}

template <typename T>
T parse_num(const std::string& s) {
    std::istringstream is(s);
    T v{};
    is >> v;
    if (is.fail() || !is.eof()) throw UsageError("config: cannot parse number \"" + s + "\"");
    return v;
}

void apply_key(AppConfig& cfg, const std::string& key, const std::string& value) {
    GlareConfig& m = cfg.model;
    TrainConfig& t = cfg.train;
    if (key == "data") cfg.data = value;
    else if (key == "out") cfg.out = value;
    else if (key == "seed") cfg.seed = parse_num<std::uint64_t>(value);
    else if (key == "model.appearance_dim") m.appearance_dim = parse_num<int>(value);
    else if (key == "model.feature_mode") m.feature_mode = feature_mode_from_string(value);
    else if (key == "model.fine_layers") m.fine_layers = parse_num<int>(value);
    else if (key == "model.fine_hidden") m.fine_hidden = parse_num<int>(value);
    else if (key == "model.fine_out") m.fine_out = parse_num<int>(value);
    else if (key == "model.region_layers") m.region_layers = parse_num<int>(value);
    else if (key == "model.region_hidden") m.region_hidden = parse_num<int>(value);
    else if (key == "model.region_out") m.region_out = parse_num<int>(value);
    else if (key == "model.k_regions") m.k_regions = parse_num<int>(value);
    else if (key == "model.k_nn") m.k_nn = parse_num<int>(value);
    else if (key == "model.k_q") m.k_q = parse_num<int>(value);
    else if (key == "model.n_classes") m.n_classes = parse_num<int>(value);
    else if (key == "model.use_quotient") m.use_quotient = parse_bool(value);
    else if (key == "model.symmetrize_edges") m.symmetrize_edges = parse_bool(value);
    else if (key == "model.region_edges") m.region_edges = region_edge_mode_from_string(value);
    else if (key == "train.epochs") t.epochs = parse_num<int>(value);
    else if (key == "train.lr") t.lr = parse_num<double>(value);
    else if (key == "train.beta1") t.beta1 = parse_num<double>(value);
    else if (key == "train.beta2") t.beta2 = parse_num<double>(value);
    else if (key == "train.batch_size") t.batch_size = parse_num<int>(value);
    else if (key == "train.eval_every") t.eval_every = parse_num<int>(value);
    else if (key == "train.early_stop") t.early_stop_patience = parse_num<int>(value);
    else throw UsageError("config: unknown key \"" + key + "\"");
}

void load_config_file(AppConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config: line " + std::to_string(line_no) + " is not key = value");
        }
        apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

std::string render_resolved(const AppConfig& cfg) {
    std::ostringstream os;
    os << "data = " << cfg.data << '\n';
    os << "out = " << cfg.out << '\n';
    os << "seed = " << cfg.seed << '\n';
    const GlareConfig& m = cfg.model;
    os << "model.appearance_dim = " << m.appearance_dim << '\n';
    os << "model.feature_mode = " << to_string(m.feature_mode) << '\n';
    os << "model.fine_hidden = " << m.fine_hidden << '\n';
    os << "model.fine_layers = " << m.fine_layers << '\n';
    os << "model.fine_out = " << m.fine_out << '\n';
    os << "model.k_nn = " << m.k_nn << '\n';
    os << "model.k_q = " << m.k_q << '\n';
    os << "model.k_regions = " << m.k_regions << '\n';
    os << "model.n_classes = " << m.n_classes << '\n';
    os << "model.region_edges = " << to_string(m.region_edges) << '\n';
    os << "model.region_hidden = " << m.region_hidden << '\n';
    os << "model.region_layers = " << m.region_layers << '\n';
    os << "model.region_out = " << m.region_out << '\n';
    os << "model.symmetrize_edges = " << (m.symmetrize_edges ? "true" : "false") << '\n';
    os << "model.use_quotient = " << (m.use_quotient ? "true" : "false") << '\n';
    const TrainConfig& t = cfg.train;
    os << "train.batch_size = " << t.batch_size << '\n';
    os << "train.beta1 = " << fmt_double(t.beta1) << '\n';
    os << "train.beta2 = " << fmt_double(t.beta2) << '\n';
    os << "train.early_stop = " << t.early_stop_patience << '\n';
    os << "train.epochs = " << t.epochs << '\n';
    os << "train.eval_every = " << t.eval_every << '\n';
    os << "train.lr = " << fmt_double(t.lr) << '\n';
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << text;
    if (!out) throw IoError("failed writing: " + path);
}

// Overridable CLI options shared by train and ablate.
struct Overrides {
    std::optional<std::string> config_file;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    std::optional<double> lr;
    std::optional<int> batch_size;
    std::optional<int> k_regions;
    std::optional<int> k_nn;
    std::optional<int> k_q;
    std::optional<int> appearance_dim;
    std::optional<std::string> feature_mode;
    std::optional<bool> use_quotient;
    std::optional<std::string> region_edges;
    std::optional<int> eval_every;
    std::optional<int> early_stop;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_file, "key = value config file");
    cmd->add_option("--seed", o.seed, "master seed for all substreams");
    cmd->add_option("--epochs", o.epochs, "training epochs");
    cmd->add_option("--lr", o.lr, "Adam learning rate");
    cmd->add_option("--batch-size", o.batch_size, "batch size");
    cmd->add_option("--k-regions", o.k_regions, "quotient region count");
    cmd->add_option("--k-nn", o.k_nn, "fine-graph neighbors");
    cmd->add_option("--k-q", o.k_q, "region-graph neighbors");
    cmd->add_option("--appearance-dim", o.appearance_dim, "PCA output width");
    cmd->add_option("--feature-mode", o.feature_mode, "joint | position | appearance");
    cmd->add_option("--use-quotient", o.use_quotient, "enable the quotient stage");
    cmd->add_option("--region-edges", o.region_edges, "knn | induced");
    cmd->add_option("--eval-every", o.eval_every, "validation cadence in epochs");
    cmd->add_option("--early-stop", o.early_stop, "early-stop patience (0 = off)");
}

AppConfig resolve(const Overrides& o, const std::string& data, const std::string& out) {
    AppConfig cfg;
    if (o.config_file) load_config_file(cfg, *o.config_file);
    if (!data.empty()) cfg.data = data;
    if (!out.empty()) cfg.out = out;
    if (o.seed) cfg.seed = *o.seed;
    if (o.epochs) cfg.train.epochs = *o.epochs;
    if (o.lr) cfg.train.lr = *o.lr;
    if (o.batch_size) cfg.train.batch_size = *o.batch_size;
    if (o.k_regions) cfg.model.k_regions = *o.k_regions;
    if (o.k_nn) cfg.model.k_nn = *o.k_nn;
    if (o.k_q) cfg.model.k_q = *o.k_q;
    if (o.appearance_dim) cfg.model.appearance_dim = *o.appearance_dim;
    if (o.feature_mode) cfg.model.feature_mode = feature_mode_from_string(*o.feature_mode);
    if (o.use_quotient) cfg.model.use_quotient = *o.use_quotient;
    if (o.region_edges) cfg.model.region_edges = region_edge_mode_from_string(*o.region_edges);
    if (o.eval_every) cfg.train.eval_every = *o.eval_every;
    if (o.early_stop) cfg.train.early_stop_patience = *o.early_stop;
    cfg.train.seed = cfg.seed;
    return cfg;
}

Dataset load_data_checked(const std::string& path, AppConfig& cfg) {
    if (path.empty()) throw UsageError("missing --data");
    Dataset ds = load_dataset(path);
    cfg.model.n_classes = ds.n_classes;
    if (ds.f_raw == 0) cfg.model.appearance_dim = 0;
    if (cfg.model.feature_mode == FeatureMode::kAppearance && cfg.model.appearance_dim == 0) {
        throw UsageError("appearance feature mode needs a dataset with descriptors");
    }
    return ds;
}

std::vector<std::uint64_t> seed_list(std::uint64_t base, int n) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < n; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
    return seeds;
}

std::vector<int> parse_k_list(const std::string& spec) {
    std::vector<int> ks;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        const auto dots = token.find("..");
        if (dots != std::string::npos) {
            const int lo = parse_num<int>(token.substr(0, dots));
            const int hi = parse_num<int>(token.substr(dots + 2));
            if (hi < lo) throw UsageError("bad k range: " + token);
            for (int k = lo; k <= hi; ++k) ks.push_back(k);
        } else {
            ks.push_back(parse_num<int>(token));
        }
    }
    if (ks.empty()) throw UsageError("empty k list");
    return ks;
}

// ---------------------------------------------------------------------------

int cmd_synth(int classes, int per_class, int landmarks, double noise, std::uint64_t seed,
              const std::string& out) {
    const Dataset ds = synth_dataset(classes, per_class, landmarks, noise, seed);
    save_dataset(ds, out);
    std::cout << "wrote " << ds.samples.size() << " samples (" << ds.train.size() << " train / "
              << ds.val.size() << " val / " << ds.test.size() << " test) to " << out << "\n";
    return 0;
}

int cmd_train(AppConfig cfg) {
    const Dataset ds = load_data_checked(cfg.data, cfg);
    if (cfg.out.empty()) throw UsageError("missing --out");
    cfg.model.validate();
    cfg.train.validate();

    std::cout << "parameters: " << param_count(cfg.model) << "\n";
    fs::create_directories(cfg.out);

    const TrainResult result = train(ds, cfg.model, cfg.train);

    Checkpoint ckpt;
    ckpt.config = cfg.model;
    ckpt.params = result.params;
    ckpt.pca = result.pca;
    ckpt.kmeans_seed = result.kmeans_seed;
    save_checkpoint(ckpt, (fs::path(cfg.out) / "checkpoint.json").string());
    write_history_jsonl(result.history, (fs::path(cfg.out) / "history.jsonl").string());
    write_text((fs::path(cfg.out) / "config.resolved.cfg").string(), render_resolved(cfg));

    std::cout << "best val accuracy " << result.best_val_acc << " at epoch " << result.best_epoch
              << "; checkpoint written to " << cfg.out << "\n";
    return 0;
}

int cmd_eval(const std::string& data, const std::string& ckpt_path, const std::string& split,
             const std::string& out, int batch_size) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const Dataset ds = load_dataset(data);
    if (ds.n_classes != ckpt.config.n_classes) {
        throw SchemaError("dataset classes do not match checkpoint config");
    }

    const Prepared prep = prepare_dataset(ds, ckpt.config, ckpt.kmeans_seed,
                                          ckpt.pca ? &*ckpt.pca : nullptr);
    const IndexList* idx = nullptr;
    if (split == "train") idx = &prep.train;
    else if (split == "val") idx = &prep.val;
    else if (split == "test") idx = &prep.test;
    else throw UsageError("unknown split: " + split);

    const Metrics m = evaluate(prep, ckpt.params, ckpt.config, *idx, batch_size);
    const std::string table = render_metrics_table(m, prep.class_names);
    std::cout << table;
    if (!out.empty()) {
        fs::create_directories(out);
        write_text((fs::path(out) / "metrics.json").string(),
                   metrics_to_json(m, prep.class_names) + "\n");
        write_text((fs::path(out) / "metrics.txt").string(), table);
        write_confusion_csv(m, prep.class_names, (fs::path(out) / "confusion.csv").string());
    }
    return 0;
}

int write_ablation(const AblationReport& report, const std::string& out) {
    const std::string table = render_ablation_table(report);
    std::cout << table;
    if (!out.empty()) {
        fs::create_directories(out);
        write_text((fs::path(out) / "report.jsonl").string(), ablation_to_jsonl(report));
        write_text((fs::path(out) / "report.txt").string(), table);
    }
    return 0;
}

int cmd_infer(const std::string& data, const std::string& ckpt_path, const std::string& out) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const Dataset ds = load_dataset(data);
    if (ds.n_classes != ckpt.config.n_classes) {
        throw SchemaError("dataset classes do not match checkpoint config");
    }
    const Prepared prep = prepare_dataset(ds, ckpt.config, ckpt.kmeans_seed,
                                          ckpt.pca ? &*ckpt.pca : nullptr);

    std::ofstream os(out, std::ios::binary);
    if (!os) throw IoError("cannot write predictions: " + out);
    for (const PreparedSample& s : prep.samples) {
        const Vector logits = glare_forward(s.features, s.plan, ckpt.params, ckpt.config);
        const Vector shifted = logits.array() - logits.maxCoeff();
        Vector probs = shifted.array().exp();
        probs /= probs.sum();
        Eigen::Index pred = 0;
        logits.maxCoeff(&pred);
        nlohmann::json j;
        j["id"] = s.id;
        j["pred"] = static_cast<int>(pred);
        j["pred_name"] = prep.class_names[static_cast<std::size_t>(pred)];
        j["probs"] = std::vector<double>(probs.data(), probs.data() + probs.size());
        os << j.dump() << '\n';
    }
    if (!os) throw IoError("failed writing predictions: " + out);
    std::cout << "wrote " << prep.samples.size() << " predictions to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GLaRE: hierarchical quotient-graph network over landmark graphs"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic landmark dataset");
    int s_classes = 7, s_per_class = 200, s_landmarks = 68;
    double s_noise = 0.05;
    std::uint64_t s_seed = 0;
    std::string s_out = "synth.jsonl";
    synth->add_option("--classes", s_classes, "number of classes");
    synth->add_option("--per-class", s_per_class, "samples per class");
    synth->add_option("--landmarks", s_landmarks, "landmarks per sample");
    synth->add_option("--noise", s_noise, "noise scale");
    synth->add_option("--seed", s_seed, "generator seed");
    synth->add_option("--out", s_out, "output JSONL path")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "train a model");
    Overrides t_over;
    std::string t_data, t_out;
    train_cmd->add_option("--data", t_data, "dataset JSONL");
    train_cmd->add_option("--out", t_out, "output directory");
    add_override_flags(train_cmd, t_over);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string e_data, e_ckpt, e_split = "test", e_out;
    int e_batch = 32;
    eval_cmd->add_option("--data", e_data, "dataset JSONL")->required();
    eval_cmd->add_option("--checkpoint", e_ckpt, "checkpoint path")->required();
    eval_cmd->add_option("--split", e_split, "train | val | test");
    eval_cmd->add_option("--out", e_out, "output directory");
    eval_cmd->add_option("--batch-size", e_batch, "timing batch size");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "run an ablation study");
    ablate->require_subcommand(1);
    Overrides a_over;
    std::string a_data, a_out, a_k = "5..10", a_modes = "joint,position,appearance";
    int a_seeds = 3;
    auto* ab_regions = ablate->add_subcommand("regions", "sweep the region count");
    auto* ab_features = ablate->add_subcommand("features", "sweep the feature mode");
    auto* ab_quotient = ablate->add_subcommand("quotient", "quotient on/off comparison");
    for (CLI::App* sub : {ab_regions, ab_features, ab_quotient}) {
        sub->add_option("--data", a_data, "dataset JSONL");
        sub->add_option("--out", a_out, "output directory");
        sub->add_option("--seeds", a_seeds, "number of seeds per setting");
        add_override_flags(sub, a_over);
    }
    ab_regions->add_option("--k", a_k, "region counts, e.g. 5..10 or 5,8,9");
    ab_features->add_option("--modes", a_modes, "comma-separated feature modes");

    // infer
    auto* infer_cmd = app.add_subcommand("infer", "per-sample predictions");
    std::string i_data, i_ckpt, i_out = "predictions.jsonl";
    infer_cmd->add_option("--data", i_data, "dataset JSONL")->required();
    infer_cmd->add_option("--checkpoint", i_ckpt, "checkpoint path")->required();
    infer_cmd->add_option("--out", i_out, "output JSONL path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (synth->parsed()) {
            return cmd_synth(s_classes, s_per_class, s_landmarks, s_noise, s_seed, s_out);
        }
        if (train_cmd->parsed()) {
            return cmd_train(resolve(t_over, t_data, t_out));
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(e_data, e_ckpt, e_split, e_out, e_batch);
        }
        if (ablate->parsed()) {
            AppConfig cfg = resolve(a_over, a_data, a_out);
            const Dataset ds = load_data_checked(cfg.data, cfg);
            cfg.model.validate();
            cfg.train.validate();
            const auto seeds = seed_list(cfg.seed, a_seeds);
            AblationReport report;
            if (ab_regions->parsed()) {
                report = ablate_regions(ds, parse_k_list(a_k), seeds, cfg.model, cfg.train);
            } else if (ab_features->parsed()) {
                std::vector<FeatureMode> modes;
                std::stringstream ss(a_modes);
                std::string token;
                while (std::getline(ss, token, ',')) {
                    modes.push_back(feature_mode_from_string(token));
                }
                report = ablate_features(ds, modes, seeds, cfg.model, cfg.train);
            } else {
                report = ablate_quotient(ds, seeds, cfg.model, cfg.train);
            }
            if (!cfg.out.empty()) {
                fs::create_directories(cfg.out);
                write_text((fs::path(cfg.out) / "config.resolved.cfg").string(),
                           render_resolved(cfg));
            }
            return write_ablation(report, cfg.out);
        }
        if (infer_cmd->parsed()) {
            return cmd_infer(i_data, i_ckpt, i_out);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const DimensionError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const DegenerateInputError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
