#include "glare/train_eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace glare {

using nlohmann::json;

void TrainConfig::validate() const {
    if (epochs < 1) throw UsageError("train config: epochs must be >= 1");
    // lr = 0 is allowed: it freezes the optimizer, which is useful for
    // smoke-testing the pipeline.
    if (lr < 0.0) throw UsageError("train config: lr must be >= 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
        throw UsageError("train config: betas must lie in [0, 1)");
    }
    if (batch_size < 1) throw UsageError("train config: batch_size must be >= 1");
    if (eval_every < 1) throw UsageError("train config: eval_every must be >= 1");
    if (early_stop_patience < 0) throw UsageError("train config: patience must be >= 0");
}

Prepared prepare_dataset(const Dataset& dataset, const GlareConfig& config,
                         std::uint64_t kmeans_seed, const PcaModel* pca_preset) {
    config.validate();
    if (dataset.samples.empty()) throw SchemaError("prepare_dataset: dataset is empty");
    if (config.appearance_dim > 0 && dataset.f_raw == 0) {
        throw SchemaError(
            "prepare_dataset: config expects appearance descriptors but the dataset has none "
            "(set appearance_dim = 0)");
    }

    Prepared prep;
    prep.train = dataset.train;
    prep.val = dataset.val;
    prep.test = dataset.test;
    prep.n_classes = dataset.n_classes;
    prep.class_names = dataset.class_names;
    prep.kmeans_seed = kmeans_seed;

    if (config.appearance_dim > 0) {
        if (pca_preset != nullptr) {
            if (pca_preset->out_dim() != config.appearance_dim ||
                pca_preset->mean.size() != dataset.f_raw) {
                throw SchemaError("prepare_dataset: PCA model does not match dataset/config");
            }
            prep.pca = *pca_preset;
        } else {
            if (dataset.train.empty()) {
                throw SchemaError("prepare_dataset: cannot fit PCA without a train split");
            }
            Matrix rows(static_cast<Eigen::Index>(dataset.train.size()) * dataset.n_landmarks,
                        dataset.f_raw);
            Eigen::Index at = 0;
            for (int idx : dataset.train) {
                const Matrix& app = dataset.samples[static_cast<std::size_t>(idx)].appearance;
                rows.middleRows(at, app.rows()) = app;
                at += app.rows();
            }
            prep.pca = pca_fit(rows, config.appearance_dim);
        }
    }

    prep.samples.reserve(dataset.samples.size());
    for (const RawSample& raw : dataset.samples) {
        PreparedSample ps;
        ps.id = raw.id;
        ps.label = raw.label;
        const Coords norm = normalize_landmarks(raw.landmarks);
        Matrix app(norm.rows(), config.appearance_dim);
        if (config.appearance_dim > 0) {
            app = pca_apply(*prep.pca, raw.appearance);
        }
        ps.features = joint_features(norm, app, config.feature_mode);
        ps.plan = make_plan(norm, config, kmeans_seed);
        prep.samples.push_back(std::move(ps));
    }
    return prep;
}

namespace {

double split_accuracy(const Prepared& prep, const ModelParams& params, const GlareConfig& gcfg,
                      const IndexList& split) {
    if (split.empty()) return 0.0;
    int hits = 0;
    for (int idx : split) {
        const PreparedSample& s = prep.samples[static_cast<std::size_t>(idx)];
        const Vector logits = glare_forward(s.features, s.plan, params, gcfg);
        Eigen::Index pred = 0;
        logits.maxCoeff(&pred);
        hits += static_cast<int>(pred) == s.label ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(split.size());
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

TrainResult train(const Dataset& dataset, const GlareConfig& gcfg, const TrainConfig& tcfg) {
    gcfg.validate();
    tcfg.validate();
    if (dataset.train.empty()) throw SchemaError("train: empty train split");
    if (dataset.val.empty()) throw SchemaError("train: empty val split");

    const std::uint64_t kmeans_seed = Rng::substream(tcfg.seed, "kmeans").next_u64();
    const Prepared prep = prepare_dataset(dataset, gcfg, kmeans_seed);

    Rng init_rng = Rng::substream(tcfg.seed, "init");
    Rng shuffle_rng = Rng::substream(tcfg.seed, "shuffle");

    ModelParams params = ModelParams::init(gcfg, init_rng);
    Vector flat = params.flatten();
    AdamState adam(flat.size(), tcfg.lr, tcfg.beta1, tcfg.beta2);

    TrainResult result;
    result.pca = prep.pca;
    result.kmeans_seed = kmeans_seed;
    result.params = params;

    IndexList order = prep.train;
    const int n_train = static_cast<int>(order.size());
    int evals_since_best = 0;

    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        params.set_from_flat(flat);
        double loss_sum = 0.0;

        for (int start = 0; start < n_train; start += tcfg.batch_size) {
            const int end = std::min(start + tcfg.batch_size, n_train);
            Vector grad_sum = Vector::Zero(flat.size());
            for (int b = start; b < end; ++b) {
                const PreparedSample& s =
                    prep.samples[static_cast<std::size_t>(order[static_cast<std::size_t>(b)])];
                ForwardCache cache;
                const Vector logits = glare_forward(s.features, s.plan, params, gcfg, &cache);
                const CrossEntropyResult ce = softmax_cross_entropy(logits, s.label);
                if (!std::isfinite(ce.loss)) {
                    std::ostringstream os;
                    os << "training diverged: non-finite loss at epoch " << epoch + 1
                       << ", batch offset " << start << ", sample " << s.id;
                    throw NumericError(os.str());
                }
                loss_sum += ce.loss;
                grad_sum += glare_backward(cache, ce.grad, params, gcfg).flatten();
            }
            grad_sum /= static_cast<double>(end - start);
            adam_step(adam, flat, grad_sum);
            params.set_from_flat(flat);
        }

        EpochStats stats;
        stats.epoch = epoch + 1;
        stats.train_loss = loss_sum / static_cast<double>(n_train);
        const bool eval_now = (epoch + 1) % tcfg.eval_every == 0 || epoch + 1 == tcfg.epochs;
        if (eval_now) {
            stats.val_acc = split_accuracy(prep, params, gcfg, prep.val);
            if (result.best_epoch < 0 || stats.val_acc > result.best_val_acc) {
                result.best_val_acc = stats.val_acc;
                result.best_epoch = epoch + 1;
                result.params = params;
                evals_since_best = 0;
            } else {
                ++evals_since_best;
            }
        }
        result.history.push_back(stats);

        if (tcfg.early_stop_patience > 0 && evals_since_best >= tcfg.early_stop_patience) {
            break;
        }
    }
    return result;
}

Metrics evaluate(const Prepared& prep, const ModelParams& params, const GlareConfig& gcfg,
                 const IndexList& split, int batch_size) {
    if (split.empty()) throw UsageError("evaluate: empty split");
    if (batch_size < 1) throw UsageError("evaluate: batch_size must be >= 1");

    const int c = gcfg.n_classes;
    Metrics m;
    m.confusion = Eigen::MatrixXi::Zero(c, c);
    m.per_sample_correct.reserve(split.size());

    std::vector<double> batch_ms;
    double loss_sum = 0.0;
    const int n = static_cast<int>(split.size());
    for (int start = 0; start < n; start += batch_size) {
        const int end = std::min(start + batch_size, n);
        const auto t0 = std::chrono::steady_clock::now();
        for (int b = start; b < end; ++b) {
            const PreparedSample& s =
                prep.samples[static_cast<std::size_t>(split[static_cast<std::size_t>(b)])];
            const Vector logits = glare_forward(s.features, s.plan, params, gcfg);
            Eigen::Index pred = 0;
            logits.maxCoeff(&pred);
            m.confusion(s.label, static_cast<int>(pred)) += 1;
            m.per_sample_correct.push_back(static_cast<int>(pred) == s.label ? 1 : 0);
            loss_sum += softmax_cross_entropy(logits, s.label).loss;
        }
        const auto t1 = std::chrono::steady_clock::now();
        batch_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }

    m.mean_loss = loss_sum / static_cast<double>(n);
    m.accuracy = static_cast<double>(m.confusion.trace()) / static_cast<double>(n);
    m.per_batch_ms = median(batch_ms);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < c; ++i) {
        const int row = m.confusion.row(i).sum();
        const int col = m.confusion.col(i).sum();
        m.per_class_accuracy.push_back(row > 0 ? static_cast<double>(m.confusion(i, i)) / row
                                               : nan);
        m.per_class_precision.push_back(col > 0 ? static_cast<double>(m.confusion(i, i)) / col
                                                : nan);
    }
    return m;
}

double time_per_batch_ms(const Prepared& prep, const ModelParams& params,
                         const GlareConfig& gcfg, const IndexList& split, int batch_size,
                         int passes) {
    if (split.empty()) throw UsageError("time_per_batch_ms: empty split");
    std::vector<double> batch_ms;
    volatile double sink = 0.0;  // keep the forward passes alive
    const int n = static_cast<int>(split.size());
    for (int pass = 0; pass < passes + 1; ++pass) {
        for (int start = 0; start < n; start += batch_size) {
            const int end = std::min(start + batch_size, n);
            const auto t0 = std::chrono::steady_clock::now();
            for (int b = start; b < end; ++b) {
                const PreparedSample& s =
                    prep.samples[static_cast<std::size_t>(split[static_cast<std::size_t>(b)])];
                sink = glare_forward(s.features, s.plan, params, gcfg)(0);
            }
            const auto t1 = std::chrono::steady_clock::now();
            // First pass is warm-up.
            if (pass > 0) {
                batch_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
            }
        }
    }
    (void)sink;
    return median(batch_ms);
}

// ---------------------------------------------------------------------------
// Ablation harness
// ---------------------------------------------------------------------------

namespace {

struct RunOutcome {
    double accuracy = 0.0;
};

// Executes the tasks on up to `n_workers` threads; each task writes only its
// own slot, so results are deterministic regardless of scheduling.
void run_tasks(const std::vector<std::function<void()>>& tasks, int n_workers) {
    if (tasks.empty()) return;
    n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(tasks.size())));
    if (n_workers == 1) {
        for (const auto& t : tasks) t();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    std::vector<std::exception_ptr> errors(tasks.size());
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                try {
                    tasks[i]();
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 4u));
}

double sample_std(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

// Accuracy on the test split (falling back to val when there is no test
// split), one training run per seed. Also reports per-batch time measured
// sequentially with the first seed's weights.
AblationRow run_setting(const Dataset& dataset, const std::string& name,
                        const GlareConfig& gcfg, const TrainConfig& tcfg,
                        const std::vector<std::uint64_t>& seeds) {
    const IndexList& report_split = dataset.test.empty() ? dataset.val : dataset.test;
    std::vector<double> accs(seeds.size(), 0.0);
    std::vector<TrainResult> results(seeds.size());

    std::vector<std::function<void()>> tasks;
    tasks.reserve(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        tasks.push_back([&, i]() {
            TrainConfig run_cfg = tcfg;
            run_cfg.seed = seeds[i];
            results[i] = train(dataset, gcfg, run_cfg);
        });
    }
    run_tasks(tasks, default_workers());

    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const Prepared prep =
            prepare_dataset(dataset, gcfg, results[i].kmeans_seed,
                            results[i].pca ? &*results[i].pca : nullptr);
        accs[i] = evaluate(prep, results[i].params, gcfg, report_split, tcfg.batch_size).accuracy;
    }

    AblationRow row;
    row.setting = name;
    row.runs = static_cast<int>(seeds.size());
    row.mean_acc = std::accumulate(accs.begin(), accs.end(), 0.0) / accs.size();
    row.std_acc = sample_std(accs, row.mean_acc);
    {
        const Prepared prep =
            prepare_dataset(dataset, gcfg, results[0].kmeans_seed,
                            results[0].pca ? &*results[0].pca : nullptr);
        row.mean_time_ms =
            time_per_batch_ms(prep, results[0].params, gcfg, prep.train, tcfg.batch_size);
        const GraphPlan& plan = prep.samples.front().plan;
        row.messages_per_sample = message_count(plan.fine_edges, gcfg.fine_layers);
        if (gcfg.use_quotient) {
            row.messages_per_sample += message_count(plan.region_edges, gcfg.region_layers);
        }
    }
    return row;
}

void require_seeds(const std::vector<std::uint64_t>& seeds) {
    if (seeds.size() < 3) {
        throw UsageError("ablation: need at least 3 seeds for a meaningful std");
    }
}

}  // namespace

AblationReport ablate_regions(const Dataset& dataset, const std::vector<int>& k_list,
                              const std::vector<std::uint64_t>& seeds, const GlareConfig& gcfg,
                              const TrainConfig& tcfg) {
    require_seeds(seeds);
    std::vector<int> ks = k_list;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

    AblationReport report;
    for (int k : ks) {
        if (k < 2 || k > dataset.n_landmarks) {
            std::cerr << "warning: skipping infeasible region count k=" << k << "\n";
            continue;
        }
        GlareConfig cfg = gcfg;
        cfg.k_regions = k;
        cfg.use_quotient = true;
        report.rows.push_back(run_setting(dataset, "k=" + std::to_string(k), cfg, tcfg, seeds));
    }
    return report;
}

AblationReport ablate_features(const Dataset& dataset, const std::vector<FeatureMode>& modes,
                               const std::vector<std::uint64_t>& seeds, const GlareConfig& gcfg,
                               const TrainConfig& tcfg) {
    require_seeds(seeds);
    AblationReport report;
    for (FeatureMode mode : modes) {
        GlareConfig cfg = gcfg;
        cfg.feature_mode = mode;
        report.rows.push_back(run_setting(dataset, to_string(mode), cfg, tcfg, seeds));
    }
    return report;
}

AblationReport ablate_quotient(const Dataset& dataset, const std::vector<std::uint64_t>& seeds,
                               const GlareConfig& gcfg, const TrainConfig& tcfg) {
    require_seeds(seeds);
    AblationReport report;
    {
        GlareConfig cfg = gcfg;
        cfg.use_quotient = true;
        report.rows.push_back(run_setting(dataset, "quotient", cfg, tcfg, seeds));
    }
    {
        GlareConfig cfg = gcfg;
        cfg.use_quotient = false;
        report.rows.push_back(run_setting(dataset, "no-quotient", cfg, tcfg, seeds));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Paired t-test over per-sample correctness
// ---------------------------------------------------------------------------

namespace {

// Regularized incomplete beta via Lentz's continued fraction.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 200;
    constexpr double kEps = 3e-14;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

PairedTTest paired_ttest(const std::vector<int>& correct_a, const std::vector<int>& correct_b) {
    if (correct_a.size() != correct_b.size() || correct_a.size() < 2) {
        throw DimensionError("paired_ttest: need two equal-length vectors with >= 2 entries");
    }
    const int n = static_cast<int>(correct_a.size());
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += correct_a[static_cast<std::size_t>(i)] -
                                        correct_b[static_cast<std::size_t>(i)];
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = correct_a[static_cast<std::size_t>(i)] -
                         correct_b[static_cast<std::size_t>(i)] - mean;
        var += d * d;
    }
    var /= (n - 1);

    PairedTTest r;
    r.df = n - 1;
    if (var == 0.0) {
        r.t = 0.0;
        r.p_two_sided = mean == 0.0 ? 1.0 : 0.0;
        return r;
    }
    r.t = mean / std::sqrt(var / n);
    const double df = static_cast<double>(r.df);
    r.p_two_sided = incomplete_beta(df / 2.0, 0.5, df / (df + r.t * r.t));
    return r;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

void write_history_jsonl(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write history: " + path);
    for (const EpochStats& row : history) {
        json j;
        j["epoch"] = row.epoch;
        j["train_loss"] = row.train_loss;
        if (std::isnan(row.val_acc)) {
            j["val_acc"] = nullptr;
        } else {
            j["val_acc"] = row.val_acc;
        }
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("failed writing history: " + path);
}

std::string metrics_to_json(const Metrics& m, const std::vector<std::string>& class_names) {
    json j;
    j["accuracy"] = m.accuracy;
    j["mean_loss"] = m.mean_loss;
    j["per_batch_ms"] = m.per_batch_ms;
    j["seed"] = m.seed;
    json per_class = json::array();
    for (std::size_t i = 0; i < class_names.size(); ++i) {
        json row;
        row["class"] = class_names[i];
        row["support"] = m.confusion.row(static_cast<Eigen::Index>(i)).sum();
        if (std::isnan(m.per_class_accuracy[i])) {
            row["accuracy"] = nullptr;
        } else {
            row["accuracy"] = m.per_class_accuracy[i];
        }
        if (std::isnan(m.per_class_precision[i])) {
            row["precision"] = nullptr;
        } else {
            row["precision"] = m.per_class_precision[i];
        }
        per_class.push_back(std::move(row));
    }
    j["per_class"] = std::move(per_class);
    json conf = json::array();
    for (Eigen::Index r = 0; r < m.confusion.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.confusion.cols(); ++c) row.push_back(m.confusion(r, c));
        conf.push_back(std::move(row));
    }
    j["confusion"] = std::move(conf);
    return j.dump();
}

std::string render_metrics_table(const Metrics& m, const std::vector<std::string>& class_names) {
    std::ostringstream os;
    os << std::left << std::setw(14) << "class" << std::right << std::setw(9) << "support"
       << std::setw(14) << "accuracy(%)" << std::setw(14) << "precision(%)" << '\n';
    auto pct = [](double v) {
        std::ostringstream s;
        if (std::isnan(v)) {
            s << "-";
        } else {
            s << std::fixed << std::setprecision(2) << 100.0 * v;
        }
        return s.str();
    };
    for (std::size_t i = 0; i < class_names.size(); ++i) {
        os << std::left << std::setw(14) << class_names[i] << std::right << std::setw(9)
           << m.confusion.row(static_cast<Eigen::Index>(i)).sum() << std::setw(14)
           << pct(m.per_class_accuracy[i]) << std::setw(14) << pct(m.per_class_precision[i])
           << '\n';
    }
    os << '\n'
       << "overall accuracy: " << pct(m.accuracy) << "%   mean loss: " << std::fixed
       << std::setprecision(6) << m.mean_loss << "   per-batch: " << std::setprecision(3)
       << m.per_batch_ms << " ms\n";
    return os.str();
}

void write_confusion_csv(const Metrics& m, const std::vector<std::string>& class_names,
                         const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write confusion csv: " + path);
    out << "true\\pred";
    for (const std::string& name : class_names) out << ',' << name;
    out << '\n';
    for (Eigen::Index r = 0; r < m.confusion.rows(); ++r) {
        out << class_names[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < m.confusion.cols(); ++c) out << ',' << m.confusion(r, c);
        out << '\n';
    }
    if (!out) throw IoError("failed writing confusion csv: " + path);
}

std::string ablation_to_jsonl(const AblationReport& report) {
    std::ostringstream os;
    for (const AblationRow& row : report.rows) {
        json j;
        j["setting"] = row.setting;
        j["mean_acc"] = row.mean_acc;
        j["std_acc"] = row.std_acc;
        j["mean_time_ms"] = row.mean_time_ms;
        j["runs"] = row.runs;
        if (row.messages_per_sample >= 0) j["messages_per_sample"] = row.messages_per_sample;
        os << j.dump() << '\n';
    }
    return os.str();
}

std::string render_ablation_table(const AblationReport& report) {
    std::ostringstream os;
    os << std::left << std::setw(14) << "setting" << std::right << std::setw(14)
       << "accuracy(%)" << std::setw(10) << "std" << std::setw(14) << "time(ms)" << std::setw(12)
       << "messages" << '\n';
    for (const AblationRow& row : report.rows) {
        os << std::left << std::setw(14) << row.setting << std::right << std::setw(14)
           << std::fixed << std::setprecision(2) << 100.0 * row.mean_acc << std::setw(10)
           << std::setprecision(2) << 100.0 * row.std_acc << std::setw(14)
           << std::setprecision(3) << row.mean_time_ms << std::setw(12);
        if (row.messages_per_sample >= 0) {
            os << row.messages_per_sample;
        } else {
            os << "-";
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace glare
