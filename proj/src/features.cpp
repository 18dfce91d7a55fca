#include "glare/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "glare/rng.hpp"

namespace glare {

using nlohmann::json;

std::string to_string(FeatureMode mode) {
    switch (mode) {
        case FeatureMode::kJoint: return "joint";
        case FeatureMode::kPosition: return "position";
        case FeatureMode::kAppearance: return "appearance";
    }
    return "joint";
}

FeatureMode feature_mode_from_string(const std::string& s) {
    if (s == "joint") return FeatureMode::kJoint;
    if (s == "position") return FeatureMode::kPosition;
    if (s == "appearance") return FeatureMode::kAppearance;
    throw UsageError("unknown feature mode: " + s);
}

Coords normalize_landmarks(const Coords& landmarks) {
    const Eigen::Index n = landmarks.rows();
    if (n < 2) throw DegenerateInputError("normalize_landmarks: need at least 2 landmarks");
    const Eigen::RowVector3d centroid = landmarks.colwise().mean();
    Coords centered = landmarks.rowwise() - centroid;
    const double rms = std::sqrt(centered.squaredNorm() / static_cast<double>(n));
    if (!(rms > 1e-15)) {
        throw DegenerateInputError("normalize_landmarks: all landmarks coincide");
    }
    return centered / rms;
}

PcaModel pca_fit(const Matrix& descriptors, int f) {
    const Eigen::Index m = descriptors.rows();
    const Eigen::Index d = descriptors.cols();
    if (f < 1) throw DimensionError("pca_fit: f must be >= 1");
    if (f > d) {
        std::ostringstream os;
        os << "pca_fit: f=" << f << " exceeds descriptor width " << d;
        throw DimensionError(os.str());
    }
    if (m <= f) {
        std::ostringstream os;
        os << "pca_fit: need more than f=" << f << " samples, got " << m;
        throw DimensionError(os.str());
    }

    PcaModel model;
    model.mean = descriptors.colwise().mean().transpose();
    Matrix centered = descriptors.rowwise() - model.mean.transpose();
    Matrix cov = centered.transpose() * centered / static_cast<double>(m - 1);

    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw NumericError("pca_fit: eigendecomposition failed");
    }
    // Eigen returns ascending eigenvalues; take the top f, descending.
    const Vector& evals = solver.eigenvalues();
    const Matrix& evecs = solver.eigenvectors();
    model.components.resize(f, d);
    const double scale = std::max(1.0, evals(d - 1));
    int deficient = 0;
    for (int j = 0; j < f; ++j) {
        Vector comp = evecs.col(d - 1 - j);
        if (evals(d - 1 - j) < 1e-12 * scale) ++deficient;
        // Sign convention: largest-magnitude coordinate positive.
        Eigen::Index arg = 0;
        comp.cwiseAbs().maxCoeff(&arg);
        if (comp(arg) < 0.0) comp = -comp;
        model.components.row(j) = comp.transpose();
    }
    if (deficient > 0) {
        std::cerr << "warning: pca_fit: data rank below f, " << deficient
                  << " component(s) padded from the orthonormal complement\n";
    }
    return model;
}

Matrix pca_apply(const PcaModel& model, const Matrix& descriptors) {
    if (descriptors.cols() != model.mean.size()) {
        std::ostringstream os;
        os << "pca_apply: descriptor width " << descriptors.cols() << " vs model width "
           << model.mean.size();
        throw DimensionError(os.str());
    }
    return (descriptors.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Matrix joint_features(const Coords& norm_landmarks, const Matrix& appearance,
                      FeatureMode mode) {
    if (appearance.rows() != norm_landmarks.rows()) {
        std::ostringstream os;
        os << "joint_features: " << norm_landmarks.rows() << " landmark rows vs "
           << appearance.rows() << " appearance rows";
        throw DimensionError(os.str());
    }
    const Eigen::Index n = norm_landmarks.rows();
    const Eigen::Index f = appearance.cols();
    Matrix out = Matrix::Zero(n, f + 3);
    if (mode != FeatureMode::kAppearance) out.leftCols(3) = norm_landmarks;
    if (mode != FeatureMode::kPosition) out.rightCols(f) = appearance;
    return out;
}

namespace {

// ---------------------------------------------------------------------------
// Synthetic benchmark generator.
// ---------------------------------------------------------------------------

constexpr int kSynthGroups = 8;
constexpr int kGeoDims = 12;       // distances to nearby template points
constexpr int kClassAppDims = 12;  // class-correlated descriptor block
constexpr double kClassFieldAmp = 0.34;
constexpr double kDistractorGain = 3.0;   // x noise_scale
constexpr double kGeoNoiseGain = 6.0;     // x noise_scale
constexpr double kAppNoiseGain = 4.0;     // x noise_scale
constexpr double kClassAppAmp = 0.45;

const char* const kEmotionNames[kSynthGroups] = {"neutral", "happy",   "sad",   "surprise",
                                                 "fear",    "disgust", "anger", "contempt"};

// Face template: 8 landmark groups on parametric curves, z from a dome.
struct FaceTemplate {
    Coords points;          // N x 3
    IndexList group_of;     // per landmark
    std::vector<IndexList> group_members;
};

double dome_z(double x, double y) { return 0.30 - 0.48 * (x * x + 0.38 * (y + 0.12) * (y + 0.12)); }

FaceTemplate build_face_template(int n) {
    static const double weights[kSynthGroups] = {17, 5, 5, 9, 6, 6, 12, 8};
    int counts[kSynthGroups];
    int assigned = 0;
    for (int g = 0; g < kSynthGroups; ++g) {
        counts[g] = 1;
        ++assigned;
    }
    double frac[kSynthGroups];
    const double wsum = std::accumulate(weights, weights + kSynthGroups, 0.0);
    int remaining = n - assigned;
    int add_total = 0;
    for (int g = 0; g < kSynthGroups; ++g) {
        const double share = remaining * weights[g] / wsum;
        const int add = static_cast<int>(share);
        counts[g] += add;
        add_total += add;
        frac[g] = share - add;
    }
    for (int left = remaining - add_total; left > 0; --left) {
        int best = 0;
        for (int g = 1; g < kSynthGroups; ++g) {
            if (frac[g] > frac[best]) best = g;
        }
        ++counts[best];
        frac[best] = -1.0;
    }

    FaceTemplate tpl;
    tpl.points.resize(n, 3);
    tpl.group_of.resize(static_cast<std::size_t>(n));
    tpl.group_members.resize(kSynthGroups);
    const double pi = 3.141592653589793238462643383279502884;
    int row = 0;
    for (int g = 0; g < kSynthGroups; ++g) {
        const int cnt = counts[g];
        for (int i = 0; i < cnt; ++i) {
            const double t = cnt > 1 ? static_cast<double>(i) / (cnt - 1) : 0.5;
            double x = 0.0;
            double y = 0.0;
            double dz = 0.0;
            switch (g) {
                case 0:  // jaw: ear to ear through the chin
                    x = -0.95 * std::cos(pi * t);
                    y = 0.30 - 1.35 * std::sin(pi * t);
                    dz = -0.10;
                    break;
                case 1:  // right brow
                    x = 0.20 + 0.50 * t;
                    y = 0.50 + 0.12 * std::sin(pi * t);
                    break;
                case 2:  // left brow
                    x = -0.20 - 0.50 * t;
                    y = 0.50 + 0.12 * std::sin(pi * t);
                    break;
                case 3:  // nose: bridge then base
                    if (t < 0.55) {
                        x = 0.02 * std::sin(2.0 * pi * t);
                        y = 0.36 - 1.05 * t;
                        dz = 0.20 * (1.0 - t);
                    } else {
                        x = 0.40 * (t - 0.775) / 0.225;
                        y = -0.24;
                        dz = 0.10;
                    }
                    break;
                case 4:  // right eye
                    x = 0.42 + 0.16 * std::cos(2.0 * pi * t);
                    y = 0.22 + 0.075 * std::sin(2.0 * pi * t);
                    dz = -0.02;
                    break;
                case 5:  // left eye
                    x = -0.42 - 0.16 * std::cos(2.0 * pi * t);
                    y = 0.22 + 0.075 * std::sin(2.0 * pi * t);
                    dz = -0.02;
                    break;
                case 6:  // outer mouth
                    x = 0.36 * std::cos(2.0 * pi * t);
                    y = -0.52 + 0.16 * std::sin(2.0 * pi * t);
                    dz = 0.05;
                    break;
                default:  // inner mouth
                    x = 0.22 * std::cos(2.0 * pi * t);
                    y = -0.52 + 0.07 * std::sin(2.0 * pi * t);
                    dz = 0.04;
                    break;
            }
            tpl.points(row, 0) = x;
            tpl.points(row, 1) = y;
            tpl.points(row, 2) = dome_z(x, y) + dz;
            tpl.group_of[static_cast<std::size_t>(row)] = g;
            tpl.group_members[static_cast<std::size_t>(g)].push_back(row);
            ++row;
        }
    }
    return tpl;
}

struct Bump {
    Eigen::RowVector3d center;
    double inv_two_r2 = 0.0;
    Eigen::RowVector3d displacement;  // direction * amplitude
};

Eigen::RowVector3d eval_field(const std::vector<Bump>& bumps, const Eigen::RowVector3d& p) {
    Eigen::RowVector3d out = Eigen::RowVector3d::Zero();
    for (const Bump& b : bumps) {
        out += b.displacement * std::exp(-(p - b.center).squaredNorm() * b.inv_two_r2);
    }
    return out;
}

Eigen::RowVector3d random_unit(Rng& rng) {
    Eigen::RowVector3d v;
    double norm = 0.0;
    do {
        v << rng.normal(), rng.normal(), rng.normal();
        norm = v.norm();
    } while (norm < 1e-9);
    return v / norm;
}

std::vector<Bump> make_bumps(Rng& rng, const Coords& anchors, const IndexList& anchor_rows,
                             int n_bumps, double r_lo, double r_hi, double amp) {
    std::vector<Bump> bumps(static_cast<std::size_t>(n_bumps));
    for (Bump& b : bumps) {
        const int a = anchor_rows[rng.uniform_index(anchor_rows.size())];
        b.center = anchors.row(a);
        b.center += 0.05 * Eigen::RowVector3d(rng.normal(), rng.normal(), rng.normal());
        const double r = rng.uniform(r_lo, r_hi);
        b.inv_two_r2 = 1.0 / (2.0 * r * r);
        b.displacement = random_unit(rng) * amp * rng.uniform(0.75, 1.25);
    }
    return bumps;
}

}  // namespace

void assign_splits(Dataset& dataset) {
    dataset.train.clear();
    dataset.val.clear();
    dataset.test.clear();
    std::vector<IndexList> by_class(static_cast<std::size_t>(dataset.n_classes));
    for (int i = 0; i < static_cast<int>(dataset.samples.size()); ++i) {
        by_class[static_cast<std::size_t>(dataset.samples[static_cast<std::size_t>(i)].label)]
            .push_back(i);
    }
    for (const IndexList& idx : by_class) {
        const int n = static_cast<int>(idx.size());
        const int n_hold = n >= 3 ? std::max(1, n / 10) : 0;
        const int n_train = n - 2 * n_hold;
        for (int i = 0; i < n; ++i) {
            if (i < n_train) {
                dataset.train.push_back(idx[static_cast<std::size_t>(i)]);
            } else if (i < n_train + n_hold) {
                dataset.val.push_back(idx[static_cast<std::size_t>(i)]);
            } else {
                dataset.test.push_back(idx[static_cast<std::size_t>(i)]);
            }
        }
    }
    std::sort(dataset.train.begin(), dataset.train.end());
    std::sort(dataset.val.begin(), dataset.val.end());
    std::sort(dataset.test.begin(), dataset.test.end());
}

Dataset synth_dataset(int n_classes, int n_per_class, int n_landmarks, double noise_scale,
                      std::uint64_t seed) {
    if (n_classes < 2) throw UsageError("synth_dataset: need at least 2 classes");
    if (n_per_class < 1) throw UsageError("synth_dataset: need at least 1 sample per class");
    if (n_landmarks < 10) throw UsageError("synth_dataset: need at least 10 landmarks");
    if (noise_scale < 0.0) throw UsageError("synth_dataset: noise_scale must be >= 0");

    const FaceTemplate tpl = build_face_template(n_landmarks);
    Rng field_rng = Rng::substream(seed, "fields");
    Rng sample_rng = Rng::substream(seed, "samples");

    // One smooth displacement field per class, anchored on the class's home
    // group so classes deform disjoint parts of the face.
    std::vector<std::vector<Bump>> class_fields;
    class_fields.reserve(static_cast<std::size_t>(n_classes));
    for (int c = 0; c < n_classes; ++c) {
        const IndexList& home = tpl.group_members[static_cast<std::size_t>(c % kSynthGroups)];
        class_fields.push_back(
            make_bumps(field_rng, tpl.points, home, 3, 0.26, 0.46, kClassFieldAmp));
    }

    // Class-correlated appearance block: per-class embedding scaled by a
    // fixed per-landmark profile.
    Matrix class_app(n_classes, kClassAppDims);
    for (int c = 0; c < n_classes; ++c) {
        for (int j = 0; j < kClassAppDims; ++j) {
            class_app(c, j) = kClassAppAmp * field_rng.normal();
        }
    }
    Vector app_profile(n_landmarks);
    for (int i = 0; i < n_landmarks; ++i) app_profile(i) = field_rng.uniform(0.2, 1.0);

    // Fixed template neighborhoods for the geometric descriptor block.
    const int n_geo = std::min(kGeoDims, n_landmarks);
    std::vector<IndexList> geo_nbrs(static_cast<std::size_t>(n_landmarks));
    {
        std::vector<std::pair<double, int>> cand(static_cast<std::size_t>(n_landmarks));
        for (int i = 0; i < n_landmarks; ++i) {
            for (int j = 0; j < n_landmarks; ++j) {
                cand[static_cast<std::size_t>(j)] = {
                    (tpl.points.row(i) - tpl.points.row(j)).squaredNorm(), j};
            }
            std::partial_sort(cand.begin(), cand.begin() + n_geo, cand.end());
            for (int t = 0; t < n_geo; ++t) {
                geo_nbrs[static_cast<std::size_t>(i)].push_back(
                    cand[static_cast<std::size_t>(t)].second);
            }
        }
    }

    Dataset ds;
    ds.n_classes = n_classes;
    ds.n_landmarks = n_landmarks;
    ds.f_raw = kGeoDims + kClassAppDims;
    for (int c = 0; c < n_classes; ++c) {
        ds.class_names.push_back(c < kSynthGroups ? kEmotionNames[c]
                                                  : "class" + std::to_string(c));
    }

    IndexList all_rows(static_cast<std::size_t>(n_landmarks));
    std::iota(all_rows.begin(), all_rows.end(), 0);

    ds.samples.reserve(static_cast<std::size_t>(n_classes) *
                       static_cast<std::size_t>(n_per_class));
    for (int c = 0; c < n_classes; ++c) {
        for (int s = 0; s < n_per_class; ++s) {
            RawSample sample;
            sample.label = c;
            {
                std::ostringstream os;
                os << "c" << c << "-" << s;
                sample.id = os.str();
            }
            const std::vector<Bump> distractor =
                make_bumps(sample_rng, tpl.points, all_rows, 2, 0.30, 0.60,
                           noise_scale * kDistractorGain);

            sample.landmarks.resize(n_landmarks, 3);
            for (int i = 0; i < n_landmarks; ++i) {
                Eigen::RowVector3d p = tpl.points.row(i);
                p += eval_field(class_fields[static_cast<std::size_t>(c)], tpl.points.row(i));
                p += eval_field(distractor, tpl.points.row(i));
                p += noise_scale * Eigen::RowVector3d(sample_rng.normal(), sample_rng.normal(),
                                                      sample_rng.normal());
                sample.landmarks.row(i) = p;
            }

            sample.appearance.resize(n_landmarks, ds.f_raw);
            for (int i = 0; i < n_landmarks; ++i) {
                for (int j = 0; j < kGeoDims; ++j) {
                    const int nbr = geo_nbrs[static_cast<std::size_t>(i)]
                                            [static_cast<std::size_t>(j % n_geo)];
                    const double dist =
                        (sample.landmarks.row(i) - tpl.points.row(nbr)).norm();
                    sample.appearance(i, j) =
                        dist + noise_scale * kGeoNoiseGain * sample_rng.normal();
                }
                for (int j = 0; j < kClassAppDims; ++j) {
                    sample.appearance(i, kGeoDims + j) =
                        app_profile(i) * class_app(c, j) +
                        noise_scale * kAppNoiseGain * sample_rng.normal();
                }
            }
            ds.samples.push_back(std::move(sample));
        }
    }
    assign_splits(ds);
    return ds;
}

// ---------------------------------------------------------------------------
// JSON Lines I/O
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void schema_fail(int line_no, const std::string& msg) {
    std::ostringstream os;
    os << "line " << line_no << ": " << msg;
    throw SchemaError(os.str());
}

void check_keys(const json& obj, std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional, int line_no) {
    for (const char* key : required) {
        if (!obj.contains(key)) schema_fail(line_no, std::string("missing key \"") + key + "\"");
    }
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        const bool known =
            std::any_of(required.begin(), required.end(),
                        [&](const char* k) { return key == k; }) ||
            std::any_of(optional.begin(), optional.end(),
                        [&](const char* k) { return key == k; });
        if (!known) schema_fail(line_no, "unknown key \"" + key + "\"");
    }
}

Matrix parse_float_rows(const json& arr, Eigen::Index expect_cols, const char* what,
                        int line_no) {
    if (!arr.is_array()) schema_fail(line_no, std::string(what) + " must be an array");
    Matrix out(static_cast<Eigen::Index>(arr.size()), expect_cols);
    Eigen::Index r = 0;
    for (const json& row : arr) {
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != expect_cols) {
            schema_fail(line_no, std::string(what) + " rows must have " +
                                     std::to_string(expect_cols) + " entries");
        }
        Eigen::Index c = 0;
        for (const json& v : row) {
            if (!v.is_number()) schema_fail(line_no, std::string(what) + " entries must be numbers");
            const double x = v.get<double>();
            if (!std::isfinite(x)) schema_fail(line_no, std::string(what) + " entry is not finite");
            out(r, c++) = x;
        }
        ++r;
    }
    return out;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);

    std::string line;
    int line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty()) return true;
        }
        return false;
    };
    auto parse_line = [&]() -> json {
        try {
            return json::parse(line);
        } catch (const json::parse_error& e) {
            std::ostringstream os;
            os << "line " << line_no << ": " << e.what();
            throw IoError(os.str());
        }
    };

    if (!next_line()) throw SchemaError("empty dataset file: " + path);
    const json header = parse_line();
    if (!header.is_object()) schema_fail(line_no, "header must be an object");
    check_keys(header, {"class_names", "f_raw", "n_classes", "n_landmarks"}, {}, line_no);

    Dataset ds;
    ds.n_classes = header.at("n_classes").get<int>();
    ds.n_landmarks = header.at("n_landmarks").get<int>();
    ds.f_raw = header.at("f_raw").get<int>();
    ds.class_names = header.at("class_names").get<std::vector<std::string>>();
    if (ds.n_classes < 1 || static_cast<int>(ds.class_names.size()) != ds.n_classes) {
        schema_fail(line_no, "class_names length must equal n_classes");
    }
    if (ds.n_landmarks < 1) schema_fail(line_no, "n_landmarks must be >= 1");
    if (ds.f_raw < 0) schema_fail(line_no, "f_raw must be >= 0");

    while (next_line()) {
        const json obj = parse_line();
        if (!obj.is_object()) schema_fail(line_no, "sample must be an object");
        check_keys(obj, {"id", "label", "landmarks"}, {"appearance"}, line_no);

        RawSample sample;
        sample.id = obj.at("id").get<std::string>();
        if (!obj.at("label").is_number_integer()) schema_fail(line_no, "label must be an integer");
        sample.label = obj.at("label").get<int>();
        if (sample.label < 0 || sample.label >= ds.n_classes) {
            schema_fail(line_no, "label " + std::to_string(sample.label) + " out of range [0, " +
                                     std::to_string(ds.n_classes) + ")");
        }
        const Matrix lm = parse_float_rows(obj.at("landmarks"), 3, "landmarks", line_no);
        if (lm.rows() != ds.n_landmarks) {
            schema_fail(line_no, "expected " + std::to_string(ds.n_landmarks) +
                                     " landmarks, got " + std::to_string(lm.rows()));
        }
        sample.landmarks = lm;

        if (ds.f_raw > 0) {
            if (!obj.contains("appearance")) {
                schema_fail(line_no, "appearance required when f_raw > 0");
            }
            sample.appearance = parse_float_rows(obj.at("appearance"), ds.f_raw, "appearance",
                                                 line_no);
            if (sample.appearance.rows() != ds.n_landmarks) {
                schema_fail(line_no, "appearance row count must equal n_landmarks");
            }
        } else {
            if (obj.contains("appearance") && !obj.at("appearance").empty()) {
                schema_fail(line_no, "appearance present but header f_raw is 0");
            }
            sample.appearance.resize(ds.n_landmarks, 0);
        }
        ds.samples.push_back(std::move(sample));
    }
    if (ds.samples.empty()) throw SchemaError("dataset has no samples: " + path);
    assign_splits(ds);
    return ds;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write dataset file: " + path);

    json header;
    header["n_landmarks"] = dataset.n_landmarks;
    header["n_classes"] = dataset.n_classes;
    header["class_names"] = dataset.class_names;
    header["f_raw"] = dataset.f_raw;
    out << header.dump() << '\n';

    for (const RawSample& s : dataset.samples) {
        json obj;
        obj["id"] = s.id;
        obj["label"] = s.label;
        json lm = json::array();
        for (Eigen::Index i = 0; i < s.landmarks.rows(); ++i) {
            lm.push_back({s.landmarks(i, 0), s.landmarks(i, 1), s.landmarks(i, 2)});
        }
        obj["landmarks"] = std::move(lm);
        if (dataset.f_raw > 0) {
            json app = json::array();
            for (Eigen::Index i = 0; i < s.appearance.rows(); ++i) {
                json row = json::array();
                for (Eigen::Index j = 0; j < s.appearance.cols(); ++j) {
                    row.push_back(s.appearance(i, j));
                }
                app.push_back(std::move(row));
            }
            obj["appearance"] = std::move(app);
        }
        out << obj.dump() << '\n';
    }
    if (!out) throw IoError("failed writing dataset file: " + path);
}

}  // namespace glare
