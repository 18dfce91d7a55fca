#pragma once

#include <cstdint>
#include <string>

#include "glare/types.hpp"

namespace glare {

enum class FeatureMode { kJoint, kPosition, kAppearance };

std::string to_string(FeatureMode mode);
FeatureMode feature_mode_from_string(const std::string& s);

struct RawSample {
    std::string id;
    int label = 0;
    Coords landmarks;   // N x 3, raw positions
    Matrix appearance;  // N x f_raw, pre-PCA descriptors (0 cols when absent)

    friend bool operator==(const RawSample& a, const RawSample& b) {
        return a.id == b.id && a.label == b.label && a.landmarks == b.landmarks &&
               a.appearance == b.appearance;
    }
};

struct PcaModel {
    Vector mean;        // f_raw
    Matrix components;  // f x f_raw, rows orthonormal
    int out_dim() const { return static_cast<int>(components.rows()); }
};

struct Dataset {
    std::vector<RawSample> samples;
    IndexList train;
    IndexList val;
    IndexList test;
    int n_classes = 0;
    std::vector<std::string> class_names;
    int n_landmarks = 0;
    int f_raw = 0;

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.samples == b.samples && a.train == b.train && a.val == b.val &&
               a.test == b.test && a.n_classes == b.n_classes &&
               a.class_names == b.class_names && a.n_landmarks == b.n_landmarks &&
               a.f_raw == b.f_raw;
    }
};

/// Center on the landmark centroid and scale to unit root-mean-square radius.
/// The output is invariant to translation and uniform positive scaling of the
/// input.
Coords normalize_landmarks(const Coords& landmarks);

/// Principal directions of the descriptor rows: column means plus the top-f
/// eigenvectors of the sample covariance in descending eigenvalue order.
/// Each component's largest-magnitude coordinate is made positive. When the
/// data span has rank below f a warning is printed and the remaining
/// components come from the orthonormal complement.
PcaModel pca_fit(const Matrix& descriptors, int f);

/// (descriptors - mean) * components^T.
Matrix pca_apply(const PcaModel& model, const Matrix& descriptors);

/// Row-wise concatenation [coords || appearance], always f+3 wide. Position
/// and appearance modes zero out the other block (for ablations).
Matrix joint_features(const Coords& norm_landmarks, const Matrix& appearance,
                      FeatureMode mode = FeatureMode::kJoint);

/// Deterministic synthetic landmark benchmark. A fixed template face is
/// deformed by one smooth displacement field per class (anchored on a class-
/// specific facial region), plus a per-sample random smooth distractor field
/// and i.i.d. jitter, both scaled by noise_scale. Appearance descriptors are
/// distances to nearby template points plus a class-correlated component,
/// with their own noise. Splits are stratified 80/10/10.
Dataset synth_dataset(int n_classes, int n_per_class, int n_landmarks, double noise_scale,
                      std::uint64_t seed);

/// JSON Lines: one header line, then one sample per line.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& dataset, const std::string& path);

/// Per-class contiguous 80/10/10 split of the sample order. Used by both the
/// generator and the loader so a round trip reproduces the same splits.
void assign_splits(Dataset& dataset);

}  // namespace glare
