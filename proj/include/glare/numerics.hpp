#pragma once

#include <functional>

#include "glare/types.hpp"

namespace glare {

/// Two-layer perceptron y = W2 * relu(W1 * x + b1) + b2, applied row-wise.
struct Mlp2Params {
    Matrix w1;  // hidden x in
    Vector b1;  // hidden
    Matrix w2;  // out x hidden
    Vector b2;  // out

    Eigen::Index in_dim() const { return w1.cols(); }
    Eigen::Index hidden_dim() const { return w1.rows(); }
    Eigen::Index out_dim() const { return w2.rows(); }

    long param_count() const {
        return static_cast<long>(w1.size() + b1.size() + w2.size() + b2.size());
    }

    static Mlp2Params zeros(Eigen::Index in, Eigen::Index hidden, Eigen::Index out);

    void check_consistent() const;
};

/// Forward intermediates needed for the exact backward pass.
struct Mlp2Cache {
    Matrix input;  // rows x in
    Matrix pre;    // rows x hidden, pre-activation
};

/// Row-wise forward pass; `cache` is filled when non-null.
Matrix mlp2_forward(const Mlp2Params& p, const Matrix& x, Mlp2Cache* cache = nullptr);

/// Reverse-mode rule for mlp2_forward. Accumulates parameter gradients into
/// `grads` (caller zero-initializes) and returns d(loss)/d(input).
/// ReLU subgradient at 0 is 0.
Matrix mlp2_backward(const Mlp2Params& p, const Mlp2Cache& cache, const Matrix& d_out,
                     Mlp2Params& grads);

struct CrossEntropyResult {
    double loss = 0.0;
    Vector grad;  // softmax(logits) - onehot(label)
};

/// Numerically stable -log softmax(logits)[label] with gradient.
CrossEntropyResult softmax_cross_entropy(const Vector& logits, int label);

struct AdamState {
    Vector m;
    Vector v;
    long t = 0;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(Eigen::Index n, double lr_ = 1e-4, double beta1_ = 0.9,
                       double beta2_ = 0.999, double eps_ = 1e-8)
        : m(Vector::Zero(n)), v(Vector::Zero(n)), lr(lr_), beta1(beta1_), beta2(beta2_),
          eps(eps_) {}
};

/// One bias-corrected Adam update, in place.
void adam_step(AdamState& state, Vector& params, const Vector& grads);

/// Max over coordinates of |analytic - numeric| / max(1, |analytic|, |numeric|)
/// where numeric is a central difference of `loss_fn` at `params`.
double finite_diff_check(const std::function<double(const Vector&)>& loss_fn,
                         const Vector& params, const Vector& analytic_grad,
                         double eps = 1e-5);

}  // namespace glare
