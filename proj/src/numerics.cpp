#include "glare/numerics.hpp"

#include <cmath>
#include <sstream>

namespace glare {

namespace {

[[noreturn]] void throw_shape(const char* what, Eigen::Index ar, Eigen::Index ac,
                              Eigen::Index br, Eigen::Index bc) {
    std::ostringstream os;
    os << what << ": got " << ar << "x" << ac << " vs " << br << "x" << bc;
    throw DimensionError(os.str());
}

}  // namespace

Mlp2Params Mlp2Params::zeros(Eigen::Index in, Eigen::Index hidden, Eigen::Index out) {
    Mlp2Params p;
    p.w1 = Matrix::Zero(hidden, in);
    p.b1 = Vector::Zero(hidden);
    p.w2 = Matrix::Zero(out, hidden);
    p.b2 = Vector::Zero(out);
    return p;
}

void Mlp2Params::check_consistent() const {
    if (b1.size() != w1.rows() || w2.cols() != w1.rows() || b2.size() != w2.rows()) {
        std::ostringstream os;
        os << "inconsistent mlp shapes: w1 " << w1.rows() << "x" << w1.cols() << ", b1 "
           << b1.size() << ", w2 " << w2.rows() << "x" << w2.cols() << ", b2 " << b2.size();
        throw DimensionError(os.str());
    }
}

Matrix mlp2_forward(const Mlp2Params& p, const Matrix& x, Mlp2Cache* cache) {
    p.check_consistent();
    if (x.cols() != p.in_dim()) {
        throw_shape("mlp2_forward input width mismatch", x.rows(), x.cols(), p.w1.rows(),
                    p.w1.cols());
    }
    Matrix pre = (x * p.w1.transpose()).rowwise() + p.b1.transpose();
    Matrix y = (pre.cwiseMax(0.0) * p.w2.transpose()).rowwise() + p.b2.transpose();
    if (cache != nullptr) {
        cache->input = x;
        cache->pre = std::move(pre);
    }
    return y;
}

Matrix mlp2_backward(const Mlp2Params& p, const Mlp2Cache& cache, const Matrix& d_out,
                     Mlp2Params& grads) {
    if (d_out.rows() != cache.input.rows() || d_out.cols() != p.out_dim()) {
        throw_shape("mlp2_backward upstream shape mismatch", d_out.rows(), d_out.cols(),
                    cache.input.rows(), p.out_dim());
    }
    const Matrix act = cache.pre.cwiseMax(0.0);
    grads.w2.noalias() += d_out.transpose() * act;
    grads.b2 += d_out.colwise().sum().transpose();

    // relu'(0) = 0: strict comparison.
    Matrix d_pre = (d_out * p.w2).array() * (cache.pre.array() > 0.0).cast<double>();
    grads.w1.noalias() += d_pre.transpose() * cache.input;
    grads.b1 += d_pre.colwise().sum().transpose();
    return d_pre * p.w1;
}

CrossEntropyResult softmax_cross_entropy(const Vector& logits, int label) {
    const Eigen::Index n = logits.size();
    if (label < 0 || label >= n) {
        std::ostringstream os;
        os << "label " << label << " out of range [0, " << n << ")";
        throw std::out_of_range(os.str());
    }
    const double mx = logits.maxCoeff();
    Vector shifted = logits.array() - mx;
    Vector ex = shifted.array().exp();
    const double z = ex.sum();
    CrossEntropyResult r;
    r.loss = std::log(z) - shifted(label);
    r.grad = ex / z;
    r.grad(label) -= 1.0;
    return r;
}

void adam_step(AdamState& state, Vector& params, const Vector& grads) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw_shape("adam_step size mismatch", params.size(), 1, grads.size(), 1);
    }
    state.t += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads.cwiseProduct(grads);
    const double mc = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double vc = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    params -= state.lr * ((state.m / mc).array() / ((state.v / vc).array().sqrt() + state.eps))
                             .matrix();
}

double finite_diff_check(const std::function<double(const Vector&)>& loss_fn,
                         const Vector& params, const Vector& analytic_grad, double eps) {
    if (analytic_grad.size() != params.size()) {
        throw_shape("finite_diff_check gradient size mismatch", analytic_grad.size(), 1,
                    params.size(), 1);
    }
    Vector p = params;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double save = p(i);
        p(i) = save + eps;
        const double up = loss_fn(p);
        p(i) = save - eps;
        const double dn = loss_fn(p);
        p(i) = save;
        if (!std::isfinite(up) || !std::isfinite(dn)) {
            throw NumericError("finite_diff_check: loss is not finite");
        }
        const double numeric = (up - dn) / (2.0 * eps);
        const double analytic = analytic_grad(i);
        const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
    return worst;
}

}  // namespace glare
