#include <doctest.h>

#include <cmath>

#include "glare/numerics.hpp"
#include "glare/rng.hpp"

using namespace glare;

namespace {

Mlp2Params random_mlp(Eigen::Index in, Eigen::Index hidden, Eigen::Index out, Rng& rng) {
    Mlp2Params p = Mlp2Params::zeros(in, hidden, out);
    for (Eigen::Index i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = rng.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < p.b1.size(); ++i) p.b1(i) = rng.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < p.w2.size(); ++i) p.w2.data()[i] = rng.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < p.b2.size(); ++i) p.b2(i) = rng.uniform(-1.0, 1.0);
    return p;
}

// Scalar-loop evaluation of w2 * relu(w1 x + b1) + b2, independent of the
// Eigen-based implementation path.
Vector mlp_oracle(const Mlp2Params& p, const Vector& x) {
    Vector hidden(p.hidden_dim());
    for (Eigen::Index h = 0; h < p.hidden_dim(); ++h) {
        double acc = p.b1(h);
        for (Eigen::Index i = 0; i < p.in_dim(); ++i) acc += p.w1(h, i) * x(i);
        hidden(h) = acc > 0.0 ? acc : 0.0;
    }
    Vector out(p.out_dim());
    for (Eigen::Index o = 0; o < p.out_dim(); ++o) {
        double acc = p.b2(o);
        for (Eigen::Index h = 0; h < p.hidden_dim(); ++h) acc += p.w2(o, h) * hidden(h);
        out(o) = acc;
    }
    return out;
}

Vector pack(const Mlp2Params& p) {
    Vector flat(p.param_count());
    Eigen::Index at = 0;
    auto put = [&](const double* d, Eigen::Index n) {
        flat.segment(at, n) = Eigen::Map<const Vector>(d, n);
        at += n;
    };
    put(p.w1.data(), p.w1.size());
    put(p.b1.data(), p.b1.size());
    put(p.w2.data(), p.w2.size());
    put(p.b2.data(), p.b2.size());
    return flat;
}

Mlp2Params unpack(const Vector& flat, Eigen::Index in, Eigen::Index hidden, Eigen::Index out) {
    Mlp2Params p = Mlp2Params::zeros(in, hidden, out);
    Eigen::Index at = 0;
    auto take = [&](double* d, Eigen::Index n) {
        Eigen::Map<Vector>(d, n) = flat.segment(at, n);
        at += n;
    };
    take(p.w1.data(), p.w1.size());
    take(p.b1.data(), p.b1.size());
    take(p.w2.data(), p.w2.size());
    take(p.b2.data(), p.b2.size());
    return p;
}

}  // namespace

TEST_CASE("mlp2_forward zero parameters give zero outputs") {
    Mlp2Params p = Mlp2Params::zeros(3, 4, 2);
    Matrix x(5, 3);
    Rng rng(7);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-2.0, 2.0);
    CHECK(mlp2_forward(p, x).isZero(0.0));
}

TEST_CASE("mlp2_forward relu clips the negative branch") {
    Mlp2Params p = Mlp2Params::zeros(1, 1, 1);
    p.w1(0, 0) = 1.0;
    p.w2(0, 0) = 1.0;
    Matrix x(1, 1);
    x(0, 0) = -2.0;
    CHECK(mlp2_forward(p, x)(0, 0) == 0.0);
}

TEST_CASE("mlp2_forward matches a scalar-loop oracle") {
    Rng rng(42);
    Mlp2Params p = random_mlp(2, 2, 1, rng);
    Matrix x(1, 2);
    x << 0.3, -0.7;
    const Matrix y = mlp2_forward(p, x);
    const Vector expect = mlp_oracle(p, x.row(0).transpose());
    CHECK(y(0, 0) == doctest::Approx(expect(0)).epsilon(1e-12));

    for (int trial = 0; trial < 20; ++trial) {
        Mlp2Params q = random_mlp(5, 7, 4, rng);
        Matrix xs(3, 5);
        for (Eigen::Index i = 0; i < xs.size(); ++i) xs.data()[i] = rng.uniform(-1.5, 1.5);
        const Matrix ys = mlp2_forward(q, xs);
        for (int r = 0; r < 3; ++r) {
            const Vector want = mlp_oracle(q, xs.row(r).transpose());
            for (int c = 0; c < 4; ++c) {
                CHECK(ys(r, c) == doctest::Approx(want(c)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("mlp2_forward rejects width mismatch with both shapes in the message") {
    Mlp2Params p = Mlp2Params::zeros(3, 4, 2);
    Matrix x(2, 5);
    x.setZero();
    try {
        mlp2_forward(p, x);
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2x5") != std::string::npos);
        CHECK(msg.find("4x3") != std::string::npos);
    }
}

TEST_CASE("mlp2_forward is positively homogeneous in w2 when b2 = 0") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        Mlp2Params p = random_mlp(4, 6, 3, rng);
        p.b2.setZero();
        Matrix x(4, 4);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
        const double c = rng.uniform(0.1, 3.0);
        const Matrix base = mlp2_forward(p, x);
        Mlp2Params scaled = p;
        scaled.w2 *= c;
        const Matrix y = mlp2_forward(scaled, x);
        CHECK((y - c * base).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("mlp2_backward agrees with central finite differences") {
    Rng rng(11);
    const Eigen::Index in = 4, hidden = 5, out = 3, rows = 6;
    Mlp2Params p = random_mlp(in, hidden, out, rng);
    Matrix x(rows, in);
    Matrix weight(rows, out);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < weight.size(); ++i) weight.data()[i] = rng.uniform(-1.0, 1.0);

    auto loss_fn = [&](const Vector& flat) {
        const Mlp2Params q = unpack(flat, in, hidden, out);
        return (mlp2_forward(q, x).array() * weight.array()).sum();
    };

    Mlp2Cache cache;
    mlp2_forward(p, x, &cache);
    Mlp2Params grads = Mlp2Params::zeros(in, hidden, out);
    mlp2_backward(p, cache, weight, grads);

    CHECK(finite_diff_check(loss_fn, pack(p), pack(grads)) < 1e-7);
}

TEST_CASE("mlp2_backward also differentiates the input") {
    Rng rng(13);
    const Eigen::Index in = 3, hidden = 4, out = 2;
    Mlp2Params p = random_mlp(in, hidden, out, rng);
    Matrix x(2, in);
    Matrix weight(2, out);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < weight.size(); ++i) weight.data()[i] = rng.uniform(-1.0, 1.0);

    auto loss_fn = [&](const Vector& flat) {
        Matrix xs = x;
        Eigen::Map<Vector>(xs.data(), xs.size()) = flat;
        return (mlp2_forward(p, xs).array() * weight.array()).sum();
    };

    Mlp2Cache cache;
    mlp2_forward(p, x, &cache);
    Mlp2Params grads = Mlp2Params::zeros(in, hidden, out);
    const Matrix d_x = mlp2_backward(p, cache, weight, grads);
    CHECK(finite_diff_check(loss_fn, Eigen::Map<const Vector>(x.data(), x.size()),
                            Eigen::Map<const Vector>(d_x.data(), d_x.size())) < 1e-7);
}

TEST_CASE("softmax_cross_entropy uniform logits give ln C") {
    Vector logits = Vector::Constant(7, 0.4);
    const auto r = softmax_cross_entropy(logits, 3);
    CHECK(r.loss == doctest::Approx(std::log(7.0)).epsilon(1e-9));
    CHECK(r.loss == doctest::Approx(1.945910).epsilon(1e-6));
}

TEST_CASE("softmax_cross_entropy saturated correct class has near-zero loss") {
    Vector logits = Vector::Zero(5);
    logits(2) = 50.0;
    CHECK(softmax_cross_entropy(logits, 2).loss < 1e-9);
}

TEST_CASE("softmax_cross_entropy matches a long-double log-sum-exp oracle") {
    Vector logits(3);
    logits << 1.0, 2.0, 3.0;
    const auto r = softmax_cross_entropy(logits, 0);

    long double z = 0.0L;
    for (int i = 0; i < 3; ++i) z += std::exp(static_cast<long double>(logits(i)));
    const long double lse = std::log(z);
    CHECK(r.loss == doctest::Approx(static_cast<double>(lse - 1.0L)).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) {
        const long double soft = std::exp(static_cast<long double>(logits(i))) / z;
        const double want = static_cast<double>(soft) - (i == 0 ? 1.0 : 0.0);
        CHECK(r.grad(i) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("softmax_cross_entropy gradient sums to zero") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int c = 2 + static_cast<int>(rng.uniform_index(9));
        Vector logits(c);
        for (int i = 0; i < c; ++i) logits(i) = rng.uniform(-30.0, 30.0);
        const auto r = softmax_cross_entropy(logits, static_cast<int>(rng.uniform_index(c)));
        CHECK(std::abs(r.grad.sum()) < 1e-12);
    }
}

TEST_CASE("softmax_cross_entropy rejects out-of-range labels") {
    Vector logits = Vector::Zero(4);
    CHECK_THROWS_AS(softmax_cross_entropy(logits, 4), std::out_of_range);
    CHECK_THROWS_AS(softmax_cross_entropy(logits, -1), std::out_of_range);
}

TEST_CASE("adam_step with zero gradients is a parameter no-op") {
    // Holds for any state whose first moment is zero (the invariant state
    // zero gradients produce); a nonzero momentum buffer would keep decaying
    // under standard Adam.
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform_index(20));
        AdamState state(n, rng.uniform(1e-5, 1e-1));
        for (Eigen::Index i = 0; i < n; ++i) state.v(i) = rng.uniform(0.0, 1.0);
        state.t = static_cast<long>(rng.uniform_index(100));
        Vector params(n);
        for (Eigen::Index i = 0; i < n; ++i) params(i) = rng.uniform(-2.0, 2.0);
        const Vector before = params;
        const long t_before = state.t;
        adam_step(state, params, Vector::Zero(n));
        CHECK(params == before);
        CHECK(state.t == t_before + 1);
    }
}

TEST_CASE("adam_step first update is -lr * g / (|g| + eps), about -lr * sign(g)") {
    for (double g : {0.3, -2.0, 1e-3}) {
        AdamState state(1);
        Vector params = Vector::Zero(1);
        Vector grads = Vector::Constant(1, g);
        adam_step(state, params, grads);
        const double exact = -state.lr * g / (std::abs(g) + state.eps);
        CHECK(params(0) == doctest::Approx(exact).epsilon(1e-12));
        if (std::abs(g) >= 0.1) {
            const double want = -state.lr * (g > 0 ? 1.0 : -1.0);
            CHECK(std::abs(params(0) - want) <= 1e-6 * state.lr);
        }
    }
}

TEST_CASE("adam_step trajectory matches an independent scalar recurrence") {
    AdamState state(1, 1e-4, 0.9, 0.999, 1e-8);
    Vector params = Vector::Zero(1);
    const Vector grads = Vector::Constant(1, 1.0);

    long double m = 0.0L, v = 0.0L, p = 0.0L;
    for (int t = 1; t <= 3; ++t) {
        adam_step(state, params, grads);

        m = 0.9L * m + 0.1L * 1.0L;
        v = 0.999L * v + 0.001L * 1.0L;
        const long double mc = m / (1.0L - std::pow(0.9L, t));
        const long double vc = v / (1.0L - std::pow(0.999L, t));
        p -= 1e-4L * mc / (std::sqrt(vc) + 1e-8L);
        CHECK(params(0) == doctest::Approx(static_cast<double>(p)).epsilon(1e-12));
    }
    CHECK(state.t == 3);
}

TEST_CASE("adam_step rejects shape mismatch") {
    AdamState state(3);
    Vector params = Vector::Zero(2);
    CHECK_THROWS_AS(adam_step(state, params, Vector::Zero(2)), DimensionError);
}

TEST_CASE("finite_diff_check on a quadratic") {
    Vector p(2);
    p << 1.0, 2.0;
    auto loss = [](const Vector& v) { return 0.5 * v.squaredNorm(); };
    CHECK(finite_diff_check(loss, p, p) < 1e-8);
}

TEST_CASE("finite_diff_check flags a dead parameter consistently") {
    Vector p(2);
    p << 0.7, -1.2;
    auto loss = [](const Vector& v) { return v(0) * v(0); };
    Vector analytic(2);
    analytic << 2.0 * p(0), 0.0;  // coordinate 1 is dead: gradient exactly 0
    CHECK(finite_diff_check(loss, p, analytic) < 1e-8);
}

TEST_CASE("finite_diff_check rejects non-finite losses") {
    Vector p = Vector::Ones(1);
    auto loss = [](const Vector& v) { return std::log(-v(0)); };
    CHECK_THROWS_AS(finite_diff_check(loss, p, p), NumericError);
}
