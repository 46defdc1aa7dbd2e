#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "latgeo/activation.hpp"
#include "latgeo/adam.hpp"
#include "latgeo/fdcheck.hpp"
#include "latgeo/mlp.hpp"
#include "latgeo/rng.hpp"

#include <cmath>

using namespace latgeo;

namespace {

// straightforward scalar re-implementation used as an independent oracle
double naive_act(Activation a, double v) {
    switch (a) {
    case Activation::Linear: return v;
    case Activation::Tanh: return std::tanh(v);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-v));
    case Activation::Softplus: return std::log(1.0 + std::exp(v));
    }
    return 0;
}

Vector naive_forward(const Mlp& net, const Vector& z) {
    Vector h = z;
    for (const auto& layer : net.layers()) {
        Vector a(layer.W.rows());
        for (Index i = 0; i < layer.W.rows(); ++i) {
            double s = layer.b[i];
            for (Index j = 0; j < layer.W.cols(); ++j) s += layer.W(i, j) * h[j];
            a[i] = naive_act(layer.act, s);
        }
        if (layer.residual) a += h;
        h = a;
    }
    return h;
}

Mlp identity_mlp(Index n) {
    return Mlp({Layer{Matrix::Identity(n, n), Vector::Zero(n), Activation::Linear, false}});
}

} // namespace

TEST_CASE("activation values and derivatives at the origin") {
    auto tanh0 = activation_eval(Activation::Tanh, 0.0);
    CHECK(tanh0.value == 0.0);
    CHECK(tanh0.d1 == 1.0);
    CHECK(tanh0.d2 == 0.0);

    auto sig0 = activation_eval(Activation::Sigmoid, 0.0);
    CHECK(sig0.value == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sig0.d1 == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sig0.d2 == doctest::Approx(0.0).epsilon(1e-15));

    auto sp0 = activation_eval(Activation::Softplus, 0.0);
    CHECK(sp0.value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(sp0.d1 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sp0.d2 == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("activation derivatives agree with finite differences") {
    Rng rng(11);
    const double h = 1e-6;
    for (auto kind : {Activation::Linear, Activation::Tanh, Activation::Sigmoid,
                      Activation::Softplus}) {
        for (int i = 0; i < 30; ++i) {
            const double v = rng.uniform(-6.0, 6.0);
            auto a = activation_eval(kind, v);
            const double fd1 =
                (activation_eval(kind, v + h).value - activation_eval(kind, v - h).value) /
                (2 * h);
            const double fd2 =
                (activation_eval(kind, v + h).d1 - activation_eval(kind, v - h).d1) / (2 * h);
            CHECK(a.d1 == doctest::Approx(fd1).epsilon(1e-6));
            CHECK(a.d2 == doctest::Approx(fd2).epsilon(1e-6));
        }
    }
}

TEST_CASE("activations stay finite for extreme arguments") {
    for (auto kind : {Activation::Tanh, Activation::Sigmoid, Activation::Softplus}) {
        for (double v : {-1e4, -500.0, 500.0, 1e4}) {
            auto a = activation_eval(kind, v);
            CHECK(std::isfinite(a.value));
            CHECK(std::isfinite(a.d1));
            CHECK(std::isfinite(a.d2));
        }
    }
}

TEST_CASE("piecewise-linear activation names are rejected") {
    CHECK_THROWS_AS(activation_from_name("relu"), std::invalid_argument);
    CHECK_THROWS_AS(activation_from_name("leaky_relu"), std::invalid_argument);
    CHECK_THROWS_AS(activation_from_name("no_such"), std::invalid_argument);
    CHECK(activation_from_name("tanh") == Activation::Tanh);
}

TEST_CASE("mlp_forward identity and sigmoid layers") {
    Mlp id = identity_mlp(2);
    Vector z(2);
    z << 1.0, 2.0;
    CHECK((id.forward(z) - z).norm() == 0.0);

    Mlp sig({Layer{Matrix::Identity(2, 2), Vector::Zero(2), Activation::Sigmoid, false}});
    Vector zero = Vector::Zero(2);
    Vector out = sig.forward(zero);
    CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("mlp_forward matches an independent re-implementation") {
    Rng rng(42);
    Mlp net = Mlp::random({3, 8, 2}, {Activation::Tanh, Activation::Tanh}, rng);
    Vector z(3);
    z << 0.3, -1.2, 0.7;
    Vector ours = net.forward(z);
    Vector naive = naive_forward(net, z);
    CHECK((ours - naive).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mlp_forward rejects dimension mismatch") {
    Mlp id = identity_mlp(2);
    CHECK_THROWS_AS(id.forward(Vector::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(id.jacobian(Vector::Zero(5)), std::invalid_argument);
}

TEST_CASE("jacobian of a linear layer is the weight matrix") {
    Rng rng(7);
    Matrix W = rng.normal_matrix(4, 3);
    Mlp net({Layer{W, Vector::Zero(4), Activation::Linear, false}});
    Matrix J = net.jacobian(rng.normal_vector(3));
    CHECK((J - W).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("jacobian of a sigmoid layer at zero is 0.25 I") {
    Mlp net({Layer{Matrix::Identity(3, 3), Vector::Zero(3), Activation::Sigmoid, false}});
    Matrix J = net.jacobian(Vector::Zero(3));
    CHECK((J - 0.25 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("jacobian agrees with central finite differences") {
    Rng rng(101);
    Mlp net = Mlp::random({2, 10, 7, 4},
                          {Activation::Tanh, Activation::Softplus, Activation::Sigmoid}, rng);
    std::vector<Vector> points;
    for (int i = 0; i < 10; ++i) points.push_back(rng.normal_vector(2));
    const double err = finite_diff_check([&](const Vector& z) { return net.forward(z); },
                                         [&](const Vector& z) { return net.jacobian(z); },
                                         points, 1e-5);
    CHECK(err < 1e-5);
}

TEST_CASE("jacobian of a residual network agrees with finite differences") {
    Rng rng(303);
    Mlp net = Mlp::random({3, 6, 6, 2},
                          {Activation::Tanh, Activation::Tanh, Activation::Softplus}, rng);
    net.layers()[1].residual = true;
    std::vector<Vector> points;
    for (int i = 0; i < 5; ++i) points.push_back(rng.normal_vector(3));
    const double err = finite_diff_check([&](const Vector& z) { return net.forward(z); },
                                         [&](const Vector& z) { return net.jacobian(z); },
                                         points, 1e-5);
    CHECK(err < 1e-5);
}

namespace {

// flattens jacobian_dz into a single vector so the generic checker applies
Vector flat_jacobian(const Mlp& net, const Vector& z) {
    Matrix J = net.jacobian(z);
    return Eigen::Map<Vector>(J.data(), J.size());
}

Matrix flat_jacobian_dz(const Mlp& net, const Vector& z) {
    auto slices = net.jacobian_dz(z);
    const Index m = slices[0].size();
    Matrix out(m, static_cast<Index>(slices.size()));
    for (std::size_t k = 0; k < slices.size(); ++k)
        out.col(static_cast<Index>(k)) =
            Eigen::Map<Vector>(slices[k].data(), slices[k].size());
    return out;
}

} // namespace

TEST_CASE("jacobian_dz of linear and odd-symmetric layers vanishes") {
    Rng rng(5);
    Matrix W = rng.normal_matrix(3, 3);
    Mlp lin({Layer{W, Vector::Zero(3), Activation::Linear, false}});
    for (const Matrix& slice : lin.jacobian_dz(rng.normal_vector(3)))
        CHECK(slice.cwiseAbs().maxCoeff() == 0.0);

    Mlp tanh_net({Layer{Matrix::Identity(2, 2), Vector::Zero(2), Activation::Tanh, false}});
    for (const Matrix& slice : tanh_net.jacobian_dz(Vector::Zero(2)))
        CHECK(slice.cwiseAbs().maxCoeff() == 0.0); // tanh''(0) = 0
}

TEST_CASE("jacobian_dz agrees with finite differences of the jacobian") {
    Rng rng(77);
    Mlp net = Mlp::random({2, 9, 5}, {Activation::Softplus, Activation::Softplus}, rng);
    std::vector<Vector> points;
    for (int i = 0; i < 6; ++i) points.push_back(rng.normal_vector(2));
    const double err =
        finite_diff_check([&](const Vector& z) { return flat_jacobian(net, z); },
                          [&](const Vector& z) { return flat_jacobian_dz(net, z); }, points,
                          1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("jacobian_dz is symmetric in its derivative indices") {
    Rng rng(78);
    Mlp net = Mlp::random({3, 8, 4}, {Activation::Tanh, Activation::Sigmoid}, rng);
    for (int i = 0; i < 5; ++i) {
        Vector z = rng.normal_vector(3);
        auto slices = net.jacobian_dz(z);
        // (i,j,k) = (i,k,j): column j of slice k equals column k of slice j
        for (Index k = 0; k < 3; ++k)
            for (Index j = 0; j < 3; ++j)
                CHECK((slices[static_cast<std::size_t>(k)].col(j) -
                       slices[static_cast<std::size_t>(j)].col(k))
                          .cwiseAbs()
                          .maxCoeff() < 1e-10);
    }
}

TEST_CASE("adam leaves parameters unchanged on zero gradients") {
    Vector p(3);
    p << 1.0, -2.0, 0.5;
    Vector g = Vector::Zero(3);
    Adam opt(AdamConfig{0.1, 0.9, 0.999, 1e-8}, {3});
    const Vector before = p;
    std::vector<ParamBlock> blocks{{p.data(), g.data(), 3}};
    opt.step(blocks);
    CHECK((p - before).cwiseAbs().maxCoeff() == 0.0);
    CHECK(opt.step_count() == 1);
}

TEST_CASE("adam first step moves by about lr") {
    // hand computation: m_hat = g, v_hat = g^2, step = lr * g/(|g|+eps)
    Vector p = Vector::Zero(1);
    Vector g = Vector::Ones(1);
    Adam opt(AdamConfig{0.1, 0.9, 0.999, 1e-8}, {1});
    std::vector<ParamBlock> blocks{{p.data(), g.data(), 1}};
    opt.step(blocks);
    CHECK(std::abs(p[0] + 0.1) < 1e-6);
}

TEST_CASE("adam is deterministic") {
    auto run = [] {
        Rng rng(9);
        Vector p = rng.normal_vector(5);
        Adam opt(AdamConfig{0.05, 0.9, 0.999, 1e-8}, {5});
        for (int i = 0; i < 25; ++i) {
            Vector g = p.array() * 2.0 + 0.3;
            std::vector<ParamBlock> blocks{{p.data(), g.data(), 5}};
            opt.step(blocks);
        }
        return p;
    };
    Vector a = run(), b = run();
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("finite_diff_check accepts a correct gradient and flags a wrong one") {
    auto f = [](const Vector& z) { return (z.array() * z.array()).matrix().eval(); };
    auto grad_ok = [](const Vector& z) { return Matrix((2.0 * z).asDiagonal()); };
    auto grad_bad = [](const Vector& z) { return Matrix((4.0 * z).asDiagonal()); };
    std::vector<Vector> points{Vector::Ones(3), 2.0 * Vector::Ones(3)};
    CHECK(finite_diff_check(f, grad_ok, points, 1e-6) < 1e-9);
    const double bad = finite_diff_check(f, grad_bad, points, 1e-6);
    CHECK(bad == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("rng substreams are independent of consumption order") {
    Rng a(123);
    Rng b(123);
    (void)a.substream("x").normal();
    // consuming from one substream must not shift another
    Rng a_eps = a.substream("eps");
    Rng b_eps = b.substream("eps");
    for (int i = 0; i < 10; ++i) CHECK(a_eps.next_u64() == b_eps.next_u64());
}

TEST_CASE("rng normal draws are reproducible and roughly standard") {
    Rng rng(2024);
    const int n = 20000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        double v = rng.normal();
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(std::abs(var - 1.0) < 0.05);
}
