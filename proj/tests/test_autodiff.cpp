#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "tpg/autodiff.hpp"
#include "tpg/finite_diff.hpp"
#include "tpg/mlp.hpp"
#include "tpg/losses.hpp"
#include "tpg/rng.hpp"
#include "support/random_graphs.hpp"

using namespace tpg;

namespace {

bool grad_close(double bp, double fd, double rel = 1e-4, double abs_floor = 1e-7) {
    const double tol = std::max(abs_floor, rel * std::max(std::abs(bp), std::abs(fd)));
    return std::abs(bp - fd) <= tol;
}

void check_store_close(const ParameterStore& bp, const ParameterStore& fd) {
    REQUIRE(bp.same_layout(fd));
    for (std::size_t e = 0; e < bp.entries().size(); ++e) {
        const DenseArray& a = bp.entries()[e].second;
        const DenseArray& b = fd.entries()[e].second;
        for (std::size_t i = 0; i < a.size(); ++i) {
            INFO(bp.entries()[e].first, "[", i, "] bp=", a[i], " fd=", b[i]);
            CHECK(grad_close(a[i], b[i]));
        }
    }
}

DenseArray vec(std::vector<double> v) {
    const std::size_t n = v.size();
    return DenseArray({n}, std::move(v));
}

}  // namespace

TEST_CASE("elementwise forward values") {
    CHECK(add(Var::leaf(vec({1, 2})), Var::leaf(vec({3, 4}))).value()[0] == 4.0);
    CHECK(add(Var::leaf(vec({1, 2})), Var::leaf(vec({3, 4}))).value()[1] == 6.0);

    const Var id = Var::leaf(DenseArray({2, 2}, {1, 0, 0, 1}));
    const Var m = Var::leaf(DenseArray({2, 2}, {5, 6, 7, 8}));
    const DenseArray prod = matmul(id, m).value();
    CHECK(prod.bit_identical(m.value()));

    const DenseArray r = relu(Var::leaf(vec({-1, 0, 2.5}))).value();
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 0.0);
    CHECK(r[2] == 2.5);
}

TEST_CASE("shape errors name the offending shapes") {
    const Var a = Var::leaf(DenseArray({2, 3}));
    const Var b = Var::leaf(DenseArray({3, 3}));
    CHECK_THROWS_WITH_AS(add(a, b), doctest::Contains("[2,3]"), std::invalid_argument);
    CHECK_THROWS_AS(matmul(Var::leaf(DenseArray({2, 3})), Var::leaf(DenseArray({2, 3}))),
                    std::invalid_argument);
    CHECK_THROWS_AS(log(Var::leaf(vec({1.0, -0.5}))), std::invalid_argument);
    CHECK_THROWS_AS(log(Var::leaf(vec({0.0}))), std::invalid_argument);
}

TEST_CASE("backward basics") {
    SUBCASE("d mean(w*w) / dw = 2w") {
        const Var w = Var::leaf(vec({3.0}));
        backward(mean(mul(w, w)));
        CHECK(w.grad()[0] == doctest::Approx(6.0).epsilon(1e-12));
    }
    SUBCASE("sigmoid'(0) = 0.25") {
        const Var x = Var::leaf(vec({0.0}));
        backward(sigmoid(x));
        CHECK(x.grad()[0] == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("non-scalar root rejected") {
        const Var x = Var::leaf(vec({1.0, 2.0}));
        CHECK_THROWS_AS(backward(relu(x)), std::invalid_argument);
    }
    SUBCASE("unreachable leaves keep zero grad") {
        const Var used = Var::leaf(vec({2.0}));
        const Var unused = Var::leaf(vec({5.0}));
        backward(mean(mul(used, used)));
        CHECK(unused.grad()[0] == 0.0);
    }
    SUBCASE("repeated backward resets, not doubles") {
        const Var w = Var::leaf(vec({3.0}));
        const Var root = mean(mul(w, w));
        backward(root);
        const double first = w.grad()[0];
        backward(root);
        CHECK(w.grad()[0] == first);
    }
    SUBCASE("fan-out accumulates") {
        const Var x = Var::leaf(vec({1.5}));
        backward(mean(add(mul(x, x), x)));  // d/dx (x^2 + x) = 2x + 1
        CHECK(x.grad()[0] == doctest::Approx(4.0).epsilon(1e-12));
    }
}

TEST_CASE("broadcast over the leading batch axis") {
    const Var m = Var::leaf(DenseArray({2, 3}, {1, 2, 3, 4, 5, 6}));
    const Var bias = Var::leaf(vec({10, 20, 30}));
    const DenseArray out = add(m, bias).value();
    CHECK(out.at(0, 0) == 11.0);
    CHECK(out.at(1, 2) == 36.0);

    backward(sum(add(m, bias)));
    for (std::size_t i = 0; i < 3; ++i) CHECK(bias.grad()[i] == 2.0);  // two rows each

    // no other broadcast
    CHECK_THROWS_AS(add(bias, m), std::invalid_argument);
}

TEST_CASE("gradient reversal gate") {
    const DenseArray input = vec({1.5, -2.0});
    SUBCASE("forward is bit-exact identity") {
        const Var x = Var::leaf(input);
        CHECK(gradient_reversal(x, 0.1).value().bit_identical(input));
    }
    SUBCASE("backward injects -lambda * upstream exactly") {
        const Var x = Var::leaf(vec({0.7, 0.9}));
        const Var up = Var::leaf(vec({1.0, 2.0}));
        backward(sum(mul(gradient_reversal(x, 0.1), up)));  // upstream grad = up values
        CHECK(x.grad()[0] == -0.1 * 1.0);
        CHECK(x.grad()[1] == -0.1 * 2.0);
    }
    SUBCASE("lambda = 0 injects exact zeros") {
        const Var x = Var::leaf(vec({0.7, 0.9}));
        const Var up = Var::leaf(vec({3.0, -4.0}));
        backward(sum(mul(gradient_reversal(x, 0.0), up)));
        CHECK(x.grad()[0] == 0.0);
        CHECK(x.grad()[1] == 0.0);
    }
    SUBCASE("negative lambda rejected") {
        CHECK_THROWS_AS(gradient_reversal(Var::leaf(input), -0.1), std::invalid_argument);
    }
}

TEST_CASE("finite differences: quadratic and smooth composite") {
    SUBCASE("f = theta^2 at 3 gives 6 to 1e-6") {
        ParameterStore theta;
        theta.add("t", vec({3.0}));
        const auto g = finite_difference_gradient(
            [](const ParameterStore& p) { return p.at("t")[0] * p.at("t")[0]; }, theta, 1e-3);
        CHECK(g.at("t")[0] == doctest::Approx(6.0).epsilon(1e-6));
    }
    SUBCASE("sine Taylor composite has slope 1 at 0") {
        // t - t^3/6 + t^5/120 composed from primitives; analytic derivative
        // at 0 is exactly 1
        ParameterStore theta;
        theta.add("t", vec({0.0}));
        auto f = [](const ParameterStore& p) {
            const Var t = Var::leaf(p.at("t"));
            const Var t2 = mul(t, t);
            const Var t3 = mul(t2, t);
            const Var t5 = mul(t3, t2);
            return sum(add(sub(t, scale(t3, 1.0 / 6.0)), scale(t5, 1.0 / 120.0))).scalar();
        };
        const auto g = finite_difference_gradient(f, theta, 1e-3);
        CHECK(g.at("t")[0] == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("eps and finiteness contracts") {
        ParameterStore theta;
        theta.add("t", vec({0.5}));
        CHECK_THROWS_AS(finite_difference_gradient(
                            [](const ParameterStore& p) { return p.at("t")[0]; }, theta, 0.0),
                        std::invalid_argument);
        CHECK_THROWS_WITH_AS(
            finite_difference_gradient(
                [](const ParameterStore&) { return std::numeric_limits<double>::quiet_NaN(); },
                theta, 1e-3),
            doctest::Contains("t[0]"), std::runtime_error);
    }
}

TEST_CASE("two-layer MLP hinge loss gradients match finite differences") {
    MlpSpec spec;
    spec.layer_sizes = {3, 5, 1};
    spec.hidden = Nonlinearity::kTanh;
    const ParameterStore theta = init_xavier_sqrt2(spec, 99);

    Rng rng(7);
    DenseArray X({4, 3});
    for (std::size_t i = 0; i < X.size(); ++i) X[i] = rng.normal();
    const std::vector<int> labels = {1, -1, 1, -1};

    auto loss_of = [&](const ParameterStore& p) {
        GraphNet net = materialize(spec, p);
        return hinge_loss(net(Var::leaf(X)), labels).scalar();
    };

    GraphNet net = materialize(spec, theta);
    backward(hinge_loss(net(Var::leaf(X)), labels));
    check_store_close(net.gradients(theta), finite_difference_gradient(loss_of, theta, 1e-3));
}

TEST_CASE("backward is linear in the root") {
    const DenseArray xv = vec({0.4, -0.7, 1.2});
    auto grad_of = [&](double a, double b) {
        const Var x = Var::leaf(xv);
        const Var f = mean(mul(x, x));
        const Var g = mean(tanh(x));
        backward(add(scale(f, a), scale(g, b)));
        return std::vector<double>{x.grad()[0], x.grad()[1], x.grad()[2]};
    };
    const auto gf = grad_of(1.0, 0.0);
    const auto gg = grad_of(0.0, 1.0);
    const auto gmix = grad_of(2.5, -1.5);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(std::abs(gmix[i] - (2.5 * gf[i] - 1.5 * gg[i])) <= 1e-12);
}

TEST_CASE("determinism: identical inputs give bit-identical outputs") {
    Rng rng(11);
    DenseArray a({3, 4}), b({4, 2});
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.normal();
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = rng.normal();
    auto run = [&]() {
        const Var out = mean(sigmoid(matmul(Var::leaf(a), Var::leaf(b))));
        return out.value()[0];
    };
    const double r1 = run(), r2 = run();
    CHECK(std::memcmp(&r1, &r2, sizeof(double)) == 0);
}

TEST_CASE("softmax cross-entropy values and closed-form gradient") {
    SUBCASE("uniform logits give ln 2") {
        const Var z = Var::leaf(DenseArray({1, 2}, {0.0, 0.0}));
        CHECK(softmax_cross_entropy(z, {0}).scalar() ==
              doctest::Approx(0.6931471805599453).epsilon(1e-12));
    }
    SUBCASE("saturated correct class is ~0") {
        const Var z = Var::leaf(DenseArray({1, 2}, {1000.0, 0.0}));
        CHECK(softmax_cross_entropy(z, {0}).scalar() <= 1e-6);
    }
    SUBCASE("gradient equals softmax minus one-hot") {
        Rng rng(21);
        DenseArray zv({3, 4});
        for (std::size_t i = 0; i < zv.size(); ++i) zv[i] = rng.normal();
        const std::vector<int> labels = {2, 0, 3};
        const Var z = Var::leaf(zv);
        backward(softmax_cross_entropy(z, labels));
        for (std::size_t r = 0; r < 3; ++r) {
            double denom = 0.0;
            for (std::size_t c = 0; c < 4; ++c) denom += std::exp(zv.at(r, c));
            for (std::size_t c = 0; c < 4; ++c) {
                const double p = std::exp(zv.at(r, c)) / denom;
                const double expected =
                    (p - (labels[r] == static_cast<int>(c) ? 1.0 : 0.0)) / 3.0;
                CHECK(std::abs(z.grad().at(r, c) - expected) <= 1e-10);
            }
        }
    }
    SUBCASE("bad labels rejected") {
        const Var z = Var::leaf(DenseArray({1, 2}, {0.0, 0.0}));
        CHECK_THROWS_AS(softmax_cross_entropy(z, {2}), std::invalid_argument);
        CHECK_THROWS_AS(softmax_cross_entropy(z, {0, 1}), std::invalid_argument);
    }
    SUBCASE("matches finite differences") {
        ParameterStore theta;
        Rng rng(31);
        DenseArray zv({2, 3});
        for (std::size_t i = 0; i < zv.size(); ++i) zv[i] = rng.normal();
        theta.add("z", zv);
        const std::vector<int> labels = {1, 2};
        auto f = [&](const ParameterStore& p) {
            return softmax_cross_entropy(Var::leaf(p.at("z")), labels).scalar();
        };
        const Var z = Var::leaf(zv);
        backward(softmax_cross_entropy(z, labels));
        ParameterStore bp;
        bp.add("z", z.grad());
        check_store_close(bp, finite_difference_gradient(f, theta, 1e-4));
    }
}

TEST_CASE("clamp passes gradient only inside the range") {
    const Var x = Var::leaf(vec({0.5, 2.0, -1.0}));
    backward(sum(clamp(x, 0.0, 1.0)));
    CHECK(x.grad()[0] == 1.0);
    CHECK(x.grad()[1] == 0.0);
    CHECK(x.grad()[2] == 0.0);
}

TEST_CASE("concat forward and backward") {
    const Var a = Var::leaf(DenseArray({2, 1}, {1, 2}));
    const Var b = Var::leaf(DenseArray({2, 2}, {3, 4, 5, 6}));
    const Var c = concat(a, b);
    CHECK(c.value().at(0, 1) == 3.0);
    CHECK(c.value().at(1, 2) == 6.0);
    const Var w = Var::leaf(DenseArray({2, 3}, {1, 2, 3, 4, 5, 6}));
    backward(sum(mul(c, w)));
    CHECK(a.grad().at(0, 0) == 1.0);
    CHECK(a.grad().at(1, 0) == 4.0);
    CHECK(b.grad().at(0, 0) == 2.0);
    CHECK(b.grad().at(1, 1) == 6.0);
}

TEST_CASE("primitive_forward dispatch covers the primitive set") {
    const Var a = Var::leaf(vec({0.3, 0.8}));
    const Var b = Var::leaf(vec({0.5, 0.25}));
    CHECK(primitive_forward("add", {a, b}).value()[0] == doctest::Approx(0.8));
    CHECK(primitive_forward("subtract", {a, b}).value()[1] == doctest::Approx(0.55));
    CHECK(primitive_forward("multiply", {a, b}).value()[0] == doctest::Approx(0.15));
    CHECK(primitive_forward("relu", {a}).value()[0] == doctest::Approx(0.3));
    CHECK(primitive_forward("tanh", {a}).value()[0] == doctest::Approx(std::tanh(0.3)));
    CHECK(primitive_forward("sigmoid", {a}).value()[0] ==
          doctest::Approx(1.0 / (1.0 + std::exp(-0.3))));
    CHECK(primitive_forward("log", {a}).value()[0] == doctest::Approx(std::log(0.3)));
    CHECK(primitive_forward("exp", {a}).value()[0] == doctest::Approx(std::exp(0.3)));
    CHECK(primitive_forward("mean", {a}).scalar() == doctest::Approx(0.55));
    CHECK(primitive_forward("sum", {a}).scalar() == doctest::Approx(1.1));
    CHECK(primitive_forward("concat", {a, b}).value().size() == 4);
    CHECK(primitive_forward("matmul",
                            {Var::leaf(DenseArray({1, 2}, {1, 2})),
                             Var::leaf(DenseArray({2, 1}, {3, 4}))})
              .scalar() == doctest::Approx(11.0));
    CHECK_THROWS_AS(primitive_forward("conv", {a}), std::invalid_argument);
    CHECK_THROWS_AS(primitive_forward("add", {a}), std::invalid_argument);
}

TEST_CASE("random composed graphs match finite differences") {
    using namespace tpg::testing;
    Rng rng(20240901);
    for (int trial = 0; trial < 12; ++trial) {
        const GraphProgram prog = make_random_program(rng, 1 + rng.uniform_index(6));
        const ParameterStore theta = random_leaves(prog, rng);

        const auto f = [&](const ParameterStore& p) { return eval_program(prog, p).scalar(); };

        std::vector<Var> leaf_vars;
        backward(eval_program(prog, theta, &leaf_vars));
        ParameterStore bp;
        for (std::size_t i = 0; i < leaf_vars.size(); ++i)
            bp.add(theta.entries()[i].first, leaf_vars[i].grad());

        check_store_close(bp, finite_difference_gradient(f, theta, 1e-4));
    }
}
