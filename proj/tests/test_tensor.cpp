#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mtadapt/tensor.hpp"
#include "support/fd_check.hpp"

using namespace mtadapt;
using testsupport::fd_max_rel_err;

TEST_CASE("matmul with identity returns the operand") {
    Tensor eye = Tensor::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Tensor v = Tensor::from({3, 1}, {0.5, -2.25, 7.0});
    Tensor out = matmul(eye, v);
    for (std::size_t i = 0; i < 3; ++i) REQUIRE(out.values()[i] == v.values()[i]);
}

TEST_CASE("mse of a tensor with itself is zero") {
    Tensor y = Tensor::from({2, 2}, {1.0, -3.0, 0.25, 9.0});
    REQUIRE(mse_loss(y, y).item() == 0.0);
}

TEST_CASE("gelu matches the pointwise scalar reference") {
    const std::vector<double> xs = {-1.0, 0.0, 2.0};
    Tensor t = Tensor::from({3}, xs);
    Tensor out = gelu(t);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double expected = 0.5 * xs[i] * (1.0 + std::erf(xs[i] / std::sqrt(2.0)));
        REQUIRE_THAT(out.values()[i], Catch::Matchers::WithinAbs(expected, 1e-15));
    }
}

TEST_CASE("shape mismatches name the op and the shapes") {
    Tensor a = Tensor::zeros({2, 3});
    Tensor b = Tensor::zeros({2, 2});
    REQUIRE_THROWS_MATCHES(matmul(a, b), DimensionError,
                           Catch::Matchers::MessageMatches(
                               Catch::Matchers::ContainsSubstring("matmul") &&
                               Catch::Matchers::ContainsSubstring("[2x3]")));
    REQUIRE_THROWS_AS(add(a, b), DimensionError);
    REQUIRE_THROWS_AS(mul(a, b), DimensionError);
    REQUIRE_THROWS_AS(mse_loss(a, b), DimensionError);
}

TEST_CASE("scalar linear matches the closed-form derivative") {
    // loss = (w*x - t)^2 with one element: dL/dw = 2x(wx - t)
    const double w0 = 1.5, x0 = 2.0, t0 = 1.0;
    Tensor w = Tensor::from({1, 1}, {w0}, true);
    Tensor x = Tensor::from({1, 1}, {x0});
    Tensor target = Tensor::from({1, 1}, {t0});
    Tensor loss = mse_loss(linear(x, w), target);
    loss.backward();
    REQUIRE_THAT(w.grad()[0], Catch::Matchers::WithinAbs(2.0 * x0 * (w0 * x0 - t0), 1e-12));
}

TEST_CASE("gradients match central finite differences") {
    Rng rng(42);
    Tensor w1 = Tensor::randn({4, 3}, rng, 0.5, true);
    Tensor b1 = Tensor::randn({4}, rng, 0.1, true);
    Tensor w2 = Tensor::randn({2, 4}, rng, 0.5, true);
    Tensor x = Tensor::randn({5, 3}, rng);
    Tensor target = Tensor::randn({5, 2}, rng);
    auto forward = [&] {
        Tensor h = gelu(add(linear(x, w1), b1));
        return mse_loss(linear(h, w2), target);
    };
    REQUIRE(fd_max_rel_err({w1, b1, w2}, forward) < 1e-5);
}

TEST_CASE("softmax and cross-entropy gradients match finite differences") {
    Rng rng(7);
    Tensor logits = Tensor::randn({4, 3}, rng, 1.5, true);
    const std::vector<std::size_t> labels = {0, 2, 1, 2};

    SECTION("rows of softmax sum to one") {
        Tensor p = softmax(logits);
        for (std::size_t r = 0; r < 4; ++r) {
            double s = 0.0;
            for (std::size_t j = 0; j < 3; ++j) s += p.values()[r * 3 + j];
            REQUIRE_THAT(s, Catch::Matchers::WithinAbs(1.0, 1e-12));
        }
    }
    SECTION("cross-entropy value matches a manual log-softmax") {
        double expected = 0.0;
        for (std::size_t r = 0; r < 4; ++r) {
            double denom = 0.0;
            for (std::size_t j = 0; j < 3; ++j) denom += std::exp(logits.values()[r * 3 + j]);
            expected += std::log(denom) - logits.values()[r * 3 + labels[r]];
        }
        expected /= 4.0;
        REQUIRE_THAT(cross_entropy_loss(logits, labels).item(),
                     Catch::Matchers::WithinAbs(expected, 1e-12));
    }
    SECTION("gradients") {
        auto forward = [&] { return cross_entropy_loss(logits, labels); };
        REQUIRE(fd_max_rel_err({logits}, forward) < 1e-5);

        Tensor w = Tensor::randn({3, 3}, rng, 0.7, true);
        auto forward2 = [&] { return mean(mul(softmax(linear(logits, w)), softmax(logits))); };
        REQUIRE(fd_max_rel_err({logits, w}, forward2) < 1e-5);
    }
    SECTION("bad label is rejected") {
        REQUIRE_THROWS_AS(cross_entropy_loss(logits, {0, 1, 2, 3}), DimensionError);
    }
}

TEST_CASE("concat and reshape route values and gradients") {
    Rng rng(11);
    Tensor a = Tensor::randn({2, 3}, rng, 1.0, true);
    Tensor b = Tensor::randn({2, 2}, rng, 1.0, true);
    Tensor c = concat({a, b}, 1);
    REQUIRE(c.shape() == Shape{2, 5});
    REQUIRE(c.values()[3] == b.values()[0]);
    REQUIRE(c.values()[5] == a.values()[3]);

    auto forward = [&] {
        Tensor joined = concat({a, b}, 1);
        Tensor flat = reshape(joined, {10});
        return mse_loss(flat, Tensor::zeros({10}));
    };
    REQUIRE(fd_max_rel_err({a, b}, forward) < 1e-5);

    REQUIRE_THROWS_AS(concat({a, Tensor::zeros({3, 2})}, 1), DimensionError);
    REQUIRE_THROWS_AS(reshape(a, {7}), DimensionError);
}

TEST_CASE("parameters outside the graph receive no gradient") {
    Tensor used = Tensor::from({1, 1}, {2.0}, true);
    Tensor unused = Tensor::from({1, 1}, {3.0}, true);
    Tensor loss = mse_loss(linear(Tensor::from({1, 1}, {1.0}), used), Tensor::zeros({1, 1}));
    loss.backward();
    REQUIRE(used.has_grad());
    REQUIRE_FALSE(unused.has_grad());  // absent grad == zero contribution
}

TEST_CASE("two backward passes accumulate to exactly twice the gradient") {
    Rng rng(3);
    Tensor w = Tensor::randn({3, 3}, rng, 1.0, true);
    Tensor x = Tensor::randn({2, 3}, rng);
    Tensor loss = mse_loss(linear(x, w), Tensor::zeros({2, 3}));
    loss.backward();
    const std::vector<double> once(w.grad().begin(), w.grad().end());
    loss.backward();
    for (std::size_t i = 0; i < once.size(); ++i) REQUIRE(w.grad()[i] == 2.0 * once[i]);
}

TEST_CASE("backward requires a scalar loss") {
    Tensor v = Tensor::from({2}, {1.0, 2.0}, true);
    REQUIRE_THROWS_AS(scale(v, 2.0).backward(), ContractError);
}

TEST_CASE("forward and backward are bitwise reproducible for a fixed seed") {
    auto run = [] {
        Rng rng(99);
        Tensor w = Tensor::randn({6, 6}, rng, 0.4, true);
        Tensor x = Tensor::randn({4, 6}, rng);
        Tensor loss = mse_loss(gelu(linear(x, w)), Tensor::zeros({4, 6}));
        loss.backward();
        std::vector<double> out(w.grad().begin(), w.grad().end());
        out.push_back(loss.item());
        return out;
    };
    REQUIRE(run() == run());
}

TEST_CASE("dropout is identity in eval and an inverted mask in training") {
    Rng rng(5);
    Tensor x = Tensor::from({1, 8}, {1, 1, 1, 1, 1, 1, 1, 1}, true);
    Tensor eval_out = dropout(x, 0.5, rng, false);
    REQUIRE(eval_out.id() == x.id());

    Rng rng2(5);
    Tensor train_out = dropout(x, 0.5, rng2, true);
    for (double v : train_out.values()) REQUIRE((v == 0.0 || v == 2.0));

    Rng rng3(5);
    Tensor again = dropout(x, 0.5, rng3, true);
    REQUIRE(std::vector<double>(train_out.values().begin(), train_out.values().end()) ==
            std::vector<double>(again.values().begin(), again.values().end()));
}

TEST_CASE("elementwise ops, bias add and dup pass finite differences") {
    Rng rng(21);
    Tensor a = Tensor::randn({3, 4}, rng, 1.0, true);
    Tensor b = Tensor::randn({3, 4}, rng, 1.0, true);
    Tensor bias = Tensor::randn({4}, rng, 1.0, true);
    auto forward = [&] {
        Tensor h = relu(add(mul(a, b), bias));
        Tensor d = duplicate(h);
        return mse_loss(add(h, d), Tensor::zeros({3, 4}));
    };
    REQUIRE(fd_max_rel_err({a, b, bias}, forward) < 1e-5);
}
