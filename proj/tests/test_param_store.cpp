#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "mtadapt/param_store.hpp"

using namespace mtadapt;

namespace {

ParamStore store_with_grads() {
    ParamStore store;
    Rng rng(17);
    store.add("enc/w", Tensor::randn({2, 2}, rng, 1.0, true), false);
    store.add("dec/w", Tensor::randn({2, 3}, rng, 1.0, true), false);
    for (auto& e : store.entries()) {
        Tensor x = Tensor::randn({1, e.tensor.shape()[1]}, rng);
        mse_loss(linear(x, e.tensor), Tensor::zeros({1, e.tensor.shape()[0]})).backward();
    }
    return store;
}

}  // namespace

TEST_CASE("flattened gradient length is the sum of parameter sizes") {
    ParamStore store = store_with_grads();
    REQUIRE(store.flatten_gradients().size() == 4 + 6);
}

TEST_CASE("flattening twice is bitwise identical") {
    ParamStore store = store_with_grads();
    REQUIRE(store.flatten_gradients() == store.flatten_gradients());
}

TEST_CASE("registration order changes concatenation order but not the values") {
    Rng rng(29);
    Tensor a = Tensor::randn({2, 2}, rng, 1.0, true);
    Tensor b = Tensor::randn({3, 1}, rng, 1.0, true);
    mse_loss(matmul(Tensor::randn({1, 2}, rng), a), Tensor::zeros({1, 2})).backward();
    mse_loss(matmul(Tensor::randn({1, 3}, rng), b), Tensor::zeros({1, 1})).backward();

    ParamStore forward_order, reverse_order;
    forward_order.add("a", a, false);
    forward_order.add("b", b, false);
    reverse_order.add("b", b, false);
    reverse_order.add("a", a, false);

    auto lhs = forward_order.flatten_gradients();
    auto rhs = reverse_order.flatten_gradients();
    REQUIRE(lhs != rhs);
    std::sort(lhs.begin(), lhs.end());
    std::sort(rhs.begin(), rhs.end());
    REQUIRE(lhs == rhs);  // same multiset
}

TEST_CASE("missing gradients are reported by parameter name") {
    ParamStore store;
    store.add("head/w", Tensor::zeros({2, 2}, true), false);
    REQUIRE_THROWS_MATCHES(store.flatten_gradients(), ContractError,
                           Catch::Matchers::MessageMatches(
                               Catch::Matchers::ContainsSubstring("head/w")));
}

TEST_CASE("duplicate names are rejected") {
    ParamStore store;
    store.add("w", Tensor::zeros({1}), false);
    REQUIRE_THROWS_AS(store.add("w", Tensor::zeros({1}), false), ContractError);
}

TEST_CASE("name filters select a stable subset") {
    ParamStore store = store_with_grads();
    auto filter = ParamStore::prefix_filter("enc/");
    REQUIRE(store.flatten_gradients(filter).size() == 4);
    REQUIRE(store.value_count(filter) == 4);
}

TEST_CASE("value hash changes when any value drifts") {
    ParamStore store = store_with_grads();
    const auto before = store.value_hash();
    store.get("enc/w").values_mut()[0] += 1e-9;
    REQUIRE(store.value_hash() != before);
}
