#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "sqlgrader/tensor.hpp"

using namespace sqlgrader;

TEST_CASE("matmul identity and hand example") {
    Tensor identity({2, 2}, {1, 0, 0, 1});
    Tensor b({2, 2}, {5, 6, 7, 8});
    Tensor c = matmul(identity, b);
    CHECK(c.data == b.data);

    Tensor a({2, 2}, {1, 2, 3, 4});
    // Frozen from the naive triple-loop oracle below.
    Tensor expected({2, 2}, {19, 22, 43, 50});
    Tensor got = matmul(a, b);
    for (std::size_t i = 0; i < 4; ++i) CHECK(got.data[i] == doctest::Approx(expected.data[i]));

    Tensor zero = Tensor::zeros({2, 3});
    Tensor annihilated = matmul(a, Tensor::zeros({2, 3}));
    for (double v : annihilated.data) CHECK(v == 0.0);
}

namespace {

// Independent oracle: naive triple loop.
Tensor matmul_oracle(const Tensor& a, const Tensor& b) {
    Tensor c({a.shape[0], b.shape[1]});
    for (std::size_t i = 0; i < a.shape[0]; ++i)
        for (std::size_t j = 0; j < b.shape[1]; ++j)
            for (std::size_t t = 0; t < a.shape[1]; ++t) c(i, j) += a(i, t) * b(t, j);
    return c;
}

}  // namespace

TEST_CASE("matmul matches the triple-loop oracle on random shapes") {
    SeededRng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 1 + rng.next_below(6), k = 1 + rng.next_below(6),
                          n = 1 + rng.next_below(6);
        Tensor a = gradcheck::random_tensor({m, k}, rng);
        Tensor b = gradcheck::random_tensor({k, n}, rng);
        Tensor got = matmul(a, b), want = matmul_oracle(a, b);
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("matmul associativity on random 3-chains") {
    SeededRng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Tensor a = gradcheck::random_tensor({4, 5}, rng);
        Tensor b = gradcheck::random_tensor({5, 3}, rng);
        Tensor c = gradcheck::random_tensor({3, 6}, rng);
        Tensor left = matmul(matmul(a, b), c);
        Tensor right = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < left.size(); ++i)
            CHECK(left.data[i] == doctest::Approx(right.data[i]).epsilon(1e-9));
    }
}

TEST_CASE("matmul dimension mismatch names both shapes") {
    Tensor a({2, 3});
    Tensor b({2, 3});
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("[2,3]"), ShapeError);
}

TEST_CASE("softmax_rows basics") {
    Tensor x({1, 3}, {0, 0, 0});
    Tensor y = softmax_rows(x);
    for (double v : y.data) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    const double c = 4.2;
    Tensor two({1, 2}, {c, c + std::log(2.0)});
    Tensor yt = softmax_rows(two);
    CHECK(yt(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(yt(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax_rows shift invariance and normalization") {
    SeededRng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        Tensor x = gradcheck::random_tensor({3, 5}, rng, -50.0, 50.0);
        Tensor y = softmax_rows(x);
        for (std::size_t i = 0; i < 3; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < 5; ++j) sum += y(i, j);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
        Tensor shifted = x;
        for (double& v : shifted.data) v += 13.5;
        Tensor ys = softmax_rows(shifted);
        for (std::size_t i = 0; i < y.size(); ++i)
            CHECK(std::abs(y.data[i] - ys.data[i]) < 1e-12);
    }
}

TEST_CASE("mean_axis0") {
    Tensor constant = Tensor::full({5, 3}, 2.5);
    Tensor m = mean_axis0(constant);
    for (double v : m.data) CHECK(v == doctest::Approx(2.5));

    Tensor x({2, 2}, {1, 2, 3, 4});
    Tensor m2 = mean_axis0(x);
    CHECK(m2(0) == doctest::Approx(2.0));
    CHECK(m2(1) == doctest::Approx(3.0));

    Tensor single({1, 2}, {7, 9});
    Tensor m3 = mean_axis0(single);
    CHECK(m3(0) == 7.0);
    CHECK(m3(1) == 9.0);
}

TEST_CASE("glorot_init determinism, bound and mean") {
    SeededRng a(99), b(99);
    Tensor t1 = glorot_init({10, 10}, a);
    Tensor t2 = glorot_init({10, 10}, b);
    CHECK(t1.data == t2.data);  // bitwise

    // 1e5 draws: sample mean should sit within 0.01 L of zero.
    SeededRng rng(123);
    Tensor big = glorot_init({500, 200}, rng);
    const double limit = std::sqrt(6.0 / (500.0 + 200.0));
    double mean = 0.0;
    for (double v : big.data) {
        CHECK(std::abs(v) <= limit);
        mean += v;
    }
    mean /= static_cast<double>(big.size());
    CHECK(std::abs(mean) < 0.01 * limit);
}

TEST_CASE("zero-sized dimension rejected") {
    SeededRng rng(1);
    CHECK_THROWS_AS(glorot_init({3, 0}, rng), ShapeError);
    CHECK_THROWS_AS(Tensor({0}), ShapeError);
}

TEST_CASE("seeded rng reproducibility") {
    SeededRng a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t va = a.next_u64();
        all_equal = all_equal && (va == b.next_u64());
        any_diff = any_diff || (va != c.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_diff);
}
