#include "doctest.h"

#include <stdexcept>

#include <cmath>

#include "graphmlp/tensor.hpp"

using namespace graphmlp;

namespace {
Tensor2 random_tensor(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Tensor2 t(r, c);
    for (double& v : t.data) v = rng.uniform(-scale, scale);
    return t;
}
}  // namespace

TEST_CASE("matmul identity and zeros") {
    Rng rng(1);
    Tensor2 m = random_tensor(3, 3, rng);
    const Tensor2 mi = matmul(m, Tensor2::identity(3));
    for (std::size_t i = 0; i < m.data.size(); ++i) CHECK(mi.data[i] == m.data[i]);
    const Tensor2 mii = matmul(mi, Tensor2::identity(3));
    for (std::size_t i = 0; i < m.data.size(); ++i) CHECK(mii.data[i] == m.data[i]);

    const Tensor2 z = matmul(Tensor2(2, 3, 0.0), random_tensor(3, 4, rng));
    CHECK(z.rows == 2);
    CHECK(z.cols == 4);
    for (const double v : z.data) CHECK(v == 0.0);
}

TEST_CASE("matmul equals naive triple loop") {
    Rng rng(7);
    const Tensor2 a = random_tensor(4, 5, rng);
    const Tensor2 b = random_tensor(5, 3, rng);
    const Tensor2 c = matmul(a, b);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 5; ++k) s += a.at(i, k) * b.at(k, j);
            CHECK(std::abs(c.at(i, j) - s) <= 1e-12);
        }
}

TEST_CASE("matmul dimension mismatch throws") {
    CHECK_THROWS_AS(matmul(Tensor2(2, 3), Tensor2(4, 2)), std::invalid_argument);
}

TEST_CASE("rng stream equality and determinism") {
    Rng a(42), b(42), c(43);
    bool all_equal = true;
    bool any_diff = false;
    for (int i = 0; i < 10000; ++i) {
        const auto va = a.next_u64();
        if (va != b.next_u64()) all_equal = false;
        if (va != c.next_u64()) any_diff = true;
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("rng uniform range and rough balance") {
    Rng rng(3);
    int low = 0;
    for (int i = 0; i < 10000; ++i) {
        const double v = rng.next_double();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
        if (v < 0.5) ++low;
    }
    CHECK(low > 4700);
    CHECK(low < 5300);
}

TEST_CASE("grad_check on quadratic is near exact") {
    Rng rng(5);
    const Tensor2 x = random_tensor(3, 4, rng);
    auto f = [](const Tensor2& t) {
        double s = 0.0;
        for (const double v : t.data) s += 0.5 * v * v;
        return s;
    };
    CHECK(grad_check(f, x, x) <= 1e-9);
}

TEST_CASE("grad_check rejects a wrong gradient") {
    Rng rng(6);
    const Tensor2 x = random_tensor(2, 3, rng);
    auto f = [](const Tensor2& t) {
        double s = 0.0;
        for (const double v : t.data) s += 0.5 * v * v;
        return s;
    };
    Tensor2 wrong = x;
    for (double& v : wrong.data) v *= 2.0;
    CHECK(grad_check(f, x, wrong) > 0.1);
}

TEST_CASE("grad_check flags non-finite evaluations") {
    const Tensor2 x(1, 1, 0.0);
    auto f = [](const Tensor2& t) { return std::log(t.data[0]); };  // NaN below 0
    CHECK_THROWS_AS(grad_check(f, x, Tensor2(1, 1, 0.0)), std::runtime_error);
}
