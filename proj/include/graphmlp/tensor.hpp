#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace graphmlp {

// Dense row-major matrix of 64-bit floats. Values are immutable by
// convention once an operation returns them.
struct Tensor2 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor2() = default;
    Tensor2(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    bool same_shape(const Tensor2& o) const {
        return rows == o.rows && cols == o.cols;
    }

    static Tensor2 identity(std::size_t n);
};

bool all_finite(const Tensor2& t);
bool all_finite(const std::vector<double>& v);

// C = A * B with a fixed i-k-j reduction order (deterministic).
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
Tensor2 transpose(const Tensor2& a);

// xoshiro256** seeded through splitmix64. Same seed gives the same
// sequence on every platform; no libc rand or std::mt19937 involved.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    // uniform in [0, 1), 53-bit resolution
    double next_double();
    double uniform(double lo, double hi);
    // uniform in [0, n)
    std::size_t index(std::size_t n);
    double normal();  // standard normal, Box-Muller

  private:
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Max over entries of |central difference - analytic| / max(1, |analytic|).
// Throws if f returns a non-finite value at any probe point.
double grad_check(const std::function<double(const Tensor2&)>& f,
                  const Tensor2& x, const Tensor2& analytic_grad,
                  double h = 1e-5);

}  // namespace graphmlp
