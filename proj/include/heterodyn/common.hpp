#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace heterodyn {

using Real = double;
using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Seed = std::uint64_t;

/// Parameters that cannot be realized: violated hypotheses, empty windows,
/// infeasible degree sequences. The CLI maps this to exit code 2.
class InfeasibleError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when integration produces a non-finite state.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(const std::string& what, double time)
        : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}

    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

/// Raised by iterative eigenvalue estimates that exhaust their budget.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_estimate, double residual)
        : std::runtime_error(what), last_estimate_(last_estimate), residual_(residual) {}

    [[nodiscard]] double last_estimate() const noexcept { return last_estimate_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double last_estimate_;
    double residual_;
};

// -----------------------------------------------------------------------------
// Counter-based randomness
// -----------------------------------------------------------------------------

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Mixes a seed with a stream key; distinct keys give independent streams.
constexpr std::uint64_t derive_seed(Seed seed, std::uint64_t key) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(key + 0x632BE59BD9B4E019ULL));
}

/// Uniform double in [0, 1) from 53 high bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Minimal sequential generator for the few places that need streams
/// (initial frames, random fixtures). Satisfies UniformRandomBitGenerator.
class SplitMix {
public:
    using result_type = std::uint64_t;

    explicit SplitMix(Seed seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform() noexcept { return to_unit((*this)()); }

private:
    std::uint64_t state_;
};

}  // namespace heterodyn
