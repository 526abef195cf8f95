#pragma once
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace riskbound {

/// Mixes a master seed with stream coordinates into an independent 64-bit seed.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                        std::uint64_t c = 0) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    /// Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    bool bernoulli(double p) { return uniform() < p; }
    int sign() { return (engine_() >> 63) ? 1 : -1; }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
    double normal();

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

/// Worker count used by parallel_for; 0 means "use the hardware concurrency".
void set_default_threads(unsigned threads) noexcept;
[[nodiscard]] unsigned default_threads() noexcept;

/// Runs body(i) for i in [0, count). Each index must write only its own output slot,
/// so results do not depend on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Mean and standard error, accumulated in index order.
[[nodiscard]] MeanStderr mean_stderr(const std::vector<double>& values);

}  // namespace riskbound
