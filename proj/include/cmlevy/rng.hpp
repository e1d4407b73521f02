#pragma once

#include <cstdint>
#include <random>

namespace cmlevy {

//! SplitMix64 finaliser, used to derive independent seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/*!
 * Explicit random stream.
 *
 * Every sampling routine takes one of these by reference; there is no global
 * engine. Child streams are derived deterministically from the parent seed
 * and a stream index so that parallel workers reproduce serial output.
 */
class RandomStream {
  public:
    using engine_type = std::mt19937_64;
    using result_type = engine_type::result_type;

    explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    //! Independent stream for worker/path `index`.
    RandomStream child(std::uint64_t index) const {
        return RandomStream(mix_seed(seed_ ^ mix_seed(index + 0x5851f42d4c957f2dULL)));
    }

    static constexpr result_type min() { return engine_type::min(); }
    static constexpr result_type max() { return engine_type::max(); }
    result_type operator()() { return engine_(); }

    //! Uniform on the open interval (0,1).
    double uniform() {
        // 53 random bits, shifted off zero
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    engine_type& engine() { return engine_; }

  private:
    std::uint64_t seed_;
    engine_type engine_;
};

} // namespace cmlevy
