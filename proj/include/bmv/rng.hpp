#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace bmv {

/// Draw channels of the simulator. One stream per
/// (replica, label, channel, step) keeps replicas independent and makes
/// coupled runs share noise particle-by-particle.
enum class Channel : std::uint64_t { motion = 1, event = 2, offspring = 3, init = 4 };

namespace rng_detail {

inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

}  // namespace rng_detail

/// Counter-based stream: stateless given its key, so draws are
/// reproducible regardless of evaluation order across particles.
class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t replica, std::uint64_t label_hash,
              Channel channel, std::uint64_t step) {
        using rng_detail::mix64;
        std::uint64_t h = mix64(master_seed ^ 0x6a09e667f3bcc909ULL);
        h = mix64(h ^ (replica * 0x9e3779b97f4a7c15ULL));
        h = mix64(h ^ label_hash);
        h = mix64(h ^ (static_cast<std::uint64_t>(channel) * 0xd1342543de82ef95ULL));
        h = mix64(h ^ (step * 0x2545f4914f6cdd1dULL));
        base_ = h;
    }

    std::uint64_t next_u64() {
        return rng_detail::mix64(base_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform in [0, 1).
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (two uniforms per pair).
    void normal_pair(double& z0, double& z1) {
        double u1 = u01();
        double u2 = u01();
        // avoid log(0)
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        z0 = r * std::cos(theta);
        z1 = r * std::sin(theta);
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double z0, z1;
        normal_pair(z0, z1);
        spare_ = z1;
        have_spare_ = true;
        return z0;
    }

  private:
    std::uint64_t base_ = 0;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace bmv
