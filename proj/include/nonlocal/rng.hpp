#pragma once

// Counter-based deterministic random streams. Each stream is keyed by
// (master seed, label, index), so adding new labelled consumers never
// perturbs existing streams.

#include <cstdint>
#include <string_view>

#include "domain.hpp"

namespace nonlocal {

namespace rng_detail {

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (char c : s) {
        h ^= uint64_t(uint8_t(c));
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t splitmix(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace rng_detail

class StreamRng {
  public:
    StreamRng(uint64_t master_seed, std::string_view label, uint64_t index) {
        state_ = master_seed;
        (void)rng_detail::splitmix(state_);
        state_ ^= rng_detail::fnv1a(label);
        (void)rng_detail::splitmix(state_);
        state_ ^= index * 0xd1342543de82ef95ull;
        (void)rng_detail::splitmix(state_);
    }

    uint64_t next_u64() { return rng_detail::splitmix(state_); }

    // uniform in [0,1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

  private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Zero-exterior grid function with i.i.d. standard normal interior values.
inline GridFunction random_grid_function(const Domain& d, uint64_t master_seed,
                                         std::string_view label, uint64_t index) {
    StreamRng rng(master_seed, label, index);
    GridFunction u(d);
    for (auto& v : u.interior) v = rng.normal();
    return u;
}

}  // namespace nonlocal
