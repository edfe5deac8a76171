#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace hypsol::test {

// Seeded generator for property tests; every case draws from its own stream
// so failures reproduce from the printed seed.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed), seed_(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
    double sign() { return integer(0, 1) ? 1.0 : -1.0; }
    std::uint64_t seed() const { return seed_; }

private:
    std::mt19937_64 rng_;
    std::uint64_t seed_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace hypsol::test
