#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#ifndef VERIGRADE_TEST_DATA
#error "VERIGRADE_TEST_DATA must point at tests/data"
#endif

namespace testing {

inline std::filesystem::path data_dir() { return VERIGRADE_TEST_DATA; }

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view s) {
    std::ofstream out(p, std::ios::binary);
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

/// Fresh directory under the system temp dir, removed at scope exit.
class Scratch {
public:
    Scratch() : Scratch(std::filesystem::temp_directory_path()) {}
    explicit Scratch(const std::filesystem::path& parent) {
        static std::random_device rd;
        for (;;) {
            path_ = parent / ("vg-test-" + std::to_string(rd()));
            if (std::filesystem::create_directory(path_)) break;
        }
    }
    ~Scratch() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Seeded generator with the handful of draws the property tests need.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
    std::uint8_t byte() { return static_cast<std::uint8_t>(range(0, 255)); }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(range(0, static_cast<int>(v.size()) - 1))];
    }

    std::string bytes(int max_len) {
        std::string s(static_cast<std::size_t>(range(0, max_len)), '\0');
        for (auto& c : s) c = static_cast<char>(byte());
        return s;
    }

    std::string ident() {
        static const std::vector<std::string> names = {"x", "y", "acc", "n", "tree", "Size", "i0", "res"};
        return pick(names);
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

}  // namespace testing
