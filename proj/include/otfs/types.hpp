#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace otfs {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kJ{0.0, 1.0};

// Complex grid over (Doppler index k, delay index l).
// Canonical vectorization: element (k, l) lives at r = k*M + l.
struct DDGrid {
    int M = 0;
    int N = 0;
    std::vector<Complex> v;

    DDGrid() = default;
    DDGrid(int m, int n) : M(m), N(n), v(static_cast<size_t>(m) * n) {}

    int size() const { return M * N; }
    Complex& at(int k, int l) { return v[static_cast<size_t>(k) * M + l]; }
    const Complex& at(int k, int l) const { return v[static_cast<size_t>(k) * M + l]; }
    Complex& operator[](size_t r) { return v[r]; }
    const Complex& operator[](size_t r) const { return v[r]; }

    double squared_norm() const {
        double e = 0.0;
        for (const auto& x : v) e += std::norm(x);
        return e;
    }
};

// Time-frequency grid: element (symbol n, subcarrier m) at index n*M + m.
struct TFGrid {
    int M = 0;
    int N = 0;
    std::vector<Complex> v;

    TFGrid() = default;
    TFGrid(int m, int n) : M(m), N(n), v(static_cast<size_t>(m) * n) {}

    Complex& at(int n, int m) { return v[static_cast<size_t>(n) * M + m]; }
    const Complex& at(int n, int m) const { return v[static_cast<size_t>(n) * M + m]; }

    double squared_norm() const {
        double e = 0.0;
        for (const auto& x : v) e += std::norm(x);
        return e;
    }
};

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace otfs
