#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace wtdiag {

/// Exact rational on int64 (int128 intermediates). Operands here are tiny:
/// lattice indices, polynomial dissipation coefficients, alpha entries.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n) : num(n), den(1) {}
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    static Rational reduce128(__int128 n, __int128 d) {
        if (d < 0) { n = -n; d = -d; }
        __int128 a = n < 0 ? -n : n, b = d;
        while (b) { __int128 t = a % b; a = b; b = t; }
        if (a > 1) { n /= a; d /= a; }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("Rational: overflow");
        Rational r;
        r.num = static_cast<std::int64_t>(n);
        r.den = static_cast<std::int64_t>(d);
        return r;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return reduce128(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                         static_cast<__int128>(a.den) * b.den);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return reduce128(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                         static_cast<__int128>(a.den) * b.den);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return reduce128(static_cast<__int128>(a.num) * b.num,
                         static_cast<__int128>(a.den) * b.den);
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }
    bool is_zero() const { return num == 0; }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Exact rank of an integer matrix by fraction-free (Bareiss) elimination.
/// Entries and intermediates stay well inside __int128 for the sizes used
/// here (n <= ~10, entries up to ~1e3).
inline int exact_rank(std::vector<std::vector<std::int64_t>> m) {
    const int rows = static_cast<int>(m.size());
    if (rows == 0) return 0;
    const int cols = static_cast<int>(m[0].size());
    std::vector<std::vector<__int128>> a(rows, std::vector<__int128>(cols));
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a[i][j] = m[i][j];

    int rank = 0;
    __int128 prev = 1;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if (a[r][col] != 0) { pivot = r; break; }
        if (pivot < 0) continue;
        std::swap(a[rank], a[pivot]);
        for (int r = rank + 1; r < rows; ++r) {
            for (int c = col + 1; c < cols; ++c)
                a[r][c] = (a[rank][col] * a[r][c] - a[r][col] * a[rank][c]) / prev;
            a[r][col] = 0;
        }
        prev = a[rank][col];
        ++rank;
    }
    return rank;
}

}  // namespace wtdiag
