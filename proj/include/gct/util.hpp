#ifndef GCT_UTIL_HPP
#define GCT_UTIL_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gct {

using int128 = __int128;

inline std::string int128_to_string(int128 x) {
    if (x == 0) return "0";
    bool neg = x < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(x) : x;
    std::string s;
    while (u > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    return std::string(s.rbegin(), s.rend());
}

// n * (n-1) * ... * (n-k+1), as a double (exact for the sizes used here
// only when it fits 2^53; callers needing exactness use the int128 overload).
inline double falling_factorial(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= static_cast<double>(n - i);
    return k <= n ? r : 0.0;
}

inline int128 falling_factorial_i128(int n, int k) {
    if (k > n) return 0;
    int128 r = 1;
    for (int i = 0; i < k; ++i) r *= (n - i);
    return r;
}

inline std::int64_t factorial_i64(int n) {
    std::int64_t r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

} // namespace gct

#endif
