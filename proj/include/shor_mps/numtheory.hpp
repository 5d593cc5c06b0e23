// Copyright 2026 The shor-mps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file numtheory.hpp
 * Exact integer arithmetic for order finding: modular powers, multiplicative
 * orders, two-adic splits, Carmichael values, continued fractions and the
 * classical post-processing that turns an order into factors.
 *
 * Everything works on 64-bit unsigned integers with 128-bit intermediates,
 * which supports moduli below 2^62.
 */

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "shor_mps/error.hpp"

namespace shor_mps {

using u64 = std::uint64_t;

inline constexpr u64 kMaxModulus = u64{1} << 62;

/// Asymptotic lower bound on Pr(alpha = max(d_p, d_q)) for uniformly drawn a.
inline constexpr double kMaxAlphaProbabilityFloor = 0.5;
/// Asymptotic expectation of max(d_p, d_q) over random primes p, q.
inline constexpr double kExpectedMaxAlpha = 8.0 / 3.0;

inline constexpr u64 mul_mod(u64 a, u64 b, u64 m) {
    return static_cast<u64>((static_cast<unsigned __int128>(a) * b) % m);
}

inline u64 mod_pow(u64 base, u64 exponent, u64 modulus) {
    if (modulus < 2) {
        throw InvalidArgument("mod_pow: modulus must be at least 2");
    }
    u64 result = 1;
    base %= modulus;
    while (exponent > 0) {
        if (exponent & 1U) {
            result = mul_mod(result, base, modulus);
        }
        base = mul_mod(base, base, modulus);
        exponent >>= 1U;
    }
    return result;
}

/// Number of binary digits of n (0 for n = 0).
inline constexpr unsigned bit_length(u64 n) { return static_cast<unsigned>(std::bit_width(n)); }

/// Deterministic Miller-Rabin; the witness set is exact for all 64-bit inputs.
inline bool is_prime(u64 n) {
    if (n < 2) {
        return false;
    }
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) {
            return n == p;
        }
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1U) == 0) {
        d >>= 1U;
        ++s;
    }
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = mod_pow(a, d, n);
        if (x == 1 || x == n - 1) {
            continue;
        }
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) {
            return false;
        }
    }
    return true;
}

/// Prime factorization by trial division, as (prime, exponent) pairs in increasing order.
inline std::vector<std::pair<u64, unsigned>> factorize(u64 n) {
    std::vector<std::pair<u64, unsigned>> out;
    for (u64 p = 2; p <= n / p; p += (p == 2 ? 1 : 2)) {
        if (n % p == 0) {
            unsigned e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            out.emplace_back(p, e);
        }
    }
    if (n > 1) {
        out.emplace_back(n, 1);
    }
    return out;
}

/// True when n = p^k for a prime p and k >= 2.
inline bool is_prime_power(u64 n) {
    if (n < 4) {
        return false;
    }
    for (unsigned k = 2; k < 64; ++k) {
        // Integer k-th root by binary search; powers are checked with overflow guards.
        u64 lo = 1;
        u64 hi = u64{1} << ((64 + k - 1) / k);
        while (lo < hi) {
            u64 mid = lo + (hi - lo + 1) / 2;
            unsigned __int128 acc = 1;
            bool over = false;
            for (unsigned i = 0; i < k && !over; ++i) {
                acc *= mid;
                over = acc > n;
            }
            if (over) {
                hi = mid - 1;
            } else {
                lo = mid;
            }
        }
        if (lo < 2) {
            break;
        }
        unsigned __int128 acc = 1;
        for (unsigned i = 0; i < k; ++i) {
            acc *= lo;
        }
        if (acc == n && is_prime(lo)) {
            return true;
        }
    }
    return false;
}

struct TwoAdicSplit {
    unsigned alpha = 0;
    u64 beta = 1;

    friend bool operator==(const TwoAdicSplit &, const TwoAdicSplit &) = default;
};

inline TwoAdicSplit two_adic_split(u64 r) {
    if (r == 0) {
        throw InvalidArgument("two_adic_split: r must be positive");
    }
    const auto alpha = static_cast<unsigned>(std::countr_zero(r));
    return {alpha, r >> alpha};
}

inline void require_distinct_odd(u64 p, u64 q) {
    if (p == q) {
        throw InvalidArgument("semiprime factors must be distinct");
    }
    if (p < 3 || q < 3 || p % 2 == 0 || q % 2 == 0) {
        throw InvalidArgument("semiprime factors must be odd primes");
    }
}

/// lambda(pq) = lcm(p - 1, q - 1). Primality is the caller's responsibility.
inline u64 carmichael_semiprime(u64 p, u64 q) {
    require_distinct_odd(p, q);
    return std::lcm(p - 1, q - 1);
}

struct AlphaStatistics {
    unsigned dp = 0;
    unsigned dq = 0;
    unsigned alpha_max = 0;

    friend bool operator==(const AlphaStatistics &, const AlphaStatistics &) = default;
};

inline AlphaStatistics alpha_statistics(u64 p, u64 q) {
    require_distinct_odd(p, q);
    const unsigned dp = two_adic_split(p - 1).alpha;
    const unsigned dq = two_adic_split(q - 1).alpha;
    return {dp, dq, std::max(dp, dq)};
}

struct OrderOptions {
    /// Iteration budget when the factorization of N is not known.
    u64 iteration_cap = u64{1} << 26;
};

/// Smallest r > 0 with a^r = 1 (mod N), by iterating successive powers.
inline u64 multiplicative_order(u64 a, u64 N, const OrderOptions &options = {}) {
    if (N < 2 || N >= kMaxModulus) {
        throw InvalidArgument("multiplicative_order: modulus out of range");
    }
    if (std::gcd(a % N, N) != 1) {
        throw InvalidArgument("multiplicative_order: gcd(a, N) != 1");
    }
    a %= N;
    u64 x = a;
    for (u64 r = 1; r <= options.iteration_cap; ++r) {
        if (x == 1) {
            return r;
        }
        x = mul_mod(x, a, N);
    }
    throw CapExceeded("multiplicative_order: no period within " + std::to_string(options.iteration_cap) +
                      " iterations");
}

/// Order of a modulo N = pq, obtained from lambda(N) by prime-power descent.
inline u64 multiplicative_order(u64 a, u64 p, u64 q) {
    const u64 N = p * q;
    if (std::gcd(a % N, N) != 1) {
        throw InvalidArgument("multiplicative_order: gcd(a, N) != 1");
    }
    u64 r = carmichael_semiprime(p, q);
    for (const auto &[prime, exponent] : factorize(r)) {
        for (unsigned e = 0; e < exponent; ++e) {
            if (mod_pow(a, r / prime, N) != 1) {
                break;
            }
            r /= prime;
        }
    }
    return r;
}

/// Problem parameters of one order-finding instance.
struct SemiprimeInstance {
    u64 N = 0;
    u64 a = 0;
    unsigned l = 0;
    std::optional<u64> p;
    std::optional<u64> q;

    unsigned upper_qubits() const { return 2 * l; }
};

inline SemiprimeInstance make_instance(u64 N, u64 a, std::optional<u64> p = std::nullopt,
                                       std::optional<u64> q = std::nullopt) {
    if (N < 3 || N >= kMaxModulus) {
        throw InvalidArgument("N must lie in [3, 2^62)");
    }
    if (a <= 1 || a >= N) {
        throw InvalidArgument("a must satisfy 1 < a < N");
    }
    if (std::gcd(a, N) != 1) {
        throw InvalidArgument("gcd(a, N) != 1");
    }
    if (p.has_value() != q.has_value()) {
        throw InvalidArgument("p and q must be given together");
    }
    if (p) {
        require_distinct_odd(*p, *q);
        if (*p * *q != N || !is_prime(*p) || !is_prime(*q)) {
            throw InvalidArgument("p and q must be primes with N = p*q");
        }
    }
    return {N, a, bit_length(N), p, q};
}

struct OrderProfile {
    u64 r = 0;
    unsigned alpha = 0;
    u64 beta = 1;
    std::optional<u64> lambda_N;
    std::optional<unsigned> dp;
    std::optional<unsigned> dq;
};

inline OrderProfile order_profile(const SemiprimeInstance &inst, const OrderOptions &options = {}) {
    OrderProfile out;
    if (inst.p) {
        out.r = multiplicative_order(inst.a, *inst.p, *inst.q);
        out.lambda_N = carmichael_semiprime(*inst.p, *inst.q);
        const auto stats = alpha_statistics(*inst.p, *inst.q);
        out.dp = stats.dp;
        out.dq = stats.dq;
    } else {
        out.r = multiplicative_order(inst.a, inst.N, options);
    }
    const auto split = two_adic_split(out.r);
    out.alpha = split.alpha;
    out.beta = split.beta;
    return out;
}

struct Convergent {
    u64 numerator = 0;
    u64 denominator = 1;

    friend bool operator==(const Convergent &, const Convergent &) = default;
};

/// Convergents of s/denom in order of strictly increasing denominator. When two
/// successive convergents share a denominator (partial quotient 1 right after the
/// integer part) only the later, closer one is kept.
inline std::vector<Convergent> continued_fraction_convergents(u64 s, u64 denom) {
    if (denom == 0 || s >= denom) {
        throw InvalidArgument("continued_fraction_convergents: need 0 <= s < denom");
    }
    std::vector<Convergent> out;
    // h_{-1} = 1, h_{-2} = 0; k_{-1} = 0, k_{-2} = 1.
    unsigned __int128 h_prev = 1, h_prev2 = 0;
    unsigned __int128 k_prev = 0, k_prev2 = 1;
    u64 num = s;
    u64 den = denom;
    while (true) {
        const u64 quotient = num / den;
        const unsigned __int128 h = quotient * h_prev + h_prev2;
        const unsigned __int128 k = quotient * k_prev + k_prev2;
        const Convergent c{static_cast<u64>(h), static_cast<u64>(k)};
        if (!out.empty() && out.back().denominator == c.denominator) {
            out.back() = c;
        } else {
            out.push_back(c);
        }
        const u64 rem = num % den;
        if (rem == 0) {
            break;
        }
        h_prev2 = h_prev;
        h_prev = h;
        k_prev2 = k_prev;
        k_prev = k;
        num = den;
        den = rem;
    }
    return out;
}

/// Classical post-processing of a period candidate. Returns the factor pair in
/// increasing order, or nothing when the candidate does not split N.
inline std::optional<std::pair<u64, u64>> recover_factors(u64 N, u64 a, u64 r_candidate) {
    if (N < 3 || a <= 1 || a >= N) {
        throw InvalidArgument("recover_factors: need 1 < a < N");
    }
    if (r_candidate == 0 || r_candidate % 2 != 0) {
        return std::nullopt;
    }
    if (mod_pow(a, r_candidate, N) != 1) {
        return std::nullopt;
    }
    const u64 half = mod_pow(a, r_candidate / 2, N);
    if (half == N - 1) {
        return std::nullopt;
    }
    const u64 f1 = std::gcd((half + N - 1) % N, N);
    const u64 f2 = std::gcd((half + 1) % N, N);
    if (f1 <= 1 || f2 <= 1 || f1 >= N || f2 >= N) {
        return std::nullopt;
    }
    return std::minmax(f1, f2);
}

struct CoprimeDraw {
    u64 a = 0;
    /// Nontrivial factors of N found by candidates that shared a factor with N.
    std::vector<u64> lucky_factors;
};

/// Rejection-samples a uniformly from {2, ..., N-1} subject to gcd(a, N) = 1.
template <class Rng> CoprimeDraw random_coprime(u64 N, Rng &rng) {
    if (N < 4) {
        throw InvalidArgument("random_coprime: N too small");
    }
    std::uniform_int_distribution<u64> dist(2, N - 1);
    CoprimeDraw out;
    while (true) {
        const u64 candidate = dist(rng);
        const u64 g = std::gcd(candidate, N);
        if (g == 1) {
            out.a = candidate;
            return out;
        }
        if (g != N && std::find(out.lucky_factors.begin(), out.lucky_factors.end(), g) ==
                          out.lucky_factors.end()) {
            out.lucky_factors.push_back(g);
        }
    }
}

} // namespace shor_mps
