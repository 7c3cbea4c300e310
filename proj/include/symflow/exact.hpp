#pragma once

#include <array>
#include <optional>
#include <string>

#include <gmpxx.h>

#include "symflow/core.hpp"

namespace symflow {

using Rat = mpq_class;

// Exact real number: a Q-linear combination over the basis {1, s2, s3, s5, pi}
// with s_k = sqrt(k). Equality is exact (vector equality); ordering uses an
// 80-bit numeric witness, which suffices because the basis is linearly
// independent over Q and the artifact's coefficients stay small.
class ExactReal {
  public:
    static constexpr int kDim = 5;
    enum Symbol { kOne = 0, kSqrt2 = 1, kSqrt3 = 2, kSqrt5 = 3, kPi = 4 };

    ExactReal() = default;
    explicit ExactReal(const Rat& r) { c_[kOne] = r; }
    ExactReal(long num, long den) { c_[kOne] = Rat(num, den); }

    static ExactReal symbol(Symbol s, const Rat& coeff = Rat(1)) {
        ExactReal e;
        e.c_[s] = coeff;
        return e;
    }
    static ExactReal sqrt2() { return symbol(kSqrt2); }
    static ExactReal sqrt3() { return symbol(kSqrt3); }
    static ExactReal sqrt5() { return symbol(kSqrt5); }
    static ExactReal pi() { return symbol(kPi); }
    static ExactReal golden_ratio() {  // (1 + sqrt 5)/2
        ExactReal e;
        e.c_[kOne] = Rat(1, 2);
        e.c_[kSqrt5] = Rat(1, 2);
        return e;
    }

    const Rat& coeff(int i) const { return c_[i]; }
    Rat& coeff(int i) { return c_[i]; }

    bool is_zero() const {
        for (const auto& q : c_)
            if (q != 0) return false;
        return true;
    }
    bool is_rational() const {
        for (int i = 1; i < kDim; ++i)
            if (c_[i] != 0) return false;
        return true;
    }

    ExactReal operator+(const ExactReal& o) const {
        ExactReal r;
        for (int i = 0; i < kDim; ++i) r.c_[i] = c_[i] + o.c_[i];
        return r;
    }
    ExactReal operator-(const ExactReal& o) const {
        ExactReal r;
        for (int i = 0; i < kDim; ++i) r.c_[i] = c_[i] - o.c_[i];
        return r;
    }
    ExactReal operator-() const {
        ExactReal r;
        for (int i = 0; i < kDim; ++i) r.c_[i] = -c_[i];
        return r;
    }
    ExactReal scaled(const Rat& q) const {
        ExactReal r;
        for (int i = 0; i < kDim; ++i) r.c_[i] = c_[i] * q;
        return r;
    }

    // Product, when it stays inside the representable set: one factor rational,
    // or a single sqrt symbol times a combination that avoids mixed radicals.
    std::optional<ExactReal> try_mul(const ExactReal& o) const;

    bool operator==(const ExactReal& o) const {
        for (int i = 0; i < kDim; ++i)
            if (c_[i] != o.c_[i]) return false;
        return true;
    }
    bool operator!=(const ExactReal& o) const { return !(*this == o); }

    long double witness() const {
        static const long double val[kDim] = {
            1.0L, 1.41421356237309504880168872420969808L,
            1.73205080756887729352744634150587237L,
            2.23606797749978969640917366873127624L,
            3.14159265358979323846264338327950288L};
        long double w = 0;
        for (int i = 0; i < kDim; ++i)
            w += static_cast<long double>(c_[i].get_d()) * val[i];
        return w;
    }
    double approx() const { return static_cast<double>(witness()); }

    // total order: exact-equality first, then the numeric witness
    bool operator<(const ExactReal& o) const {
        if (*this == o) return false;
        return witness() < o.witness();
    }
    bool operator>(const ExactReal& o) const { return o < *this; }

    std::string str() const;

    // parse tokens like "1", "-3/2", "sqrt2", "pi", "2*sqrt3", "1/2*pi"
    static ExactReal parse(const std::string& token);

  private:
    std::array<Rat, kDim> c_{Rat(0), Rat(0), Rat(0), Rat(0), Rat(0)};
};

}  // namespace symflow
