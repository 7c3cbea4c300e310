#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symflow/exact.hpp"

namespace symflow {

// Truncated element of the Novikov field: finitely many terms
// c * t^e with exact rational c and exact real exponent e, sorted by strictly
// decreasing exponent, all exponents above the floor.
class NovikovSeries {
  public:
    struct Term {
        ExactReal exponent;
        Rat coeff;
    };

    NovikovSeries() = default;
    explicit NovikovSeries(double floor) : floor_(floor) {}

    static NovikovSeries zero(double floor) { return NovikovSeries(floor); }
    static NovikovSeries one(double floor) {
        return monomial(Rat(1), ExactReal(Rat(0)), floor);
    }
    static NovikovSeries monomial(const Rat& c, const ExactReal& e, double floor);

    double floor_cutoff() const { return floor_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    const Term& leading() const;

    NovikovSeries operator+(const NovikovSeries& o) const;
    NovikovSeries operator-(const NovikovSeries& o) const;
    NovikovSeries operator-() const;
    NovikovSeries operator*(const NovikovSeries& o) const;

    // multiplicative inverse, truncated at the floor (geometric expansion)
    NovikovSeries inverse() const;

    NovikovSeries with_floor(double floor) const;

    std::string str() const;  // human readable "c1*t^{e1} + ..."

    // insert-by-merge; drops zero coefficients and below-floor terms
    void add_term(const ExactReal& e, const Rat& c);

  private:
    std::vector<Term> terms_;  // strictly decreasing exponents
    double floor_ = -1e9;
};

// values of the period homomorphism on the standard homology basis
struct PeriodVector {
    int genus = 1;
    std::vector<ExactReal> periods;  // length 2g: (a1, b1, ..., ag, bg)

    void validate() const;
    bool is_zero() const;
    double max_abs() const;
    // scale by an exact value; throws InvalidInput if not representable
    PeriodVector scaled(const ExactReal& c) const;
};

struct NovikovMatrix {
    int rows = 0, cols = 0;
    std::vector<NovikovSeries> entries;  // row-major

    NovikovMatrix() = default;
    NovikovMatrix(int r, int c, double floor)
        : rows(r), cols(c), entries(static_cast<std::size_t>(r) * c,
                                    NovikovSeries(floor)) {}
    NovikovSeries& at(int r, int c) { return entries[static_cast<std::size_t>(r) * cols + c]; }
    const NovikovSeries& at(int r, int c) const {
        return entries[static_cast<std::size_t>(r) * cols + c];
    }
    NovikovMatrix operator*(const NovikovMatrix& o) const;

    // rank over the Novikov field by Gaussian elimination, pivoting on the
    // entry with the greatest leading exponent
    int rank() const;
};

struct HomologyRanks {
    std::vector<int> ranks;  // degrees 0..2
    int euler = 0;
};

// boundary operators of the one-vertex CW model of the genus-g surface,
// with coefficients twisted by the period vector
struct CellularComplex {
    NovikovMatrix d2;  // 2g x 1
    NovikovMatrix d1;  // 1 x 2g
};

CellularComplex cellular_complex(const PeriodVector& w, double floor);

// default floor from the spec: -50 (max|period| + 1)
double default_floor(const PeriodVector& w);

HomologyRanks novikov_ranks(const PeriodVector& w,
                            std::optional<double> floor = std::nullopt);

int euler_number(const PeriodVector& w);

}  // namespace symflow
