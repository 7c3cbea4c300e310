#include <doctest.h>

#include "symflow/novikov.hpp"

using namespace symflow;

namespace {

NovikovSeries mono(long num, long den, const ExactReal& e, double floor) {
    Rat q(num, den);
    q.canonicalize();
    return NovikovSeries::monomial(q, e, floor);
}

ExactReal er(long n) { return ExactReal(Rat(n)); }

}  // namespace

TEST_CASE("exact reals: arithmetic, parsing, ordering") {
    ExactReal a = ExactReal::sqrt2();
    ExactReal b = ExactReal::parse("sqrt2");
    CHECK(a == b);
    CHECK(ExactReal::parse("-3/2").approx() == doctest::Approx(-1.5));
    CHECK(ExactReal::parse("2*pi").approx() == doctest::Approx(TWO_PI));
    CHECK(ExactReal::parse("phi").approx() == doctest::Approx(1.6180339887));
    CHECK(ExactReal::parse("0.1").approx() == doctest::Approx(0.1));
    CHECK((a + a).approx() == doctest::Approx(2 * std::sqrt(2.0)));
    CHECK((a - a).is_zero());
    CHECK(er(1) < ExactReal::sqrt2());
    CHECK(ExactReal::sqrt2() < ExactReal::sqrt3());
    // sqrt2 * sqrt2 = 2 exactly
    auto p = a.try_mul(a);
    REQUIRE(p.has_value());
    CHECK(*p == er(2));
    // mixed radicals are not representable
    CHECK(!ExactReal::sqrt2().try_mul(ExactReal::sqrt3()).has_value());
    // golden ratio satisfies phi^2 = phi + 1
    ExactReal phi = ExactReal::golden_ratio();
    auto phi2 = phi.try_mul(phi);
    REQUIRE(phi2.has_value());
    CHECK(*phi2 == phi + er(1));
}

TEST_CASE("series arithmetic: identities and the geometric-series inverse") {
    double floor = -60;
    NovikovSeries one = NovikovSeries::one(floor);
    CHECK((one * one).str() == "1");

    // (t^1 - 1) + (1 - t^1) = 0
    NovikovSeries a = mono(1, 1, er(1), floor) + mono(-1, 1, er(0), floor);
    NovikovSeries b = mono(1, 1, er(0), floor) + mono(-1, 1, er(1), floor);
    CHECK((a + b).is_zero());

    // invert(t^sqrt2 - 1): geometric series -1 - t^{-sqrt2} - t^{-2 sqrt2} ...
    ExactReal s2 = ExactReal::sqrt2();
    NovikovSeries f = mono(1, 1, s2, floor) + mono(-1, 1, er(0), floor);
    NovikovSeries inv = f.inverse();
    // leading exponent of the inverse is minus the leading exponent
    CHECK(inv.leading().exponent == -s2);
    // all coefficients along the geometric tail are -1... after scaling:
    // 1/(t^a - 1) = t^{-a} * 1/(1 - t^{-a}) = t^{-a} + t^{-2a} + ...
    for (const auto& term : inv.terms()) CHECK(term.coeff == Rat(1));
    // product check above the floor
    NovikovSeries prod = f * inv;
    REQUIRE(!prod.is_zero());
    CHECK(prod.leading().exponent == er(0));
    CHECK(prod.leading().coeff == Rat(1));
    for (std::size_t i = 1; i < prod.terms().size(); ++i)
        CHECK(prod.terms()[i].exponent.approx() < floor + 2 * std::sqrt(2.0));

    CHECK_THROWS_AS(NovikovSeries::zero(floor).inverse(), ZeroDivision);
}

TEST_CASE("field axioms at the floor on random small series") {
    Rng rng(5);
    double floor = -40;
    auto random_series = [&](int maxterms) {
        NovikovSeries s(floor);
        int n = 1 + int(uniform(rng, 0, maxterms));
        for (int i = 0; i < n; ++i) {
            long num = long(uniform(rng, -4, 5));
            if (num == 0) num = 1;
            long den = 1 + long(uniform(rng, 0, 3));
            int pick = int(uniform(rng, 0, 3));
            ExactReal e = (pick == 0) ? er(long(uniform(rng, -3, 4)))
                          : (pick == 1)
                              ? ExactReal::symbol(ExactReal::kSqrt2,
                                                  Rat(long(uniform(rng, -2, 3))))
                              : ExactReal::symbol(ExactReal::kSqrt3,
                                                  Rat(long(uniform(rng, -2, 3))));
            Rat q(num, den);
            q.canonicalize();
            s.add_term(e, q);
        }
        return s;
    };
    for (int trial = 0; trial < 100; ++trial) {
        NovikovSeries a = random_series(3);
        NovikovSeries b = random_series(3);
        NovikovSeries c = random_series(3);
        // distributivity is exact
        NovikovSeries lhs = (a + b) * c;
        NovikovSeries rhs = a * c + b * c;
        CHECK((lhs - rhs).is_zero());
        if (!a.is_zero()) {
            NovikovSeries p = a * a.inverse();
            REQUIRE(!p.is_zero());
            CHECK(p.leading().coeff == Rat(1));
            CHECK(p.leading().exponent == er(0));
            // everything below the unit is truncation noise near the floor
            if (p.terms().size() > 1)
                CHECK(p.terms()[1].exponent.approx() < floor / 2);
        }
    }
}

TEST_CASE("cellular complex: closed forms and d1 d2 = 0") {
    double floor = -80;
    // g=1, periods (1, sqrt2)
    PeriodVector w{1, {er(1), ExactReal::sqrt2()}};
    CellularComplex c = cellular_complex(w, floor);
    CHECK(c.d1.rows == 1);
    CHECK(c.d1.cols == 2);
    CHECK(c.d2.rows == 2);
    CHECK(c.d1.at(0, 0).str() == "t^{1} - 1");
    CHECK(c.d2.at(0, 0).str() == "1 - t^{sqrt2}");
    CHECK(c.d2.at(1, 0).str() == "t^{1} - 1");
    NovikovMatrix prod = c.d1 * c.d2;
    CHECK(prod.at(0, 0).is_zero());

    // g=2, all periods zero: both boundary maps vanish identically
    PeriodVector z{2, {er(0), er(0), er(0), er(0)}};
    CellularComplex cz = cellular_complex(z, floor);
    for (int i = 0; i < 4; ++i) {
        CHECK(cz.d1.at(0, i).is_zero());
        CHECK(cz.d2.at(i, 0).is_zero());
    }

    // g=2, periods (1,0,0,0)
    PeriodVector w2{2, {er(1), er(0), er(0), er(0)}};
    CellularComplex c2 = cellular_complex(w2, floor);
    CHECK(c2.d1.at(0, 0).str() == "t^{1} - 1");
    CHECK(c2.d1.at(0, 1).is_zero());
    CHECK(c2.d2.at(0, 0).is_zero());          // 1 - t^0 = 0
    CHECK(c2.d2.at(1, 0).str() == "t^{1} - 1");
    CHECK((c2.d1 * c2.d2).at(0, 0).is_zero());
}

TEST_CASE("d1 d2 = 0 for random period vectors") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        int g = 1 + int(uniform(rng, 0, 3));
        PeriodVector w;
        w.genus = g;
        for (int i = 0; i < 2 * g; ++i) {
            int pick = int(uniform(rng, 0, 4));
            Rat q(long(uniform(rng, -3, 4)), 1 + long(uniform(rng, 0, 2)));
            q.canonicalize();
            switch (pick) {
                case 0: w.periods.push_back(ExactReal(q)); break;
                case 1: w.periods.push_back(ExactReal::symbol(ExactReal::kSqrt2, q)); break;
                case 2: w.periods.push_back(ExactReal::symbol(ExactReal::kSqrt3, q)); break;
                default: w.periods.push_back(ExactReal::symbol(ExactReal::kPi, q)); break;
            }
        }
        CellularComplex c = cellular_complex(w, default_floor(w));
        CHECK((c.d1 * c.d2).at(0, 0).is_zero());
    }
}

TEST_CASE("novikov ranks: reference cases") {
    // g=2, periods (1, sqrt2, 0, 0) -> (0, 2, 0)
    PeriodVector a{2, {er(1), ExactReal::sqrt2(), er(0), er(0)}};
    HomologyRanks ha = novikov_ranks(a);
    CHECK(ha.ranks == std::vector<int>{0, 2, 0});
    CHECK(ha.euler == -2);

    // g=3, periods (pi, 1, 0, 0, 0, 0) -> (0, 4, 0)
    PeriodVector b{3, {ExactReal::pi(), er(1), er(0), er(0), er(0), er(0)}};
    HomologyRanks hb = novikov_ranks(b);
    CHECK(hb.ranks == std::vector<int>{0, 4, 0});

    // g=2 exact case -> singular homology (1, 4, 1)
    PeriodVector z{2, {er(0), er(0), er(0), er(0)}};
    HomologyRanks hz = novikov_ranks(z);
    CHECK(hz.ranks == std::vector<int>{1, 4, 1});
    CHECK(hz.euler == -2);
}

TEST_CASE("euler number is 2-2g regardless of the periods") {
    PeriodVector a{2, {ExactReal::sqrt3(), er(2), er(0), ExactReal::pi()}};
    CHECK(euler_number(a) == -2);
    PeriodVector t{1, {er(1), ExactReal::sqrt2()}};
    CHECK(euler_number(t) == 0);
    PeriodVector g5;
    g5.genus = 5;
    g5.periods.assign(10, er(0));
    g5.periods[0] = er(1);
    CHECK(euler_number(g5) == -8);
}

TEST_CASE("vanishing in degrees 0 and 2 for nonzero periods") {
    Rng rng(23);
    for (int trial = 0; trial < 60; ++trial) {
        int g = 1 + int(uniform(rng, 0, 4));
        PeriodVector w;
        w.genus = g;
        for (int i = 0; i < 2 * g; ++i) {
            Rat q(long(uniform(rng, -5, 6)), 1 + long(uniform(rng, 0, 3)));
            q.canonicalize();
            int pick = int(uniform(rng, 0, 3));
            ExactReal e = pick == 0 ? ExactReal(q)
                          : pick == 1
                              ? ExactReal::symbol(ExactReal::kSqrt2, q)
                              : ExactReal::symbol(ExactReal::kPi, q);
            w.periods.push_back(e);
        }
        bool zero = w.is_zero();
        HomologyRanks h = novikov_ranks(w);
        if (!zero) {
            CHECK(h.ranks[0] == 0);
            CHECK(h.ranks[2] == 0);
        }
        CHECK(h.euler == 2 - 2 * g);
    }
}

TEST_CASE("rank stability under scaling of the period class") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        int g = 1 + int(uniform(rng, 0, 3));
        PeriodVector w;
        w.genus = g;
        // rational periods so irrational scalars stay representable
        for (int i = 0; i < 2 * g; ++i) {
            Rat q(long(uniform(rng, -4, 5)), 1 + long(uniform(rng, 0, 3)));
            q.canonicalize();
            w.periods.push_back(ExactReal(q));
        }
        if (w.is_zero()) w.periods[0] = er(1);
        HomologyRanks base = novikov_ranks(w);
        std::vector<ExactReal> scalars{er(2), ExactReal(Rat(-3, 2)),
                                       ExactReal::sqrt2(), ExactReal::sqrt3(),
                                       ExactReal::golden_ratio()};
        for (const auto& c : scalars) {
            HomologyRanks h = novikov_ranks(w.scaled(c));
            CHECK(h.ranks == base.ranks);
        }
    }
}

TEST_CASE("series printing") {
    double floor = -20;
    NovikovSeries s = mono(3, 2, ExactReal::sqrt2(), floor) +
                      mono(-1, 1, er(0), floor);
    CHECK(s.str() == "3/2*t^{sqrt2} - 1");
}
