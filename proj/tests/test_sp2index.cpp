#include <doctest.h>

#include "symflow/sp2index.hpp"

using namespace symflow;

namespace {

// Independent oracle for the crossing count: dense grid over (0,1], bisection
// refinement of sign changes of det(Psi(t)-I), crossing-form signs from the
// analytic generator. Kept separate from the library's adaptive algorithm.
int oracle_cz(const std::function<Mat2(double)>& gen) {
    auto c = [&](double t) { return 2.0 - gen(t).trace(); };
    auto S_at = [&](double t) {
        double h = 1e-7;
        double lo = std::max(0.0, t - h), hi = std::min(1.0, t + h);
        Mat2 dPsi = (gen(hi) - gen(lo)) * (1.0 / (hi - lo));
        Mat2 S = (Jmat() * (-1.0)) * (dPsi * gen(t).inverse());
        return Mat2{S.a, 0.5 * (S.b + S.c), 0.5 * (S.b + S.c), S.d};
    };
    auto sig = [](const Mat2& S) {
        double tr = S.trace(), dt = S.det();
        double disc = std::sqrt(std::max(0.0, tr * tr / 4 - dt));
        double l1 = tr / 2 + disc, l2 = tr / 2 - disc;
        int s = 0;
        if (l1 > 1e-10) s++; else if (l1 < -1e-10) s--;
        if (l2 > 1e-10) s++; else if (l2 < -1e-10) s--;
        return s;
    };
    auto contribution = [&](double t0) {
        Mat2 A = gen(t0);
        Mat2 N2 = A - Mat2::identity();
        if (N2.norm() < 1e-6) return sig(S_at(t0));
        Vec2 r1{N2.a, N2.b}, r2{N2.c, N2.d};
        Vec2 row = (r1.norm() > r2.norm()) ? r1 : r2;
        Vec2 v{-row.y, row.x};
        v = v / v.norm();
        Mat2 S = S_at(t0);
        double gamma = v.x * (S.a * v.x + S.b * v.y) +
                       v.y * (S.c * v.x + S.d * v.y);
        return (gamma > 0) ? 1 : (gamma < 0 ? -1 : 0);
    };
    int total = sig(S_at(0.0)) / 2;  // departure from the identity
    const int N = 100000;
    double eps0 = 1e-6;
    std::vector<double> cv(N + 1);
    for (int i = 0; i <= N; ++i) cv[std::size_t(i)] = c(eps0 + (1.0 - eps0) * i / N);
    auto tof = [&](int i) { return eps0 + (1.0 - eps0) * i / N; };
    for (int i = 1; i <= N; ++i) {
        if ((cv[std::size_t(i - 1)] <= 0) != (cv[std::size_t(i)] <= 0)) {
            double lo = tof(i - 1), hi = tof(i), flo = cv[std::size_t(i - 1)];
            for (int it = 0; it < 80; ++it) {
                double m = 0.5 * (lo + hi);
                double fm = c(m);
                if ((flo <= 0) == (fm <= 0)) { lo = m; flo = fm; }
                else hi = m;
            }
            total += contribution(0.5 * (lo + hi));
        }
    }
    // touch zeros: interior local minima of |c| that reach 0 without a sign
    // change (the path returns to the identity)
    for (int i = 1; i < N; ++i) {
        double a = cv[std::size_t(i - 1)], b = cv[std::size_t(i)],
               d = cv[std::size_t(i + 1)];
        if ((a <= 0) != (b <= 0) || (b <= 0) != (d <= 0)) continue;
        if (std::abs(b) >= std::abs(a) || std::abs(b) > std::abs(d)) continue;
        // golden-section style shrink of |c| on [t(i-1), t(i+1)]
        double lo = tof(i - 1), hi = tof(i + 1);
        for (int it = 0; it < 200; ++it) {
            double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
            if (std::abs(c(m1)) < std::abs(c(m2))) hi = m2;
            else lo = m1;
        }
        double t0 = 0.5 * (lo + hi);
        if (std::abs(c(t0)) < 1e-9) total += contribution(t0);
    }
    return total;
}

}  // namespace

TEST_CASE("cz index of the three reference paths") {
    // values frozen from the oracle below
    auto rot03 = [](double t) { return Mat2::rotation(TWO_PI * 0.3 * t); };
    auto hyp = [](double t) { return Mat2{std::exp(t), 0, 0, std::exp(-t)}; };
    auto rot13 = [](double t) { return Mat2::rotation(TWO_PI * 1.3 * t); };
    CHECK(oracle_cz(rot03) == 1);
    CHECK(oracle_cz(hyp) == 0);
    CHECK(oracle_cz(rot13) == 3);

    CHECK(cz_index(SymplecticPath::rotation(TWO_PI * 0.3)) == 1);
    CHECK(cz_index(SymplecticPath::hyperbolic(1.0)) == 0);
    CHECK(cz_index(SymplecticPath::rotation(TWO_PI * 1.3)) == 3);
    CHECK(cz_index(SymplecticPath::rotation(-TWO_PI * 0.3)) == -1);
}

TEST_CASE("degenerate endpoint raises") {
    CHECK_THROWS_AS(cz_index(SymplecticPath::rotation(TWO_PI)),
                    DegenerateEndpoint);
    CHECK_THROWS_AS(cz_index(SymplecticPath::constant_identity()),
                    DegenerateEndpoint);
}

TEST_CASE("mean index reference values") {
    CHECK(mean_index(SymplecticPath::rotation(TWO_PI * 0.3)) ==
          doctest::Approx(0.6).epsilon(1e-9));
    CHECK(mean_index(SymplecticPath::constant_identity()) ==
          doctest::Approx(0.0));
    CHECK(mean_index(SymplecticPath::hyperbolic(1.0)) == doctest::Approx(0.0));
    // cross-validation against the cz(psi^k)/k limit oracle (k chosen so the
    // iterated endpoint stays nondegenerate)
    SymplecticPath p = SymplecticPath::rotation(TWO_PI * 0.3);
    int k = 101;
    double lim = double(cz_index(iterate(p, k))) / k;
    CHECK(std::abs(lim - mean_index(p)) < 0.02);
    SymplecticPath h = SymplecticPath::hyperbolic(0.02);
    CHECK(std::abs(double(cz_index(iterate(h, 100))) / 100.0 -
                   mean_index(h)) < 0.02);
}

TEST_CASE("iterate: composition, identity and mean-index homogeneity") {
    SymplecticPath p = SymplecticPath::rotation(TWO_PI * 0.3);
    CHECK(mean_index(iterate(p, 5)) == doctest::Approx(3.0).epsilon(1e-8));
    SymplecticPath h = SymplecticPath::hyperbolic(1.0);
    SymplecticPath h3 = iterate(h, 3);
    Mat2 end = h3.endpoint();
    CHECK(end.a == doctest::Approx(std::exp(3.0)).epsilon(1e-9));
    CHECK(end.d == doctest::Approx(std::exp(-3.0)).epsilon(1e-9));
    CHECK(mean_index(h3) == doctest::Approx(0.0));
    // k = 1 returns the same path
    SymplecticPath p1 = iterate(p, 1);
    CHECK(p1.endpoint().a == doctest::Approx(p.endpoint().a));
    CHECK_THROWS_AS(iterate(p, 0), InvalidInput);
}

TEST_CASE("iteration formula and nondegenerate gap on random paths") {
    Rng rng(99);
    int nondeg = 0;
    for (int trial = 0; trial < 200; ++trial) {
        double a = uniform(rng, -2.5, 2.5);
        double b = uniform(rng, -1.2, 1.2);
        double c = uniform(rng, -1.0, 1.0);
        auto gen = [=](double t) {
            return Mat2::rotation(a * t) *
                   Mat2{std::exp(b * t), 0, 0, std::exp(-b * t)} *
                   Mat2{1, 0, c * t, 1};
        };
        SymplecticPath p = SymplecticPath::from_generator(gen, 513);
        double dm = mean_index(p);
        for (int k : {2, 3, 5, 7}) {
            double dk = mean_index(iterate(p, k));
            CHECK(std::abs(dk - k * dm) < 1e-6);
        }
        try {
            int cz = cz_index(p);
            CHECK(std::abs(cz - dm) < 1.0);
            nondeg++;
        } catch (const DegenerateEndpoint&) {
        }
    }
    CHECK(nondeg > 150);
}

TEST_CASE("continuity of the mean index under small symplectic perturbation") {
    Rng rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        double a = uniform(rng, -2.0, 2.0);
        double b = uniform(rng, -1.0, 1.0);
        auto gen = [=](double t) {
            return Mat2::rotation(a * t) *
                   Mat2{std::exp(b * t), 0, 0, std::exp(-b * t)};
        };
        SymplecticPath p = SymplecticPath::from_generator(gen, 513);
        double s = uniform(rng, -1e-4, 1e-4);
        auto gen2 = [=](double t) {
            // symplectic perturbation: small shear, scaled by time to keep
            // the path anchored at the identity
            return gen(t) * Mat2{1, 0, s * t, 1};
        };
        SymplecticPath q = SymplecticPath::from_generator(gen2, 513);
        CHECK(std::abs(mean_index(p) - mean_index(q)) < 1e-2);
    }
}

TEST_CASE("refinement stability of cz") {
    SymplecticPath p = SymplecticPath::rotation(TWO_PI * 1.3, 129);
    int base = cz_index(p);
    CHECK(cz_index(p.resampled(257)) == base);
    CHECK(cz_index(p.resampled(513)) == base);
}

TEST_CASE("linearized path at fixed points") {
    // linear center H = (x^2+y^2)/2: flow is rotation by t; T = 1 gives 1/pi
    PlanarFieldRef center{
        [](Vec2 p) { return Vec2{-p.y, p.x}; },
        [](Vec2) { return Mat2{0, -1, 1, 0}; }};
    SymplecticPath p = linearized_path(center, {0, 0}, 1.0);
    CHECK(mean_index(p) == doctest::Approx(1.0 / PI).epsilon(1e-6));

    PlanarFieldRef saddle{
        [](Vec2 p) { return Vec2{-p.x, p.y}; },
        [](Vec2) { return Mat2{-1, 0, 0, 1}; }};
    SymplecticPath q = linearized_path(saddle, {0, 0}, 1.0);
    CHECK(mean_index(q) == doctest::Approx(0.0));

    CHECK_THROWS_AS(linearized_path(center, {0.5, 0}, 1.0), NotAFixedPoint);
}

TEST_CASE("validation of invariants") {
    SymplecticPath p = SymplecticPath::rotation(1.0);
    p.mats[0] = Mat2{1 + 1e-6, 0, 0, 1};
    CHECK_THROWS_AS(p.validate(), InvalidInput);
    SymplecticPath q = SymplecticPath::rotation(1.0);
    q.mats[3] = q.mats[3] * 1.1;  // determinant off
    CHECK_THROWS_AS(q.validate(), InvalidInput);
}

TEST_CASE("csv round trip") {
    SymplecticPath p = SymplecticPath::rotation(TWO_PI * 0.4, 65);
    std::string csv = path_to_csv(p);
    SymplecticPath q = path_from_csv(csv);
    REQUIRE(q.times.size() == p.times.size());
    CHECK((q.endpoint() - p.endpoint()).norm() < 1e-12);
    CHECK(cz_index(q) == cz_index(p));
}
