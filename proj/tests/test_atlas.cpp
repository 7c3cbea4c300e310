#include <doctest.h>

#include <set>

#include "symflow/atlas.hpp"

using namespace symflow;

TEST_CASE("monotone spline hits its knots exactly and stays C1-smooth") {
    SplineC3 s = SplineC3::through({-1.0, -0.3, 0.4, 1.0},
                                   {-PI / 2, 0.0, PI, 3 * PI / 2});
    CHECK(s(-1.0) == doctest::Approx(-PI / 2));
    CHECK(s(-0.3) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(s(0.4) == doctest::Approx(PI).epsilon(1e-14));
    CHECK(s(1.0) == doctest::Approx(3 * PI / 2));
    // derivative continuity across a window edge
    for (double x : {-0.5, -0.25, 0.1, 0.55}) {
        double j1[4], j2[4];
        s.eval(x - 1e-9, j1);
        s.eval(x + 1e-9, j2);
        CHECK(std::abs(j1[1] - j2[1]) < 1e-5);
    }
    // inverse
    for (double th : {-1.0, 0.3, 2.0, 4.0})
        CHECK(s(s.inverse(th)) == doctest::Approx(th).epsilon(1e-10));
    CHECK_THROWS_AS(SplineC3::through({0, 1}, {1, 0}), GeometryViolation);
}

TEST_CASE("D geometry: combinatorics for g = 2, 3, 4") {
    for (int g : {2, 3, 4}) {
        PlanarHamiltonian core(g, Variant::pure);
        GeometryParams gp;
        std::vector<double> speeds(static_cast<std::size_t>(g), 1.0);
        auto geo = make_d_geometry(core, gp, speeds);
        CHECK(geo->l == 4 * g - 4);
        int seams = 0, circles = 0;
        std::set<int> circle_ids;
        for (const auto& s : geo->sides) {
            if (s.role == SideGeom::Seam) {
                seams++;
                // partner tables from the construction
                int j = s.label;
                int expect = (j >= 1 && j <= g - 2) ? 2 * g - 2 - j
                             : (j >= g && j <= 2 * g - 3) ? 2 * g - 2 - j
                             : (j >= 2 * g - 2 && j <= 3 * g - 4)
                                 ? 6 * g - 6 - j
                                 : 6 * g - 6 - j;
                CHECK(s.partner_label == expect);
            } else {
                circles++;
                circle_ids.insert(s.circle_index);
            }
        }
        CHECK(seams == 2 * (g - 1));
        CHECK(circles == 2 * g - 2);
        CHECK(static_cast<int>(circle_ids.size()) == g);
        // mirror symmetry of the polygon
        for (const auto& s : geo->sides) {
            bool found = false;
            for (const auto& o : geo->sides) {
                if (std::abs(o.A.x - s.B.x) < 1e-9 &&
                    std::abs(o.A.y + s.B.y) < 1e-9 &&
                    std::abs(o.B.x - s.A.x) < 1e-9 &&
                    std::abs(o.B.y + s.A.y) < 1e-9) {
                    found = true;
                    break;
                }
            }
            CHECK(found);
        }
    }
    // g=2 has the expected rectangle with the vertex condition: the D''
    // corners lie on the lines x = +- y / sqrt(3)
    PlanarHamiltonian core2(2, Variant::pure);
    GeometryParams gp;
    auto geo2 = make_d_geometry(core2, gp, {1.0, 1.0});
    const SideGeom& right = geo2->by_label(1);
    CHECK(right.role == SideGeom::Circle);
    CHECK(right.n_out.x == doctest::Approx(1.0));
    double b = right.offset;
    CHECK(b == doctest::Approx(gp.R2 * 0.5));
    const SideGeom& top = geo2->by_label(2);
    CHECK(top.role == SideGeom::Seam);
    CHECK(top.e2 == doctest::Approx(gp.R2 * std::sqrt(3.0) / 2));
    CHECK(top.e2 == doctest::Approx(std::sqrt(3.0) * b));
}

TEST_CASE("interpolated field: exact inside D'', linear outside D'") {
    PlanarHamiltonian H(2, Variant::pure);
    GeometryParams gp;
    BlendedField hhat = interpolated_field(H, BlendStage::Hhat, gp);
    const DGeometry& G = hhat.geom();

    // interior of D'': the blend equals the core exactly
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        Vec2 p{uniform(rng, -0.3, 0.3), uniform(rng, -0.5, 0.5)};
        CHECK(hhat.value(p) == doctest::Approx(H.value_at(p)).epsilon(1e-14));
    }

    // outside D' near a seam side: equals the side's linear form exactly
    const SideGeom& top = G.by_label(2);
    for (int i = 0; i < 50; ++i) {
        double w = uniform(rng, top.w0 * 0.5, top.w1 * 0.5);
        double dn = uniform(rng, top.e1 * 1.01, top.offset * 0.999);
        Vec2 p = top.n_out * dn + top.t_hat * w;
        double ell = top.kappa * dot(p, top.n_ray);
        CHECK(hhat.value(p) == doctest::Approx(ell).epsilon(1e-12));
    }

    // no new zeros in the blend bands: the only zero of the full field in the
    // polygon is the origin (checked over the bounding box)
    BlendedField full = interpolated_field(H, BlendStage::Full, gp);
    auto zs = find_zeros(full.handle(), G.bounding_box(), 1e-8, 36);
    int inside = 0;
    for (const auto& z : zs)
        if (G.boundary_gap(z.location) < -1e-6) {
            inside++;
            CHECK(z.location.norm() < 1e-6);
        }
    CHECK(inside == 1);
}

TEST_CASE("build_surface: reference atlases and their invariants") {
    for (int g : {2, 3}) {
        for (Variant v : {Variant::pure, Variant::linear_perturbed}) {
            AtlasParams ap;
            ap.genus = g;
            ap.variant = v;
            ChartAtlas atlas = build_surface(ap);
            CHECK(static_cast<int>(atlas.tori.size()) == g);
            CHECK(static_cast<int>(atlas.tubes.size()) == g);
            std::size_t nz = (v == Variant::pure)
                                 ? 1u
                                 : static_cast<std::size_t>(2 * g - 2);
            CHECK(atlas.core_zeros.size() == nz);
            AtlasValidation val = validate_atlas(atlas);
            CHECK(val.pairing_tables_ok);
            CHECK(val.edges_matched);
            CHECK(val.euler_characteristic == 2 - 2 * g);
            CHECK(val.max_transition_det_error < 1e-10);
            CHECK(val.max_field_mismatch < 1e-9);
            CHECK(val.ok);
        }
    }
    // g=3 pairing list from the construction: s1~s3 and s5~s7
    AtlasParams ap3;
    ap3.genus = 3;
    ChartAtlas a3 = build_surface(ap3);
    std::set<std::pair<int, int>> seams;
    for (const auto& p : a3.pairings)
        if (p.kind == "seam") seams.insert({std::min(p.a, p.b), std::max(p.a, p.b)});
    CHECK(seams == std::set<std::pair<int, int>>{{1, 3}, {5, 7}});
}

TEST_CASE("build_surface rejects rational slopes unless overridden") {
    AtlasParams ap;
    ap.genus = 2;
    ap.slopes.assign(2, ExactReal(1, 2));
    CHECK_THROWS_AS(build_surface(ap), GeometryViolation);
    ap.allow_rational_slopes = true;
    ChartAtlas atlas = build_surface(ap);
    CHECK(atlas.tori[0].v == doctest::Approx(0.5));
}

TEST_CASE("blow-up gluing: exact pieces, positivity, symplectic checks") {
    BlowupGluing bg = make_blowup_gluing(0.1);
    // exact pieces
    CHECK(bg.f(0.1) == doctest::Approx(0.005));
    CHECK(bg.f(0.105) == doctest::Approx(0.105 * 0.105 / 2));
    CHECK(bg.f(0.2) == doctest::Approx(0.2));
    CHECK(bg.f(0.195) == doctest::Approx(0.195));
    // monotone with positive density
    for (int i = 0; i <= 1000; ++i) {
        double rho = 0.005 + (0.2 - 0.005) * i / 1000.0;
        CHECK(bg.hval(rho) > 0);
    }
    std::vector<FixedPointRecord> none;
    BlowupChart ch = blowup_chart(none, {0, 0}, 0.1);
    CHECK(ch.inner_det_error(1000) < 1e-10);
    CHECK(ch.band_det_error(1000) < 1e-10);

    // crowded disc raises
    FixedPointRecord other;
    other.location = {0.15, 0};
    CHECK_THROWS_AS(blowup_chart({other}, {0, 0}, 0.1), CrowdedDisc);

    // boundary circle map of a linear field
    Mat2 A{2, 0, 0, 0.5};
    double th = circle_direction_map(A, PI / 4);
    Vec2 img{2 * std::cos(PI / 4), 0.5 * std::sin(PI / 4)};
    CHECK(th == doctest::Approx(std::atan2(img.y, img.x)));
}

TEST_CASE("glue_F: branches, C1 regularity, C2 counterexample") {
    // H = x^2 - y^2 glues to 2 rho cos(2 theta) on both sides
    GluedF q = glue_F([](double x, double y) { return x * x - y * y; });
    for (double rho : {0.3, -0.3, 0.01, -0.01})
        for (double th : {0.0, 0.7, 2.0})
            CHECK(q(rho, th) == doctest::Approx(2 * rho * std::cos(2 * th)));
    C1Report rq = check_glue_regularity(q);
    CHECK(rq.c1_ok);
    CHECK(rq.c2_bounded);

    // H identically zero
    GluedF z = glue_F([](double, double) { return 0.0; });
    CHECK(z(0.5, 1.0) == 0.0);
    CHECK(z(-0.5, 1.0) == 0.0);

    // the cubic counterexample: F = (2 rho)^{3/2} cos theta for rho > 0
    GluedF bad = glue_F([](double x, double y) { return x * (x * x + y * y); });
    for (double rho : {0.2, 0.05})
        for (double th : {0.0, 1.0})
            CHECK(bad(rho, th) ==
                  doctest::Approx(std::pow(2 * rho, 1.5) * std::cos(th)));
    C1Report rb = check_glue_regularity(bad);
    CHECK(rb.c1_ok);        // C1 holds
    CHECK(!rb.c2_bounded);  // second rho-derivative diverges

    CHECK_THROWS_AS(glue_F([](double, double) { return 1.0; }),
                    NotVanishingAtOrigin);
}

TEST_CASE("C1 gluing holds for random polynomials vanishing at 0") {
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        double a1 = uniform(rng, -1, 1), a2 = uniform(rng, -1, 1);
        double b1 = uniform(rng, -1, 1), b2 = uniform(rng, -1, 1),
               b3 = uniform(rng, -1, 1), c3 = uniform(rng, -1, 1);
        GluedF F = glue_F([=](double x, double y) {
            return a1 * x + a2 * y + b1 * x * x + b2 * x * y + b3 * y * y +
                   c3 * y * y * x;
        });
        C1Report r = check_glue_regularity(F);
        CHECK(r.c1_ok);
    }
}
