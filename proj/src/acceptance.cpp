#include "symflow/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "symflow/dynamics.hpp"
#include "symflow/novikov.hpp"

namespace symflow {

namespace {

using Clock = std::chrono::steady_clock;

struct Runner {
    AcceptanceReport rep;
    std::ostream* out;

    void add(ClaimResult c, double secs) {
        c.seconds = secs;
        if (out) {
            (*out) << (c.pass ? "PASS" : "FAIL") << "  " << c.id << "  ["
                   << c.anchor << "]  computed=" << c.computed
                   << " expected=" << c.expected << "  (" << c.seconds << " s)"
                   << std::endl;
        }
        rep.claims.push_back(std::move(c));
    }

    template <class F>
    void claim(const std::string& id, const std::string& anchor, F&& body) {
        auto t0 = Clock::now();
        ClaimResult c;
        c.id = id;
        c.anchor = anchor;
        try {
            body(c);
        } catch (const std::exception& e) {
            c.pass = false;
            c.computed = std::string("exception: ") + e.what();
        }
        double secs =
            std::chrono::duration<double>(Clock::now() - t0).count();
        add(std::move(c), secs);
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

// random nondegenerate symplectic paths for the index-property suite
SymplecticPath random_path(Rng& rng) {
    // product of rotations and shears with smooth time profiles
    double a = uniform(rng, -2.5, 2.5);
    double b = uniform(rng, -1.2, 1.2);
    double c = uniform(rng, -1.2, 1.2);
    double w = uniform(rng, 0.5, 3.0);
    auto gen = [=](double t) {
        Mat2 R = Mat2::rotation(a * t);
        Mat2 S1{std::exp(b * std::sin(w * t) * t), 0, 0,
                std::exp(-b * std::sin(w * t) * t)};
        Mat2 S2{1, 0, c * t, 1};
        return R * S1 * S2;
    };
    return SymplecticPath::from_generator(gen, 513);
}

ExactReal random_period_entry(Rng& rng) {
    int kind = static_cast<int>(uniform(rng, 0.0, 4.0));
    long num = static_cast<long>(uniform(rng, -6.0, 7.0));
    long den = 1 + static_cast<long>(uniform(rng, 0.0, 4.0));
    Rat q(num, den);
    q.canonicalize();
    switch (kind) {
        case 0: return ExactReal(q);
        case 1: return ExactReal::symbol(ExactReal::kSqrt2, q);
        case 2: return ExactReal::symbol(ExactReal::kSqrt3, q);
        default: return ExactReal::symbol(ExactReal::kPi, q);
    }
}

}  // namespace

AcceptanceReport run_acceptance(std::uint64_t seed, std::ostream* progress,
                                bool quick) {
    Runner R;
    R.out = progress;
    R.rep.seed = seed;

    // 1. index formula at the origin of the pure local Hamiltonian
    R.claim("index_formula", "rmk:index_hyperbolicregion", [&](ClaimResult& c) {
        std::ostringstream comp, expe;
        bool ok = true;
        for (int g : {2, 3, 4}) {
            PlanarHamiltonian H(g, Variant::pure);
            int wi = winding_index(H, {0, 0}, 0.5);
            int hr = hyperbolic_regions(H, {0, 0}, 0.5);
            comp << "g" << g << ":(" << wi << "," << hr << ") ";
            expe << "g" << g << ":(" << 2 - 2 * g << "," << 4 * g - 2 << ") ";
            ok = ok && wi == 2 - 2 * g && hr == 4 * g - 2;
        }
        c.computed = comp.str();
        c.expected = expe.str();
        c.tolerance = 0;
        c.pass = ok;
    });

    // 2. saddle splitting for the linear perturbation
    R.claim("saddle_splitting", "thm:2g-2_fx_pts", [&](ClaimResult& c) {
        std::ostringstream comp, expe;
        bool ok = true;
        for (int g : {2, 3, 4}) {
            PlanarHamiltonian H(g, Variant::linear_perturbed, 0.1);
            auto zs = find_zeros(H, {-2, 2, -2, 2}, 1e-10);
            bool all_saddles = true;
            for (const auto& z : zs)
                all_saddles = all_saddles && z.nondegenerate &&
                              z.lefschetz_index == -1;
            comp << "g" << g << ":" << zs.size()
                 << (all_saddles ? "s" : "!") << " ";
            expe << "g" << g << ":" << 2 * g - 2 << "s ";
            ok = ok && static_cast<int>(zs.size()) == 2 * g - 2 && all_saddles;
        }
        c.computed = comp.str();
        c.expected = expe.str();
        c.pass = ok;
    });

    // 3. partition (1,1,2) for genus 3
    R.claim("partition_112", "eqn:H_3^0_k3", [&](ClaimResult& c) {
        PlanarHamiltonian H(3, Variant::cubic_perturbed, 0.1);
        auto zs = find_zeros(H, {-2, 2, -2, 2}, 1e-10);
        std::vector<int> idx;
        for (const auto& z : zs) idx.push_back(z.lefschetz_index);
        std::sort(idx.begin(), idx.end());
        std::ostringstream comp;
        for (int i : idx) comp << i << " ";
        c.computed = comp.str();
        c.expected = "-2 -1 -1 ";
        c.pass = (idx == std::vector<int>{-2, -1, -1});
    });

    // 4. Poincare-Hopf audit on the built atlases
    R.claim("poincare_hopf_audit", "eqn:Lefschetz_indices", [&](ClaimResult& c) {
        std::ostringstream comp, expe;
        bool ok = true;
        for (int g : {2, 3}) {
            for (Variant v : {Variant::pure, Variant::linear_perturbed}) {
                AtlasParams ap;
                ap.genus = g;
                ap.variant = v;
                ChartAtlas atlas = build_surface(ap);
                IndexAudit audit = index_audit(atlas);
                comp << "g" << g << variant_name(v)[0] << ":" << audit.sum
                     << "(" << audit.records.size() << ") ";
                expe << "g" << g << variant_name(v)[0] << ":" << 2 - 2 * g
                     << " ";
                ok = ok && audit.sum == 2 - 2 * g;
                std::size_t nexp = (v == Variant::pure)
                                       ? 1u
                                       : static_cast<std::size_t>(2 * g - 2);
                ok = ok && audit.records.size() == nexp;
            }
        }
        c.computed = comp.str();
        c.expected = expe.str();
        c.pass = ok;
    });

    // 5. Novikov ranks
    R.claim("novikov_ranks", "cor:HNranksurfaces", [&](ClaimResult& c) {
        Rng rng(seed + 5);
        bool ok = true;
        int cases = 0;
        for (int g : {1, 2, 3, 5}) {
            for (int trial = 0; trial < 20; ++trial) {
                PeriodVector w;
                w.genus = g;
                bool nonzero = false;
                for (int i = 0; i < 2 * g; ++i) {
                    ExactReal e = random_period_entry(rng);
                    nonzero = nonzero || !e.is_zero();
                    w.periods.push_back(e);
                }
                if (!nonzero) w.periods[0] = ExactReal::sqrt2();
                HomologyRanks hr = novikov_ranks(w);
                ok = ok && hr.ranks == std::vector<int>{0, 2 * g - 2, 0} &&
                     hr.euler == 2 - 2 * g;
                cases++;
            }
            PeriodVector z;
            z.genus = g;
            z.periods.assign(static_cast<std::size_t>(2 * g), ExactReal());
            HomologyRanks hz = novikov_ranks(z);
            ok = ok && hz.ranks == std::vector<int>{1, 2 * g, 1} &&
                 hz.euler == 2 - 2 * g;
            cases++;
        }
        c.computed = "checked " + std::to_string(cases) + " period vectors" +
                     (ok ? ", all ranks correct" : ", MISMATCH");
        c.expected = "(0,2g-2,0) nonzero / (1,2g,1) zero, euler 2-2g";
        c.pass = ok;
    });

    // 6. iteration formula and |cz - Delta| < 1
    R.claim("index_properties", "sec2.3:props(2)(4)", [&](ClaimResult& c) {
        Rng rng(seed + 6);
        double worst_iter = 0;
        double worst_gap = 0;
        int n_done = 0;
        for (int trial = 0; trial < 200; ++trial) {
            SymplecticPath p = random_path(rng);
            double dm = mean_index(p);
            for (int k : {2, 3, 5, 7}) {
                double dk = mean_index(iterate(p, k));
                worst_iter = std::max(worst_iter, std::abs(dk - k * dm));
            }
            try {
                int cz = cz_index(p);
                worst_gap = std::max(worst_gap, std::abs(cz - dm));
                n_done++;
            } catch (const DegenerateEndpoint&) {
                // degenerate endpoints are excluded from property (4)
            }
        }
        c.computed = "iter_err=" + fmt(worst_iter) + " gap=" + fmt(worst_gap) +
                     " nondeg=" + std::to_string(n_done);
        c.expected = "iter_err<1e-6, gap<1";
        c.tolerance = 1e-6;
        c.pass = worst_iter < 1e-6 && worst_gap < 1.0 && n_done > 150;
    });

    // 7. blow-up symplecticity and C1 gluing
    R.claim("blowup_c1", "sec:2.7", [&](ClaimResult& c) {
        Rng rng(seed + 7);
        std::vector<FixedPointRecord> none;
        BlowupChart ch = blowup_chart(none, {0, 0}, 0.1);
        double e1 = ch.inner_det_error(1000);
        double e2 = ch.band_det_error(1000);
        bool hpos = true;
        for (int i = 0; i <= 1000; ++i) {
            double rho = 0.1 * 0.1 / 2 + (0.2 - 0.1 * 0.1 / 2) * i / 1000.0;
            hpos = hpos && ch.glue.hval(rho) > 0;
        }
        bool c1_all = true;
        for (int trial = 0; trial < 50; ++trial) {
            // random polynomial vanishing at the origin
            double a1 = uniform(rng, -1, 1), a2 = uniform(rng, -1, 1);
            double b1 = uniform(rng, -1, 1), b2 = uniform(rng, -1, 1),
                   b3 = uniform(rng, -1, 1);
            double c3 = uniform(rng, -1, 1);
            GluedF F = glue_F([=](double x, double y) {
                return a1 * x + a2 * y + b1 * x * x + b2 * x * y + b3 * y * y +
                       c3 * x * y * y;
            });
            C1Report r = check_glue_regularity(F);
            c1_all = c1_all && r.c1_ok;
        }
        GluedF bad = glue_F([](double x, double y) { return x * (x * x + y * y); });
        C1Report rb = check_glue_regularity(bad);
        c.computed = "det_err=(" + fmt(e1) + "," + fmt(e2) + ") h>0:" +
                     (hpos ? "y" : "n") + " C1[50]:" + (c1_all ? "y" : "n") +
                     " cubic C2 divergence:" + (rb.c2_bounded ? "missed" : "detected");
        c.expected = "det errors < 1e-10, h > 0, all C1, C2 failure detected";
        c.tolerance = 1e-10;
        c.pass = e1 < 1e-10 && e2 < 1e-10 && hpos && c1_all && !rb.c2_bounded;
    });

    // 8. no-other-periodic-orbit corroboration + rational negative control
    R.claim("no_other_periodic", "thm:1.4", [&](ClaimResult& c) {
        AtlasParams ap;
        ap.genus = 2;
        ap.variant = Variant::pure;
        ChartAtlas atlas = build_surface(ap);
        double T = quick ? 60.0 : 500.0;
        int seeds = quick ? 64 : 1024;
        PeriodicSearchReport sr = search_periodic(atlas, T, seeds, 1e-8);
        double min_pos = 1e18;
        for (const auto& [k, d] : sr.min_return_distance)
            min_pos = std::min(min_pos, d);
        // negative control: rational slopes must produce a periodic orbit
        AtlasParams rp = ap;
        rp.allow_rational_slopes = true;
        rp.slopes.assign(2, ExactReal(1, 2));
        ChartAtlas rat = build_surface(rp);
        PeriodicSearchReport rr = search_periodic(rat, 50.0, 64, 1e-8);
        c.computed = "found=" + std::to_string(sr.found.size()) +
                     " min_return=" + fmt(min_pos) +
                     " absorbed=" + std::to_string(sr.absorbed_seeds) +
                     " rational_found=" + std::to_string(rr.found.size());
        c.expected = "found=0, min_return>0, rational_found>=1";
        c.pass = sr.found.empty() && min_pos > 1e-7 && !rr.found.empty();
    });

    // 9. flux irrationality
    R.claim("flux_irrational", "rmk:flux_of_constructions", [&](ClaimResult& c) {
        bool ok = true;
        double worst = 0;
        for (int g : {2, 3}) {
            AtlasParams ap;
            ap.genus = g;
            ap.variant = Variant::pure;
            ChartAtlas atlas = build_surface(ap);
            FluxVector fv = flux(atlas);
            for (int i = 0; i < g; ++i) {
                double a = fv.values[static_cast<std::size_t>(2 * i)];
                double b = fv.values[static_cast<std::size_t>(2 * i + 1)];
                double ratio = -a / b;  // = v/u for the torus field
                double target = static_cast<double>(
                    atlas.tori[static_cast<std::size_t>(i)].slope.witness());
                worst = std::max(worst, std::abs(ratio - target));
                ok = ok && !atlas.tori[static_cast<std::size_t>(i)].slope
                               .is_rational();
            }
        }
        c.computed = "max |ratio - symbol| = " + fmt(worst);
        c.expected = "< 1e-9, all slopes irrational";
        c.tolerance = 1e-9;
        c.pass = ok && worst < 1e-9;
    });

    // 10. mean-index consistency at the detected fixed points
    R.claim("mean_index_saddles", "thm:1.1(mean-index)", [&](ClaimResult& c) {
        double worst = 0;
        // planar variants
        for (int g : {2, 3, 4}) {
            std::vector<PlanarHamiltonian> Hs;
            Hs.emplace_back(g, Variant::pure);
            Hs.emplace_back(g, Variant::linear_perturbed, 0.1);
            if (g == 3) Hs.emplace_back(g, Variant::cubic_perturbed, 0.1);
            for (const auto& H : Hs) {
                auto zs = find_zeros(H, {-2, 2, -2, 2}, 1e-10);
                for (const auto& z : zs) {
                    SymplecticPath p =
                        linearized_path(H.field_ref(), z.location, 1.0);
                    worst = std::max(worst, std::abs(mean_index(p)));
                }
            }
        }
        // atlas saddles (blended field)
        for (int g : {2, 3}) {
            AtlasParams ap;
            ap.genus = g;
            ap.variant = Variant::linear_perturbed;
            ChartAtlas atlas = build_surface(ap);
            for (const Vec2& z : atlas.core_zeros)
                worst = std::max(worst, std::abs(atlas_mean_index(atlas, z)));
        }
        c.computed = "max |mean index| = " + fmt(worst);
        c.expected = "< 1e-6";
        c.tolerance = 1e-6;
        c.pass = worst < 1e-6;
    });

    return R.rep;
}

}  // namespace symflow
