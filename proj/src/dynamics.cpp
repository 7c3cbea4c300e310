#include "symflow/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace symflow {

namespace {

struct Walker {
    const ChartAtlas& atlas;
    const DGeometry& G;
    IntegrateOptions opt;
    OrbitTrace trace;
    double t = 0;
    double T = 0;
    AtlasPos pos;
    Mat2 V = Mat2::identity();
    double F0 = 0;            // region-D energy reference
    bool in_D_segment = false;
    long events = 0;
    double next_sample = 0;
    bool stop_requested = false;
    std::vector<Vec2> fixed_points;

    Walker(const ChartAtlas& a, const IntegrateOptions& o)
        : atlas(a), G(*a.geom), opt(o) {}

    double dir() const { return opt.direction >= 0 ? 1.0 : -1.0; }

    void record(bool force = false) {
        if (trace.samples.size() >= opt.max_samples) return;
        if (!force && opt.sample_stride > 0 && t < next_sample) return;
        trace.samples.push_back({t, pos.kind, pos.index, pos.q});
        if (opt.sample_stride > 0)
            while (next_sample <= t) next_sample += opt.sample_stride;
    }

    void bump_events() {
        if (++events > 2000000)
            throw StuckAtBoundary("event budget exhausted at t=" + std::to_string(t));
    }

    const TorusChart& torus() const {
        return atlas.tori[static_cast<std::size_t>(pos.index - 1)];
    }
    const TubeChart& tube() const {
        return atlas.tubes[static_cast<std::size_t>(pos.index - 1)];
    }

    // ---- torus stepping (exact linear flow with wrap segments) ----
    void run_torus() {
        const TorusChart& tc = torus();
        Vec2 vel{tc.u * dir(), tc.v * dir()};
        while (t < T && pos.kind == ChartKind::torus && !stop_requested) {
            Vec2 p = pos.q;
            // time to leave the fundamental square
            double t_wrap =
                std::min((vel.x > 0) ? (1.0 - p.x) / vel.x
                                     : (vel.x < 0 ? p.x / -vel.x : 1e18),
                         (vel.y > 0) ? (1.0 - p.y) / vel.y
                                     : (vel.y < 0 ? p.y / -vel.y : 1e18));
            t_wrap = std::max(t_wrap, 1e-15);
            double seg_end = std::min(t_wrap, T - t);

            // hole entry inside this segment: xi(t) = -eps/2 with |eta| < eps/2
            double xi = dot(p - tc.hole_center, tc.e_hat) * dir();
            double eta = dot(p - tc.hole_center, tc.n_hat) * dir();
            double t_hole = 1e18;
            if (std::abs(eta) < tc.eps / 2 && xi < -tc.eps / 2 - 1e-14)
                t_hole = (-tc.eps / 2 - xi) / tc.speed;

            // section crossing inside this segment
            double t_sec = 1e18;
            if (opt.section && opt.section->torus_index == pos.index) {
                double c = opt.section->c;
                double x0 = (opt.section->axis == 0) ? p.x : p.y;
                double v0 = (opt.section->axis == 0) ? vel.x : vel.y;
                if (std::abs(v0) > 1e-15) {
                    double dt_plain = (c - x0) / v0;
                    if (dt_plain > 1e-13) t_sec = dt_plain;
                }
            }

            double step = std::min({seg_end, t_hole, t_sec});
            Vec2 pn = p + step * vel;
            t += step;
            if (step == t_sec && t_sec < 1e17) {
                pos.q = {wrap_unit(pn.x), wrap_unit(pn.y)};
                int sgn = ((opt.section->axis == 0 ? vel.x : vel.y) > 0) ? 1 : -1;
                double coord = (opt.section->axis == 0) ? pos.q.y : pos.q.x;
                record(true);
                if (opt.on_hit && !opt.on_hit(t, coord, sgn)) {
                    stop_requested = true;
                    return;
                }
                // nudge past the section
                pos.q = pos.q + vel * 1e-12;
                pos.q = {wrap_unit(pos.q.x), wrap_unit(pos.q.y)};
                continue;
            }
            if (step == t_hole && t_hole < 1e17) {
                // enter the connector tube at the hole boundary
                pos.kind = ChartKind::connector;
                Vec2 entry = p + step * vel;
                pos.q = {dot(entry - tc.hole_center, tc.e_hat),
                         dot(entry - tc.hole_center, tc.n_hat)};
                bump_events();
                record(true);
                return;
            }
            pos.q = {wrap_unit(pn.x), wrap_unit(pn.y)};
            record();
            if (step >= seg_end && t >= T - 1e-15) return;
            bump_events();
        }
    }

    // ---- tube stepping (exact) ----
    void run_tube() {
        const TubeChart& tb = tube();
        double s = tb.speed * dir();
        while (t < T && pos.kind == ChartKind::connector && !stop_requested) {
            double xi = pos.q.x, eta = pos.q.y;
            double t_exit;
            bool to_disc = false;
            if (std::abs(eta) < tb.rJ) {
                double xhit = -std::sqrt(tb.rJ * tb.rJ - eta * eta);
                if (s > 0 && xi < xhit - 1e-14) {
                    t_exit = (xhit - xi) / s;
                    to_disc = true;
                } else if (s < 0 && xi > -xhit + 1e-14) {
                    t_exit = (-xhit - xi) / s;
                    to_disc = true;
                } else {
                    t_exit = (s > 0) ? (tb.eps / 2 - xi) / s : (-tb.eps / 2 - xi) / s;
                }
            } else {
                t_exit = (s > 0) ? (tb.eps / 2 - xi) / s : (-tb.eps / 2 - xi) / s;
            }
            if (t + t_exit >= T) {
                pos.q.x += s * (T - t);
                t = T;
                record(true);
                return;
            }
            t += t_exit;
            xi += s * t_exit;
            pos.q = {xi, eta};
            bump_events();
            if (to_disc) {
                // cross the junction circle into the region-D chart
                double theta = std::atan2(eta, xi);
                pos = tube_to_D(theta);
                record(true);
                return;
            }
            // exit to the torus
            const TorusChart& tc = atlas.tori[static_cast<std::size_t>(pos.index - 1)];
            Vec2 p = tc.hole_center + xi * tc.e_hat + eta * tc.n_hat;
            pos.kind = ChartKind::torus;
            pos.q = {wrap_unit(p.x), wrap_unit(p.y)};
            record(true);
            return;
        }
    }

    AtlasPos tube_to_D(double theta) const {
        int ci = pos.index;
        for (const SideGeom* s : G.circle_sides(ci)) {
            for (int k = -1; k <= 1; ++k) {
                double th = theta + k * TWO_PI;
                if (th >= s->theta.th.front() - 1e-12 &&
                    th <= s->theta.th.back() + 1e-12) {
                    double w = s->theta.inverse(th);
                    if (w < s->w0 - 1e-9 || w > s->w1 + 1e-9) continue;
                    Vec2 q = s->A + (w - s->w0) * s->t_hat;
                    return {ChartKind::regionD, 0, q};
                }
            }
        }
        throw LeftAtlas("junction angle not covered by any side patch");
    }

    // ---- region-D stepping (implicit midpoint + boundary events) ----
    Vec2 fieldD(Vec2 q) const { return atlas.field.X(q) * dir(); }

    Vec2 midpoint_step(Vec2 p, double h) const {
        Vec2 z = p + fieldD(p) * (h / 2);
        for (int it = 0; it < 12; ++it) {
            Vec2 g = p + fieldD(z) * (h / 2) - z;
            Mat2 DX = atlas.field.DX(z) * (dir() * h / 2) - Mat2::identity();
            Vec2 dz = DX.inverse() * (g * -1.0);
            z = z + dz * -1.0;
            if (dz.norm() < 1e-14) break;
        }
        return p + fieldD(z) * h;
    }

    double boundary_gap(Vec2 q) const { return G.boundary_gap(q); }

    void run_D() {
        Vec2 q = pos.q;
        double drift0 = atlas.field.value(q);
        bool fresh_entry = true;
        while (t < T && !stop_requested) {
            if (fresh_entry) {
                // nudge inward off the boundary
                Vec2 X0 = fieldD(q);
                double n = X0.norm();
                if (n > 1e-14) {
                    double push = 1e-11 / n;
                    Vec2 q2 = q + X0 * push;
                    if (boundary_gap(q2) < boundary_gap(q)) {
                        q = q2;
                        t += push;
                    }
                }
                fresh_entry = false;
            }
            Vec2 X = fieldD(q);
            double xn = X.norm();
            // absorption near a fixed point with inward field
            for (const Vec2& z : fixed_points) {
                Vec2 r = q - z;
                if (r.norm() < opt.absorb_radius && dot(X, r) <= 0) {
                    trace.absorbed = true;
                    trace.absorbed_time = t;
                    pos = {ChartKind::regionD, 0, q};
                    record(true);
                    return;
                }
            }
            double L = atlas.field.DX(q).opnorm();
            double h = std::min(opt.max_step, 0.5 / (L + 1.0));
            h = std::max(h, 1e-9);
            h = std::min(h, T - t);
            Vec2 qn = midpoint_step(q, h);
            if (boundary_gap(qn) >= 0.0) {
                // bisect the step to the boundary crossing
                double lo = 0, hi = h;
                Vec2 qhi = qn;
                for (int it = 0; it < 60; ++it) {
                    double mid = 0.5 * (lo + hi);
                    Vec2 qm = midpoint_step(q, mid);
                    if (boundary_gap(qm) >= 0.0) {
                        hi = mid;
                        qhi = qm;
                    } else {
                        lo = mid;
                    }
                    if (hi - lo < 1e-13) break;
                }
                t += hi;
                q = qhi;
                trace.energy_drift = std::max(
                    trace.energy_drift, std::abs(atlas.field.value(q) - drift0));
                if (handle_D_exit(q)) {
                    // seam teleport: continue in this chart
                    q = pos.q;
                    fresh_entry = true;
                    continue;
                }
                return;
            }
            if (opt.track_variational) {
                Vec2 zm = q + (qn - q) * 0.5;
                Mat2 A = atlas.field.DX(zm) * dir();
                Mat2 M = (Mat2::identity() - A * (h / 2)).inverse() *
                         (Mat2::identity() + A * (h / 2));
                V = M * V;
                trace.jac_det_drift =
                    std::max(trace.jac_det_drift, std::abs(V.det() - 1.0));
            }
            q = qn;
            t += h;
            pos.q = q;
            trace.energy_drift = std::max(trace.energy_drift,
                                          std::abs(atlas.field.value(q) - drift0));
            record();
            bump_events();
        }
        pos = {ChartKind::regionD, 0, q};
        record(true);
    }

    // returns true when the orbit stays in the region-D chart (seam teleport)
    bool handle_D_exit(Vec2 q) {
        // which side line was crossed?
        const SideGeom* best = nullptr;
        double best_gap = -1e18;
        for (int pass = 0; pass < 2 && !best; ++pass) {
            for (const auto& s : G.sides) {
                if (pass == 0) {
                    double w = dot(q, s.t_hat);
                    if (w < s.w0 - 1e-7 || w > s.w1 + 1e-7) continue;
                }
                double gp = dot(q, s.n_out) - s.offset;
                if (gp > best_gap) {
                    best_gap = gp;
                    best = &s;
                }
            }
        }
        if (!best) throw LeftAtlas("region-D exit not on any side");
        bump_events();
        if (best->role == SideGeom::Seam) {
            pos = {ChartKind::regionD, 0, Vec2{q.x, -q.y}};
            record(true);
            return true;
        }
        // junction: to the connector tube of this circle
        double w = dot(q, best->t_hat);
        double jet[4];
        best->theta.eval(w, jet);
        double theta = jet[0];
        pos.kind = ChartKind::connector;
        pos.index = best->circle_index;
        pos.q = {G.rJ * std::cos(theta), G.rJ * std::sin(theta)};
        record(true);
        return false;
    }
};

}  // namespace

OrbitTrace integrate(const ChartAtlas& atlas, AtlasPos start, double T,
                     const IntegrateOptions& opt) {
    if (T <= 0) throw InvalidInput("integrate: T must be positive");
    Walker w(atlas, opt);
    w.T = T;
    w.pos = start;
    w.fixed_points = atlas.core_zeros;  // for absorption detection
    w.record(true);
    while (w.t < T && !w.stop_requested) {
        double before = w.t;
        switch (w.pos.kind) {
            case ChartKind::torus: w.run_torus(); break;
            case ChartKind::connector: w.run_tube(); break;
            case ChartKind::regionD: w.run_D(); break;
            default: throw LeftAtlas("unsupported chart kind in integrate");
        }
        if (w.trace.absorbed) break;
        if (w.t <= before + 1e-16 && !w.stop_requested) {
            w.bump_events();
        }
    }
    w.trace.final_pos = w.pos;
    w.trace.final_time = w.t;
    w.trace.variational = w.V;
    if (w.trace.samples.empty() ||
        w.trace.samples.back().t < w.t - 1e-12)
        w.record(true);
    return w.trace;
}

FluxVector flux(const ChartAtlas& atlas) {
    FluxVector fv;
    fv.genus = atlas.genus();
    // iota_X omega = u dy - v dx for the constant torus fields; integrate over
    // the two core circles of each torus by composite Gauss quadrature
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                 0.6521451548625461, 0.3478548451374538};
    for (const auto& tc : atlas.tori) {
        auto one_form = [&](Vec2 /*p*/, Vec2 d) {
            return tc.u * d.y - tc.v * d.x;
        };
        double a_val = 0, b_val = 0;
        const int panels = 16;
        for (int p = 0; p < panels; ++p) {
            double lo = double(p) / panels, hi = double(p + 1) / panels;
            for (int k = 0; k < 4; ++k) {
                double tt = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx[k];
                double wq = 0.5 * (hi - lo) * gw[k];
                a_val += wq * one_form({tt, 0.0}, {1, 0});
                b_val += wq * one_form({0.0, tt}, {0, 1});
            }
        }
        fv.values.push_back(a_val);
        fv.values.push_back(b_val);
    }
    return fv;
}

SectionReturn return_map(const ChartAtlas& atlas, const SectionSpec& section,
                         AtlasPos start, int n_hits, double T_max) {
    SectionReturn sr;
    sr.section = section;
    IntegrateOptions opt;
    opt.section = section;
    opt.on_hit = [&](double tt, double coord, int sgn) {
        sr.hits.push_back({tt, coord, sgn});
        return static_cast<int>(sr.hits.size()) < n_hits;
    };
    OrbitTrace tr = integrate(atlas, start, T_max, opt);
    sr.absorbed = tr.absorbed;
    if (static_cast<int>(sr.hits.size()) < n_hits && !sr.absorbed)
        throw HorizonExceeded("got " + std::to_string(sr.hits.size()) + " of " +
                              std::to_string(n_hits) + " crossings");
    return sr;
}

namespace {

double circ_dist(double a, double b) {
    double d = std::abs(wrap_unit(a) - wrap_unit(b));
    return std::min(d, 1.0 - d);
}

}  // namespace

PeriodicSearchReport search_periodic(const ChartAtlas& atlas, double T_max,
                                     int seeds, double tol) {
    PeriodicSearchReport rep;
    rep.horizon = T_max;
    rep.seeds = seeds;
    const int g = atlas.genus();
    const int per_torus = std::max(1, seeds / g);
    const int K = 48;  // iterate counts tracked
    std::vector<double> min_d(static_cast<std::size_t>(K) + 1, 1e18);

    struct RawCand {
        SectionSpec sec;
        double seed;
        int k;
        double dist;
    };
    std::vector<RawCand> raw;

    for (int ti = 1; ti <= g; ++ti) {
        SectionSpec sec;
        sec.torus_index = ti;
        sec.axis = 0;
        sec.c = 0.03125;
        for (int i = 0; i < per_torus; ++i) {
            double y0 = (i + 0.5) / per_torus;
            AtlasPos start{ChartKind::torus, ti, {sec.c, y0}};
            SectionReturn sr;
            try {
                sr = return_map(atlas, sec, start, K, T_max);
            } catch (const HorizonExceeded&) {
                // fewer crossings than K within the horizon; use what we have
            }
            if (sr.hits.empty()) {
                IntegrateOptions opt;
                opt.section = sec;
                opt.on_hit = [&](double tt, double coord, int sgn) {
                    sr.hits.push_back({tt, coord, sgn});
                    return static_cast<int>(sr.hits.size()) < K;
                };
                OrbitTrace tr = integrate(atlas, start, T_max, opt);
                sr.absorbed = tr.absorbed;
            }
            if (sr.absorbed) rep.absorbed_seeds++;
            for (std::size_t k = 0; k < sr.hits.size(); ++k) {
                double d = circ_dist(sr.hits[k].coord, y0);
                std::size_t kk = k + 1;
                if (kk <= K) {
                    if (d < min_d[kk]) min_d[kk] = d;
                    if (d < 1e-4)
                        raw.push_back({sec, y0, static_cast<int>(kk), d});
                }
            }
        }
    }
    for (int k = 1; k <= K; ++k)
        if (min_d[static_cast<std::size_t>(k)] < 1e17)
            rep.min_return_distance.push_back(
                {k, min_d[static_cast<std::size_t>(k)]});

    // refine candidates by the secant method on the k-th return displacement
    for (const auto& rc : raw) {
        auto kth_return = [&](double y) -> std::optional<double> {
            AtlasPos start{ChartKind::torus, rc.sec.torus_index, {rc.sec.c, wrap_unit(y)}};
            try {
                SectionReturn sr = return_map(atlas, rc.sec, start, rc.k, T_max);
                if (static_cast<int>(sr.hits.size()) < rc.k) return std::nullopt;
                return sr.hits[static_cast<std::size_t>(rc.k - 1)].coord;
            } catch (const Error&) {
                return std::nullopt;
            }
        };
        auto displacement = [&](double y) -> std::optional<double> {
            auto r = kth_return(y);
            if (!r) return std::nullopt;
            double d = wrap_unit(*r) - wrap_unit(y);
            if (d > 0.5) d -= 1.0;
            if (d < -0.5) d += 1.0;
            return d;
        };
        double y = rc.seed;
        auto f0 = displacement(y);
        if (!f0) continue;
        double y1 = y + 1e-5;
        auto f1 = displacement(y1);
        if (!f1) continue;
        double fy = *f0, fy1 = *f1;
        for (int it = 0; it < 30 && std::abs(fy1) > tol / 10; ++it) {
            double denom = fy1 - fy;
            if (std::abs(denom) < 1e-18) break;
            double y2 = y1 - fy1 * (y1 - y) / denom;
            y = y1;
            fy = fy1;
            y1 = y2;
            auto f2 = displacement(y1);
            if (!f2) break;
            fy1 = *f2;
        }
        if (std::abs(fy1) < tol) {
            // recover the period
            AtlasPos start{ChartKind::torus, rc.sec.torus_index,
                           {rc.sec.c, wrap_unit(y1)}};
            try {
                SectionReturn sr = return_map(atlas, rc.sec, start, rc.k, T_max);
                PeriodicCandidate cand;
                cand.section = rc.sec;
                cand.seed_coord = rc.seed;
                cand.coord = wrap_unit(y1);
                cand.iterate = rc.k;
                cand.period = sr.hits[static_cast<std::size_t>(rc.k - 1)].t;
                cand.residual = std::abs(fy1);
                bool dup = false;
                for (const auto& c : rep.found)
                    if (c.section.torus_index == cand.section.torus_index &&
                        c.iterate == cand.iterate &&
                        circ_dist(c.coord, cand.coord) < 1e-5)
                        dup = true;
                if (!dup) rep.found.push_back(cand);
            } catch (const Error&) {
            }
        }
    }
    return rep;
}

IndexAudit index_audit(const ChartAtlas& atlas) {
    IndexAudit audit;
    const DGeometry& G = *atlas.geom;
    Rect box = G.bounding_box();
    FieldHandle fh = atlas.field.handle();
    auto zeros = find_zeros(fh, box, 1e-9, 42);
    // keep zeros strictly inside the polygon (the chart's actual domain)
    for (const auto& z : zeros) {
        if (G.boundary_gap(z.location) < -1e-6) audit.records.push_back(z);
    }
    int sum = 0;
    for (auto& z : audit.records) {
        double iso = 0.2;
        for (const auto& o : audit.records)
            if (&o != &z)
                iso = std::min(iso, (o.location - z.location).norm() / 3.0);
        iso = std::min(iso, -G.boundary_gap(z.location) / 2.0);
        z.lefschetz_index = winding_index(
            [&](Vec2 p) { return atlas.field.X(p); }, z.location, iso);
        z.hyperbolic_regions = hyperbolic_regions(fh, z.location, iso);
        sum += z.lefschetz_index;
    }
    audit.sum = sum;
    return audit;
}

double atlas_mean_index(const ChartAtlas& atlas, Vec2 fixed_point, double T) {
    BlendedField f = atlas.field;
    PlanarFieldRef ref{
        [f](Vec2 p) { return f.X(p); },
        [f](Vec2 p) { return f.DX(p); }};
    SymplecticPath path = linearized_path(ref, fixed_point, T);
    return mean_index(path);
}

}  // namespace symflow
