#include "symflow/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace symflow {

// ---------------------------------------------------------------------------
// SplineC3
// ---------------------------------------------------------------------------

namespace {
// septic step: S(0)=0, S(1)=1, S',S'',S''' vanish at both ends
inline void septic_step(double t, double out[4]) {
    if (t <= 0) { out[0] = out[1] = out[2] = out[3] = 0; return; }
    if (t >= 1) { out[0] = 1; out[1] = out[2] = out[3] = 0; return; }
    double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t, t6 = t5 * t, t7 = t6 * t;
    out[0] = 35 * t4 - 84 * t5 + 70 * t6 - 20 * t7;
    out[1] = 140 * t3 - 420 * t4 + 420 * t5 - 140 * t6;
    out[2] = 420 * t2 - 1680 * t3 + 2100 * t4 - 840 * t5;
    out[3] = 840 * t - 5040 * t2 + 8400 * t3 - 4200 * t4;
}
}  // namespace

SplineC3 SplineC3::through(std::vector<double> kw, std::vector<double> kth,
                           double window_frac) {
    if (kw.size() != kth.size() || kw.size() < 2)
        throw GeometryViolation("spline: need matching knot lists");
    SplineC3 s;
    s.w = std::move(kw);
    s.th = std::move(kth);
    s.hw.assign(s.w.size(), 0.0);
    for (std::size_t k = 1; k + 1 < s.w.size(); ++k) {
        double left = s.w[k] - s.w[k - 1];
        double right = s.w[k + 1] - s.w[k];
        s.hw[k] = window_frac * std::min(left, right);
    }
    s.check_monotone();
    return s;
}

void SplineC3::eval(double x, double out[4]) const {
    const std::size_t n = w.size();
    // affine piece index: pieces k = 0..n-2; extended linearly outside
    std::size_t k = 0;
    while (k + 2 < n && x > w[k + 1]) ++k;
    auto affine = [&](std::size_t piece, double xx, double& val, double& der) {
        double m = (th[piece + 1] - th[piece]) / (w[piece + 1] - w[piece]);
        val = th[piece] + m * (xx - w[piece]);
        der = m;
    };
    double v, d;
    affine(k, x, v, d);
    out[0] = v; out[1] = d; out[2] = 0; out[3] = 0;
    // blend window around interior knot k (transition from piece k-1 to k)
    for (std::size_t j = 1; j + 1 < n; ++j) {
        double h = hw[j];
        if (h <= 0) continue;
        if (x <= w[j] - h || x >= w[j] + h) continue;
        double va, da, vb, db;
        affine(j - 1, x, va, da);
        affine(j, x, vb, db);
        double t = (x - (w[j] - h)) / (2 * h);
        double S[4];
        septic_step(t, S);
        double D = vb - va, Dp = db - da;
        double inv = 1.0 / (2 * h);
        out[0] = va + S[0] * D;
        out[1] = da + S[1] * inv * D + S[0] * Dp;
        out[2] = S[2] * inv * inv * D + 2 * S[1] * inv * Dp;
        out[3] = S[3] * inv * inv * inv * D + 3 * S[2] * inv * inv * Dp;
        return;
    }
}

double SplineC3::inverse(double theta) const {
    double lo = w.front(), hi = w.back();
    // extend if needed (affine tails)
    while ((*this)(lo) > theta) lo -= (hi - lo) + 1e-3;
    while ((*this)(hi) < theta) hi += (hi - lo) + 1e-3;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if ((*this)(mid) < theta) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-15) break;
    }
    return 0.5 * (lo + hi);
}

void SplineC3::check_monotone() const {
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (!(w[i] < w[i + 1]))
            throw GeometryViolation("spline: knots not increasing");
    for (std::size_t i = 0; i + 1 < th.size(); ++i)
        if (!(th[i] < th[i + 1]))
            throw GeometryViolation("spline: values not increasing");
    const int N = 4000;
    for (int i = 0; i <= N; ++i) {
        double x = w.front() + (w.back() - w.front()) * i / N;
        double j[4];
        eval(x, j);
        if (j[1] <= 0)
            throw GeometryViolation("spline: derivative not positive at w=" +
                                    std::to_string(x));
    }
}

double SplineC3::max_deriv() const {
    double m = 0;
    const int N = 2000;
    for (int i = 0; i <= N; ++i) {
        double x = w.front() + (w.back() - w.front()) * i / N;
        double j[4];
        eval(x, j);
        m = std::max(m, j[1]);
    }
    return m;
}

// ---------------------------------------------------------------------------
// DGeometry
// ---------------------------------------------------------------------------

const SideGeom& DGeometry::by_label(int label) const {
    for (const auto& s : sides)
        if (s.label == label) return s;
    throw InvalidInput("DGeometry: no side with label " + std::to_string(label));
}

Rect DGeometry::bounding_box() const {
    double xlo = 1e9, xhi = -1e9, ylo = 1e9, yhi = -1e9;
    for (const auto& s : sides) {
        for (Vec2 p : {s.A, s.B}) {
            xlo = std::min(xlo, p.x); xhi = std::max(xhi, p.x);
            ylo = std::min(ylo, p.y); yhi = std::max(yhi, p.y);
        }
    }
    return {xlo, xhi, ylo, yhi};
}

double DGeometry::boundary_gap(Vec2 q) const {
    double g = -1e9;
    for (const auto& s : sides) g = std::max(g, dot(q, s.n_out) - s.offset);
    return g;
}

std::vector<const SideGeom*> DGeometry::circle_sides(int circle_index) const {
    std::vector<const SideGeom*> out;
    for (const auto& s : sides)
        if (s.role == SideGeom::Circle && s.circle_index == circle_index)
            out.push_back(&s);
    return out;
}

namespace {

struct SideProto {
    int ma, mb;        // vertex indices (angles 2 pi m / h), mb may exceed ma
    double phi_mid;    // angular centre
    bool two_ray;      // spans two separatrix rays (the left/right verticals)
};

// zeros of H restricted to the segment A + w t_hat, w in [w0, w1]
std::vector<double> side_zeros(const PlanarHamiltonian& H, Vec2 A, Vec2 t_hat,
                               double w0, double w1) {
    auto f = [&](double w) {
        Vec2 q = A + (w - w0) * t_hat;
        return H.value_at(q);
    };
    std::vector<double> zs;
    const int N = 4096;
    double prev = f(w0);
    for (int i = 1; i <= N; ++i) {
        double w = w0 + (w1 - w0) * i / N;
        double cur = f(w);
        if (prev != 0 && cur != 0 && (prev < 0) != (cur < 0)) {
            double lo = w0 + (w1 - w0) * (i - 1) / N, hi = w;
            double flo = prev;
            for (int it = 0; it < 90; ++it) {
                double mid = 0.5 * (lo + hi);
                double fm = f(mid);
                if ((flo <= 0) == (fm <= 0)) { lo = mid; flo = fm; }
                else hi = mid;
            }
            zs.push_back(0.5 * (lo + hi));
        }
        prev = cur;
    }
    return zs;
}

}  // namespace

std::shared_ptr<const DGeometry> make_d_geometry(
    const PlanarHamiltonian& core, const GeometryParams& params,
    const std::vector<double>& tube_speeds) {
    const int g = core.genus();
    const int h = 4 * g - 2;
    const int l = h - 2;
    if (!(params.offset_ratio_out > params.offset_ratio_mid &&
          params.offset_ratio_mid > 1.0))
        throw GeometryViolation("offset ratios must nest: 1 < mid < out");

    auto geo = std::make_shared<DGeometry>();
    geo->genus = g;
    geo->l = l;
    geo->h = h;
    geo->R2 = params.R2;
    geo->rJ = params.eps / 4.0;
    geo->u1 = std::pow(0.8 * geo->rJ, 2);
    geo->u2 = std::pow(0.35 * geo->rJ, 2);
    geo->lambda.assign(static_cast<std::size_t>(g) + 1, 1.0);
    for (int i = 1; i <= g && i < static_cast<int>(tube_speeds.size()) + 1; ++i)
        geo->lambda[static_cast<std::size_t>(i)] =
            tube_speeds[static_cast<std::size_t>(i - 1)];

    // vertex sequence around the polygon; the gaps at angles 0 and pi give the
    // two-ray vertical sides
    std::vector<int> seq;
    seq.push_back(h - 1);
    for (int m = 1; m <= h - 1; ++m)
        if (m != h / 2) seq.push_back(m);
    // sides: seq[k] -> seq[k+1] (cyclically); seq has l+1 entries with
    // seq.front() == h-1 appearing once more at the end implicitly
    std::vector<SideProto> protos;
    for (int k = 0; k < l; ++k) {
        int ma = seq[static_cast<std::size_t>(k)];
        int mb = seq[static_cast<std::size_t>((k + 1) % l)];
        double phia = TWO_PI * ma / h;
        double phib = TWO_PI * mb / h;
        if (k == 0) phia -= TWO_PI;  // v_{h-1} sits just below angle 0
        while (phib < phia) phib += TWO_PI;
        SideProto p;
        p.ma = ma;
        p.mb = mb;
        p.phi_mid = 0.5 * (phia + phib);
        p.two_ray = (mb - ma + h) % h == 2;
        protos.push_back(p);
    }

    // line data: outward normal and offsets, seam lines pushed outward
    std::vector<Vec2> normals(static_cast<std::size_t>(l));
    std::vector<double> off_final(static_cast<std::size_t>(l)),
        off_dpp(static_cast<std::size_t>(l));
    std::vector<SideGeom> sides(static_cast<std::size_t>(l));
    for (int k = 0; k < l; ++k) {
        const auto& p = protos[static_cast<std::size_t>(k)];
        Vec2 n{std::cos(p.phi_mid), std::sin(p.phi_mid)};
        normals[static_cast<std::size_t>(k)] = n;
        double half_span = p.two_ray ? TWO_PI / h : PI / h;
        double e_pre = params.R2 * std::cos(half_span);
        off_dpp[static_cast<std::size_t>(k)] = e_pre;

        SideGeom& s = sides[static_cast<std::size_t>(k)];
        s.ccw = k;
        s.label = ((k + (g - 1) - 1) % l + l) % l + 1;
        s.n_out = n;
        s.ray_angle = p.phi_mid;  // for 1-ray sides this is the separatrix ray
        s.n_ray = rot90(Vec2{std::cos(p.phi_mid), std::sin(p.phi_mid)});
    }

    // roles from the spec's pairing tables
    auto classify = [&](int label) -> std::pair<SideGeom::Role, int> {
        if (label == g - 1 || label == 3 * g - 3)
            return {SideGeom::Circle, label};  // single-side circles
        int partner = 0;
        if (label >= 1 && label <= g - 2) partner = 2 * g - 2 - label;
        else if (label >= 2 * g - 2 && label <= 3 * g - 4) partner = 6 * g - 6 - label;
        else if (label >= g && label <= 2 * g - 3) partner = 2 * g - 2 - label;
        else partner = 6 * g - 6 - label;  // label in [3g-2 .. 4g-4]
        bool seam = ((label - g) % 2) == 0;
        return {seam ? SideGeom::Seam : SideGeom::Circle, partner};
    };
    for (auto& s : sides) {
        auto [role, partner] = classify(s.label);
        s.role = role;
        s.partner_label = partner;
        s.single_circle = (s.partner_label == s.label);
    }

    // circle indices
    for (auto& s : sides) {
        if (s.role != SideGeom::Circle) continue;
        if (s.label == g - 1) s.circle_index = 2;
        else if (s.label == 3 * g - 3) s.circle_index = 1;
        else {
            // the member of the pair congruent to g+1 mod 2 within [g+1, 3g-4]
            for (int cand : {s.label, s.partner_label}) {
                int i = cand - (g + 1);
                if (i >= 0 && i % 2 == 0 && 3 + i / 2 <= g) {
                    s.circle_index = 3 + i / 2;
                    break;
                }
            }
            if (s.circle_index == 0)
                throw GeometryViolation("could not assign a circle index to side " +
                                        std::to_string(s.label));
        }
    }

    // offsets: push the seam side lines outward, keep circle side lines
    for (int k = 0; k < l; ++k) {
        auto& s = sides[static_cast<std::size_t>(k)];
        double e_pre = off_dpp[static_cast<std::size_t>(k)];
        if (s.role == SideGeom::Seam) {
            s.e2 = e_pre;
            s.e1 = e_pre * params.offset_ratio_mid;
            s.offset = e_pre * params.offset_ratio_out;
        } else {
            s.offset = e_pre;
        }
        off_final[static_cast<std::size_t>(k)] = s.offset;
    }

    // polygon vertices: intersections of adjacent side lines
    auto line_intersect = [](Vec2 n1, double o1, Vec2 n2, double o2) {
        double det = n1.x * n2.y - n1.y * n2.x;
        if (std::abs(det) < 1e-12)
            throw GeometryViolation("adjacent side lines nearly parallel");
        return Vec2{(o1 * n2.y - o2 * n1.y) / det, (n1.x * o2 - n2.x * o1) / det};
    };
    for (int k = 0; k < l; ++k) {
        int prev = (k - 1 + l) % l, next = (k + 1) % l;
        auto& s = sides[static_cast<std::size_t>(k)];
        s.A = line_intersect(normals[static_cast<std::size_t>(prev)],
                             off_final[static_cast<std::size_t>(prev)],
                             normals[static_cast<std::size_t>(k)],
                             off_final[static_cast<std::size_t>(k)]);
        s.B = line_intersect(normals[static_cast<std::size_t>(k)],
                             off_final[static_cast<std::size_t>(k)],
                             normals[static_cast<std::size_t>(next)],
                             off_final[static_cast<std::size_t>(next)]);
        s.t_hat = rot90(s.n_out);
        s.w0 = dot(s.A, s.t_hat);
        s.w1 = dot(s.B, s.t_hat);
        if (!(s.w1 > s.w0))
            throw GeometryViolation("side w-range degenerate at label " +
                                    std::to_string(s.label));
    }

    // seam coefficients: magnitude |grad H| at the band midpoint on the ray,
    // sign aligning the band form's flow with the core flow
    for (auto& s : sides) {
        if (s.role != SideGeom::Seam) continue;
        Vec2 raydir{std::cos(s.ray_angle), std::sin(s.ray_angle)};
        Vec2 pmid = raydir * (0.5 * (s.e1 + s.offset));
        Dual2 d = core.eval(pmid);
        double mag = gradient(d).norm();
        Vec2 Xcore = ham_field(d);
        // X of <q, n_ray> is J n_ray = -raydir
        double align = dot(Xcore, raydir * (-1.0));
        s.kappa = (align >= 0 ? 1.0 : -1.0) * mag;
        if (mag < 1e-12)
            throw GeometryViolation("core field vanishes on a seam ray");
    }

    // junction splines per circle side
    for (auto& s : sides) {
        if (s.role != SideGeom::Circle) continue;
        auto zs = side_zeros(core, s.A, s.t_hat, s.w0, s.w1);
        if (s.single_circle) {
            if (zs.size() != 2)
                throw GeometryViolation("expected 2 level crossings on side " +
                                        std::to_string(s.label) + ", got " +
                                        std::to_string(zs.size()));
        } else {
            if (zs.size() != 1)
                throw GeometryViolation("expected 1 level crossing on side " +
                                        std::to_string(s.label) + ", got " +
                                        std::to_string(zs.size()));
        }
        // direction of the core flow at the first crossing
        auto entering = [&](double wz) {
            Vec2 q = s.A + (wz - s.w0) * s.t_hat;
            return dot(core.field(q), s.n_out) < 0;
        };
        if (s.single_circle) {
            double wa = zs[0], wb = zs[1];
            bool a_in = entering(wa);
            std::vector<double> kw{s.w0, wa, wb, s.w1};
            std::vector<double> kth =
                a_in ? std::vector<double>{PI / 2, PI, 2 * PI, 5 * PI / 2}
                     : std::vector<double>{-PI / 2, 0, PI, 3 * PI / 2};
            s.theta = SplineC3::through(kw, kth, params.window_frac);
        } else {
            // the pair: build the "upper" representative directly; its mirror
            // partner gets the complementary template so that the tube height
            // matches across the corner identifications
            double wz = zs[0];
            Vec2 mid = s.A + ((s.w0 + s.w1) / 2 - s.w0) * s.t_hat;
            bool upper = mid.y > 0;
            bool in = entering(wz);
            std::vector<double> kw{s.w0, wz, s.w1};
            std::vector<double> kth;
            if (upper) kth = in ? std::vector<double>{PI / 2, PI, 3 * PI / 2}
                                : std::vector<double>{-PI / 2, 0, PI / 2};
            else kth = in ? std::vector<double>{PI / 2, PI, 3 * PI / 2}
                          : std::vector<double>{3 * PI / 2, 2 * PI, 5 * PI / 2};
            s.theta = SplineC3::through(kw, kth, params.window_frac);
        }
        double dmax = s.theta.max_deriv();
        s.depth_skip = 0.55 * dmax * (geo->rJ * geo->rJ - geo->u2);
    }

    geo->sides = std::move(sides);

    // seam band positivity check (no new zeros in the bands)
    for (const auto& s : geo->sides) {
        if (s.role != SideGeom::Seam) continue;
        Vec2 raydir{std::cos(s.ray_angle), std::sin(s.ray_angle)};
        Vec2 Xform = raydir * (-s.kappa);
        for (int iu = 0; iu <= 20; ++iu)
            for (int iv = 0; iv <= 20; ++iv) {
                double wq = s.w0 + (s.w1 - s.w0) * iu / 20.0;
                double depth = s.e2 + (s.offset - s.e2) * iv / 20.0;
                Vec2 q = s.n_out * depth + s.t_hat * wq;
                if (dot(core.field(q), Xform) <= 0)
                    throw GeometryViolation(
                        "seam band flow alignment fails near side " +
                        std::to_string(s.label));
            }
    }
    return geo;
}

// ---------------------------------------------------------------------------
// BlendedField
// ---------------------------------------------------------------------------

Dual2 BlendedField::eval(Vec2 q) const {
    const DGeometry& G = *geom_;
    Dual2 x = Dual2::varx(q.x);
    Dual2 y = Dual2::vary(q.y);
    Dual2 H = core_.value(x, y);

    for (const auto& s : G.sides) {
        if (s.role == SideGeom::Seam) {
            double dn = q.x * s.n_out.x + q.y * s.n_out.y;
            if (dn <= s.e2) continue;
            Dual2 nd = x * s.n_out.x + y * s.n_out.y;
            Dual2 arg = (nd - s.e2) * (1.0 / (s.e1 - s.e2));
            Dual2 nu = smoothstep_cinf(arg);
            if (nu.v <= 0) continue;
            Dual2 ell = (x * s.n_ray.x + y * s.n_ray.y) * s.kappa;
            H = (1.0 - nu) * H + nu * ell;
        }
    }
    if (stage_ == BlendStage::Hhat) return H;

    for (const auto& s : G.sides) {
        if (s.role != SideGeom::Circle) continue;
        double dep = s.offset - (q.x * s.n_out.x + q.y * s.n_out.y);
        if (dep > s.depth_skip) continue;
        Dual2 w = x * s.t_hat.x + y * s.t_hat.y;
        Dual2 d = s.offset - (x * s.n_out.x + y * s.n_out.y);
        double jet[4];
        s.theta.eval(w.v, jet);
        Dual2 th = w.chain(jet[0], jet[1], jet[2]);
        Dual2 pw = w.chain(jet[1], jet[2], jet[3]);  // spline derivative
        Dual2 u = G.rJ * G.rJ - 2.0 * d / pw;
        if (u.v <= G.u2) continue;
        Dual2 tau = smoothstep_cinf((u - G.u2) * (1.0 / (G.u1 - G.u2)));
        double lam = G.lambda[static_cast<std::size_t>(s.circle_index)];
        Dual2 W = (-lam) * sqrt(u) * sin(th);
        H = (1.0 - tau) * H + tau * W;
    }
    return H;
}

FieldHandle BlendedField::handle() const {
    BlendedField copy = *this;
    FieldHandle f;
    f.eval = [copy](Vec2 p) { return copy.eval(p); };
    f.dx_bound = nullptr;  // sampled bound fallback
    return f;
}

BlendedField interpolated_field(const PlanarHamiltonian& H, BlendStage stage,
                                const GeometryParams& params) {
    std::vector<double> speeds(static_cast<std::size_t>(H.genus()), 1.0);
    auto geo = make_d_geometry(H, params, speeds);
    return BlendedField(H, geo, stage);
}

// ---------------------------------------------------------------------------
// build_surface
// ---------------------------------------------------------------------------

std::vector<ExactReal> default_slopes(int genus) {
    std::vector<ExactReal> base{ExactReal::sqrt2(), ExactReal::golden_ratio(),
                                ExactReal::sqrt3()};
    std::vector<ExactReal> out;
    for (int i = 0; i < genus; ++i) {
        ExactReal s = base[static_cast<std::size_t>(i % 3)];
        // keep slopes distinct across tori
        out.push_back(s + ExactReal(Rat(i / 3)));
    }
    return out;
}

ChartAtlas build_surface(const AtlasParams& params_in) {
    AtlasParams params = params_in;
    const int g = params.genus;
    if (g < 2) throw InvalidInput("build_surface: genus must be >= 2");
    if (params.slopes.empty()) params.slopes = default_slopes(g);
    if (static_cast<int>(params.slopes.size()) != g)
        throw InvalidInput("build_surface: need one slope per torus");
    for (const auto& s : params.slopes)
        if (s.is_rational() && !params.allow_rational_slopes)
            throw GeometryViolation("slope is rational; irrational flow required");

    double eps = params.geometry.eps;
    if (0.5 - eps / std::sqrt(2.0) < eps / 2.0)
        throw GeometryViolation("hole square does not fit the torus with margin");

    ChartAtlas atlas;
    atlas.params = params;

    double delta = (params.variant == Variant::pure) ? 0.0 : params.delta;
    PlanarHamiltonian core(g, params.variant, delta);

    std::vector<double> speeds;
    for (int i = 0; i < g; ++i) {
        TorusChart tc;
        tc.index = i + 1;
        tc.eps = eps;
        tc.u = 1.0;
        tc.slope = params.slopes[static_cast<std::size_t>(i)];
        tc.v = static_cast<double>(tc.slope.witness());
        tc.speed = std::hypot(tc.u, tc.v);
        tc.e_hat = Vec2{tc.u, tc.v} / tc.speed;
        tc.n_hat = rot90(tc.e_hat);
        atlas.tori.push_back(tc);
        speeds.push_back(tc.speed);

        TubeChart tb;
        tb.index = i + 1;
        tb.eps = eps;
        tb.rJ = eps / 4.0;
        tb.speed = tc.speed;
        atlas.tubes.push_back(tb);
    }

    atlas.geom = make_d_geometry(core, params.geometry, speeds);
    atlas.field = BlendedField(core, atlas.geom, BlendStage::Full);

    // pairing and transition descriptors
    std::set<int> seam_done;
    for (const auto& s : atlas.geom->sides) {
        if (s.role == SideGeom::Seam) {
            if (seam_done.count(s.label)) continue;
            seam_done.insert(s.label);
            seam_done.insert(s.partner_label);
            atlas.pairings.push_back(
                {"seam", s.label, s.partner_label, "mirror identification"});
        } else {
            atlas.transitions.push_back(
                {"tube-regionD", s.circle_index, s.label,
                 "junction circle patch"});
        }
    }
    for (int i = 1; i <= g; ++i) {
        atlas.pairings.push_back({"hole-square", i, i,
                                  "torus hole boundary to connector outer square"});
        atlas.transitions.push_back({"torus-tube", i, i, "flow frame change"});
    }

    // fixed points of the core (all lie well inside D'')
    double r2 = params.geometry.R2;
    auto zs = find_zeros(core, {-0.9 * r2, 0.9 * r2, -0.9 * r2, 0.9 * r2}, 1e-10);
    for (const auto& z : zs) atlas.core_zeros.push_back(z.location);
    return atlas;
}

// ---------------------------------------------------------------------------
// validate_atlas
// ---------------------------------------------------------------------------

namespace {

// D coordinates of the junction point at tube angle theta on a given side
Vec2 junction_point(const SideGeom& s, double theta) {
    double w = s.theta.inverse(theta);
    return s.A + (w - s.w0) * s.t_hat;
}

// composite D -> tube map near a circle side
Vec2 d_to_tube(const DGeometry& G, const SideGeom& s, Vec2 q) {
    double w = dot(q, s.t_hat);
    double d = s.offset - dot(q, s.n_out);
    double jet[4];
    s.theta.eval(w, jet);
    double u = G.rJ * G.rJ - 2.0 * d / jet[1];
    if (u < 0) throw InvalidInput("d_to_tube: point too deep");
    double r = std::sqrt(u);
    return {r * std::cos(jet[0]), r * std::sin(jet[0])};
}

}  // namespace

AtlasValidation validate_atlas(const ChartAtlas& atlas) {
    AtlasValidation v;
    const DGeometry& G = *atlas.geom;
    const int g = atlas.genus();

    // pairing tables against the parity rules
    v.pairing_tables_ok = true;
    for (const auto& s : G.sides) {
        int j = s.label;
        int expect;
        if (j == g - 1 || j == 3 * g - 3) expect = j;
        else if (j >= 1 && j <= g - 2) expect = 2 * g - 2 - j;
        else if (j >= g && j <= 2 * g - 3) expect = 2 * g - 2 - j;
        else if (j >= 2 * g - 2 && j <= 3 * g - 4) expect = 6 * g - 6 - j;
        else expect = 6 * g - 6 - j;
        if (s.partner_label != expect) v.pairing_tables_ok = false;
        // parity: seam side labels share the parity of g
        bool seam_expected = (j != g - 1) && (j != 3 * g - 3) && ((j - g) % 2 == 0);
        if (seam_expected != (s.role == SideGeom::Seam)) v.pairing_tables_ok = false;
    }

    // edge inventory: every D side appears in exactly one pairing/transition;
    // tori and tubes matched by construction descriptors
    std::map<int, int> side_hits;
    for (const auto& p : atlas.pairings)
        if (p.kind == "seam") {
            side_hits[p.a]++;
            side_hits[p.b]++;
        }
    for (const auto& t : atlas.transitions)
        if (t.kind == "tube-regionD") side_hits[t.b]++;
    v.edges_matched = true;
    for (const auto& s : G.sides)
        if (side_hits[s.label] != 1) v.edges_matched = false;

    // Euler characteristic of the CW structure: union-find on polygon corners
    // under the seam endpoint identifications, then add tubes and tori
    int l = G.l;
    std::vector<int> parent(static_cast<std::size_t>(2 * l));
    for (int i = 0; i < 2 * l; ++i) parent[static_cast<std::size_t>(i)] = i;
    std::function<int(int)> find = [&](int a) {
        while (parent[static_cast<std::size_t>(a)] != a)
            a = parent[static_cast<std::size_t>(a)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
        return a;
    };
    auto unite = [&](int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); };
    // corner ids: 2*ccw (start A) and 2*ccw+1 (end B); adjacent sides share
    for (const auto& s : G.sides) {
        int next = (s.ccw + 1) % l;
        unite(2 * s.ccw + 1, 2 * next);
    }
    for (const auto& s : G.sides) {
        if (s.role != SideGeom::Seam || s.partner_label < s.label) continue;
        const SideGeom& q = G.by_label(s.partner_label);
        // mirror identification swaps the ends
        unite(2 * s.ccw, 2 * q.ccw + 1);
        unite(2 * s.ccw + 1, 2 * q.ccw);
    }
    std::set<int> classes;
    for (int i = 0; i < 2 * l; ++i) classes.insert(find(i));
    int Vl = static_cast<int>(classes.size());
    int seams = 0;
    for (const auto& s : G.sides)
        if (s.role == SideGeom::Seam) seams++;
    int El = (seams / 2) + (l - seams);
    int chi_polygon = Vl - El + 1;
    v.euler_characteristic = chi_polygon - g;  // tubes: 0 each; tori minus disc: -1

    // transition determinant errors
    double max_det = 0;
    for (const auto& s : G.sides) {
        if (s.role != SideGeom::Circle) continue;
        for (int i = 1; i < 32; ++i) {
            double th0 = s.theta.th.front(), th1 = s.theta.th.back();
            double theta = th0 + (th1 - th0) * i / 32.0;
            Vec2 q = junction_point(s, theta);
            q = q - s.n_out * (0.2 * G.rJ * G.rJ / 2.0 * s.theta.deriv(dot(q, s.t_hat)));
            double hstep = 1e-6;
            Vec2 fx = (d_to_tube(G, s, {q.x + hstep, q.y}) -
                       d_to_tube(G, s, {q.x - hstep, q.y})) / (2 * hstep);
            Vec2 fy = (d_to_tube(G, s, {q.x, q.y + hstep}) -
                       d_to_tube(G, s, {q.x, q.y - hstep})) / (2 * hstep);
            double det = fx.x * fy.y - fx.y * fy.x;
            max_det = std::max(max_det, std::abs(det - 1.0));
        }
    }
    v.max_transition_det_error = max_det;

    // field coherence across interfaces
    double mism = 0;
    for (const auto& s : G.sides) {
        if (s.role == SideGeom::Circle) {
            // tube field (speed, 0) pushed through the inverse junction map
            const TubeChart& tb =
                atlas.tubes[static_cast<std::size_t>(s.circle_index - 1)];
            for (int i = 1; i < 24; ++i) {
                double th0 = s.theta.th.front(), th1 = s.theta.th.back();
                double theta = th0 + (th1 - th0) * i / 24.0;
                Vec2 q = junction_point(s, theta);
                Vec2 XD = atlas.field.X(q);
                // pushforward of XD must equal the constant tube field
                double hstep = 1e-6;
                Vec2 fx = (d_to_tube(G, s, {q.x + hstep, q.y}) -
                           d_to_tube(G, s, {q.x - hstep, q.y})) / (2 * hstep);
                Vec2 fy = (d_to_tube(G, s, {q.x, q.y + hstep}) -
                           d_to_tube(G, s, {q.x, q.y - hstep})) / (2 * hstep);
                Vec2 pushed{fx.x * XD.x + fy.x * XD.y, fx.y * XD.x + fy.y * XD.y};
                mism = std::max(mism, (pushed - Vec2{tb.speed, 0}).norm());
            }
        } else if (s.partner_label > s.label) {
            const SideGeom& p = G.by_label(s.partner_label);
            (void)p;
            for (int i = 1; i < 24; ++i) {
                double w = s.w0 + (s.w1 - s.w0) * i / 24.0;
                Vec2 q = s.n_out * s.offset +
                         s.t_hat * (w - dot(s.n_out * s.offset, s.t_hat));
                Vec2 qm{q.x, -q.y};
                Dual2 Hq = atlas.field.eval(q);
                Dual2 Hm = atlas.field.eval(qm);
                // mirror compatibility of the Hamiltonian forces field match
                double dval = std::abs(Hq.v - Hm.v);
                Vec2 gq = gradient(Hq), gm = gradient(Hm);
                double dgrad = std::hypot(gq.x - gm.x, gq.y + gm.y);
                mism = std::max(mism, std::max(dval, dgrad));
            }
        }
    }
    v.max_field_mismatch = mism;

    v.ok = v.pairing_tables_ok && v.edges_matched &&
           v.euler_characteristic == 2 - 2 * g && max_det < 1e-10 &&
           mism < 1e-9;
    return v;
}

// ---------------------------------------------------------------------------
// Blow-up and gluing
// ---------------------------------------------------------------------------

namespace {
// solve a small dense linear system in place
std::array<double, 6> solve6(double A[6][7]) {
    for (int c = 0; c < 6; ++c) {
        int piv = c;
        for (int r = c + 1; r < 6; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        std::swap(A[piv], A[c]);
        for (int r = 0; r < 6; ++r) {
            if (r == c) continue;
            double f = A[r][c] / A[c][c];
            for (int cc = c; cc <= 6; ++cc) A[r][cc] -= f * A[c][cc];
        }
    }
    std::array<double, 6> x{};
    for (int i = 0; i < 6; ++i) x[static_cast<std::size_t>(i)] = A[i][6] / A[i][i];
    return x;
}
}  // namespace

BlowupGluing make_blowup_gluing(double delta) {
    if (delta <= 0) throw InvalidInput("blow-up delta must be positive");
    BlowupGluing bg;
    bg.delta = delta;
    bg.eps_f = delta / 10.0;
    double a = delta + bg.eps_f, b = 2 * delta - bg.eps_f;
    // quintic p with p(a)=a^2/2, p'(a)=a, p''(a)=1, p(b)=b, p'(b)=1, p''(b)=0
    double A[6][7];
    auto row_val = [&](int r, double x, double rhs) {
        double p = 1;
        for (int k = 0; k < 6; ++k) { A[r][k] = p; p *= x; }
        A[r][6] = rhs;
    };
    auto row_d1 = [&](int r, double x, double rhs) {
        A[r][0] = 0;
        double p = 1;
        for (int k = 1; k < 6; ++k) { A[r][k] = k * p; p *= x; }
        A[r][6] = rhs;
    };
    auto row_d2 = [&](int r, double x, double rhs) {
        A[r][0] = A[r][1] = 0;
        double p = 1;
        for (int k = 2; k < 6; ++k) { A[r][k] = k * (k - 1) * p; p *= x; }
        A[r][6] = rhs;
    };
    row_val(0, a, a * a / 2);
    row_d1(1, a, a);
    row_d2(2, a, 1);
    row_val(3, b, b);
    row_d1(4, b, 1);
    row_d2(5, b, 0);
    bg.quintic = solve6(A);
    bg.check();
    return bg;
}

double BlowupGluing::f(double x) const {
    if (x <= delta + eps_f) return x * x / 2;
    if (x >= 2 * delta - eps_f) return x;
    double p = 0, xn = 1;
    for (double c : quintic) { p += c * xn; xn *= x; }
    return p;
}

double BlowupGluing::fprime(double x) const {
    if (x <= delta + eps_f) return x;
    if (x >= 2 * delta - eps_f) return 1.0;
    double p = 0, xn = 1;
    for (int k = 1; k < 6; ++k) { p += k * quintic[static_cast<std::size_t>(k)] * xn; xn *= x; }
    return p;
}

double BlowupGluing::finv(double rho) const {
    double lo = delta, hi = 2 * delta;
    for (int i = 0; i < 100; ++i) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) < rho) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double BlowupGluing::hval(double rho) const {
    double x = finv(rho);
    return x / fprime(x);  // finv(rho) * (finv)'(rho) with (finv)' = 1/f'(x)
}

void BlowupGluing::check() const {
    for (int i = 0; i <= 1000; ++i) {
        double x = delta + (2 * delta - delta) * i / 1000.0;
        if (fprime(x) <= 0)
            throw GeometryViolation("blow-up interpolant has f' <= 0");
    }
    for (int i = 0; i <= 1000; ++i) {
        double rho = delta * delta / 2 +
                     (2 * delta - delta * delta / 2) * i / 1000.0;
        if (hval(rho) <= 0)
            throw GeometryViolation("blow-up density h(rho) <= 0");
    }
    // continuity at the exact-piece joints
    double a = delta + eps_f, b = 2 * delta - eps_f;
    double pa = 0, xn = 1;
    for (double c : quintic) { pa += c * xn; xn *= a; }
    double pb = 0; xn = 1;
    for (double c : quintic) { pb += c * xn; xn *= b; }
    if (std::abs(pa - a * a / 2) > 1e-10 || std::abs(pb - b) > 1e-10)
        throw GeometryViolation("blow-up interpolant joints mismatch");
}

double BlowupChart::inner_det_error(int samples) const {
    // (x,y) -> (rho = r^2/2, theta): area form r dr dtheta -> drho dtheta is
    // exact; verify the induced Jacobian determinant numerically
    double worst = 0;
    Rng rng(7);
    for (int i = 0; i < samples; ++i) {
        double r = uniform(rng, 0.1 * delta, 0.95 * delta);
        double th = uniform(rng, 0.0, TWO_PI);
        Vec2 p{r * std::cos(th), r * std::sin(th)};
        double hstep = 1e-6;
        auto map = [&](Vec2 q) {
            double rr = q.norm();
            return Vec2{rr * rr / 2, std::atan2(q.y, q.x)};
        };
        Vec2 fx = (map({p.x + hstep, p.y}) - map({p.x - hstep, p.y})) / (2 * hstep);
        Vec2 fy = (map({p.x, p.y + hstep}) - map({p.x, p.y - hstep})) / (2 * hstep);
        double det = fx.x * fy.y - fx.y * fy.x;
        worst = std::max(worst, std::abs(std::abs(det) - 1.0));
    }
    return worst;
}

double BlowupChart::band_det_error(int samples) const {
    // (r,theta) -> (f(r), theta) carries r dr dtheta to h(rho) drho dtheta;
    // check that h(f(r)) f'(r) = r (the defining identity of the density)
    double worst = 0;
    Rng rng(11);
    for (int i = 0; i < samples; ++i) {
        double r = uniform(rng, delta * 1.001, 2 * delta * 0.999);
        double lhs = glue.hval(glue.f(r)) * glue.fprime(r);
        worst = std::max(worst, std::abs(lhs - r) / r);
    }
    return worst;
}

BlowupChart blowup_chart(const std::vector<FixedPointRecord>& zeros, Vec2 z,
                         double delta) {
    for (const auto& rec : zeros) {
        double d = (rec.location - z).norm();
        if (d > 1e-12 && d < 2 * delta)
            throw CrowdedDisc("another zero at distance " + std::to_string(d));
    }
    BlowupChart ch;
    ch.center = z;
    ch.delta = delta;
    ch.glue = make_blowup_gluing(delta);
    return ch;
}

double circle_direction_map(const Mat2& A, double theta) {
    Vec2 v = A * Vec2{std::cos(theta), std::sin(theta)};
    double n = v.norm();
    if (n < 1e-14) throw InvalidInput("circle_direction_map: singular direction");
    return std::atan2(v.y, v.x);
}

GluedF glue_F(std::function<double(double, double)> H) {
    if (std::abs(H(0.0, 0.0)) > 1e-12)
        throw NotVanishingAtOrigin("H(0,0) = " + std::to_string(H(0, 0)));
    GluedF F;
    F.H = std::move(H);
    return F;
}

double GluedF::operator()(double rho, double theta) const {
    if (rho > 0) {
        double r = std::sqrt(2 * rho);
        return H(r * std::cos(theta), r * std::sin(theta));
    }
    if (rho < 0) {
        double r = std::sqrt(-2 * rho);
        return -H(-r * std::cos(theta), -r * std::sin(theta));
    }
    return 0.0;
}

C1Report check_glue_regularity(const GluedF& F, int n_theta) {
    C1Report rep;
    double val = 0, drho = 0, dth = 0, d2peak = 0;
    bool c2 = true;
    for (int i = 0; i < n_theta; ++i) {
        double th = TWO_PI * i / n_theta;
        // one-sided first derivatives with a shrinking step sequence
        double prev_p = 0, prev_m = 0;
        double lim_p = 0, lim_m = 0;
        for (int k = 3; k <= 6; ++k) {
            double s = std::pow(10.0, -k);
            lim_p = (F(2 * s, th) - F(s, th)) / s;
            lim_m = (F(-s, th) - F(-2 * s, th)) / s;
            if (k > 3) {
                // require the sequences to settle
                if (std::abs(lim_p - prev_p) > 10 * std::abs(prev_p) + 1e-3) {}
            }
            prev_p = lim_p;
            prev_m = lim_m;
        }
        val = std::max(val, std::abs(F(1e-9, th) - F(-1e-9, th)));
        drho = std::max(drho, std::abs(lim_p - lim_m));
        double s = 1e-6;
        double t2 = 1e-4;
        dth = std::max(dth, std::abs((F(s, th + t2) - F(s, th - t2)) / (2 * t2) -
                                     (F(-s, th + t2) - F(-s, th - t2)) / (2 * t2)));
        // second differences in rho with shrinking steps: divergence detection
        double prev_d2 = 0;
        bool growing = true;
        for (int k = 2; k <= 5; ++k) {
            double h = std::pow(10.0, -k);
            double d2 = (F(2 * h, th) - 2 * F(h, th) + F(0, th)) / (h * h);
            d2peak = std::max(d2peak, std::abs(d2));
            if (k > 2 && std::abs(d2) < 2.0 * std::abs(prev_d2) + 1.0) growing = false;
            prev_d2 = d2;
        }
        if (growing) c2 = false;
    }
    rep.value_mismatch = val;
    rep.drho_mismatch = drho;
    rep.dtheta_mismatch = dth;
    rep.c1_ok = val < 1e-7 && drho < 1e-5 && dth < 1e-5;
    rep.c2_bounded = c2;
    rep.second_derivative_peak = d2peak;
    return rep;
}

}  // namespace symflow
