#include "symflow/localfields.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace symflow {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::pure: return "pure";
        case Variant::linear_perturbed: return "linear_perturbed";
        case Variant::cubic_perturbed: return "cubic_perturbed";
        case Variant::custom: return "custom";
    }
    return "?";
}

Variant variant_from_name(const std::string& s) {
    if (s == "pure") return Variant::pure;
    if (s == "linear_perturbed" || s == "linear") return Variant::linear_perturbed;
    if (s == "cubic_perturbed" || s == "cubic") return Variant::cubic_perturbed;
    if (s == "custom") return Variant::custom;
    throw InvalidInput("unknown variant: " + s);
}

PlanarHamiltonian::PlanarHamiltonian(int genus, Variant variant, double delta)
    : genus_(genus), variant_(variant), delta_(delta) {
    if (genus < 2) throw InvalidInput("PlanarHamiltonian: genus must be >= 2");
    if (variant == Variant::pure && delta != 0.0)
        throw InvalidInput("PlanarHamiltonian: pure variant requires delta = 0");
    if (variant != Variant::pure && variant != Variant::custom && delta == 0.0)
        throw InvalidInput("PlanarHamiltonian: perturbed variant requires delta != 0");
    h_ = 4 * genus - 2;
    a_ = TWO_PI / h_;
    slopes_.resize(static_cast<std::size_t>(h_ / 2));
    for (int j = 1; j <= h_ / 2; ++j) {
        // j*a < pi and j*a != pi/2 since h/2 is odd; the last factor is x itself
        slopes_[static_cast<std::size_t>(j - 1)] =
            (j == h_ / 2) ? 0.0 : std::tan(j * a_);
    }
    // monomial table: expand prod (x - s_j y), then the delta term
    std::map<std::pair<int, int>, double> acc;
    acc[{0, 0}] = 1.0;
    for (double s : slopes_) {
        std::map<std::pair<int, int>, double> next;
        for (const auto& [ij, c] : acc) {
            next[{ij.first + 1, ij.second}] += c;
            next[{ij.first, ij.second + 1}] -= c * s;
        }
        acc = std::move(next);
    }
    if (variant_ == Variant::linear_perturbed) acc[{1, 0}] += delta_;
    if (variant_ == Variant::cubic_perturbed) acc[{3, 0}] -= delta_;
    for (const auto& [ij, c] : acc)
        if (c != 0.0) mono_.push_back({ij.first, ij.second, c});
}

PlanarHamiltonian PlanarHamiltonian::custom_field(
    int genus, std::function<Dual2(Dual2, Dual2)> f) {
    PlanarHamiltonian H;
    H.genus_ = genus;
    H.variant_ = Variant::custom;
    H.h_ = 4 * genus - 2;
    H.a_ = TWO_PI / H.h_;
    H.custom_ = std::move(f);
    return H;
}

PlanarFieldRef PlanarHamiltonian::field_ref() const {
    PlanarHamiltonian copy = *this;
    return PlanarFieldRef{
        [copy](Vec2 p) { return copy.field(p); },
        [copy](Vec2 p) { return copy.field_jacobian(p); }};
}

double PlanarHamiltonian::third_derivative_bound(double mx, double my) const {
    // sup over the box of each third partial; return the max over the four
    double best = 0;
    for (int dx = 0; dx <= 3; ++dx) {
        int dy = 3 - dx;
        double bound = 0;
        for (const auto& m : mono_) {
            if (m.i < dx || m.j < dy) continue;
            double f = std::abs(m.c);
            for (int k = 0; k < dx; ++k) f *= (m.i - k);
            for (int k = 0; k < dy; ++k) f *= (m.j - k);
            f *= std::pow(mx, m.i - dx) * std::pow(my, m.j - dy);
            bound += f;
        }
        best = std::max(best, bound);
    }
    return best;
}

FieldHandle handle_of(const PlanarHamiltonian& H) {
    PlanarHamiltonian copy = H;
    FieldHandle f;
    f.eval = [copy](Vec2 p) { return copy.eval(p); };
    if (copy.has_certified_bounds()) {
        f.dx_bound = [copy](Rect cell) {
            double mx = std::max(std::abs(cell.xlo), std::abs(cell.xhi));
            double my = std::max(std::abs(cell.ylo), std::abs(cell.yhi));
            // |grad of DX| entries are third partials of H; sum the four
            // directional bounds (conservative operator-norm bound)
            return 4.0 * copy.third_derivative_bound(mx, my);
        };
    }
    return f;
}

namespace {

double sampled_dx_gradient_bound(const FieldHandle& f, Rect cell) {
    // fallback bound for non-polynomial fields: finite-difference estimate of
    // the DX variation over the cell, with a safety factor
    const int N = 3;
    double m = 0;
    Mat2 ref = f.DX(cell.center());
    double r = std::max(cell.half_w(), cell.half_h());
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            Vec2 p{cell.xlo + (cell.xhi - cell.xlo) * i / (N - 1.0),
                   cell.ylo + (cell.yhi - cell.ylo) * j / (N - 1.0)};
            Mat2 d = f.DX(p) - ref;
            double dist = std::max(1e-12, (p - cell.center()).norm());
            m = std::max(m, d.opnorm() / dist);
        }
    (void)r;
    return 3.0 * m + 1e-6;
}

struct Candidate {
    Vec2 p;
    bool newton_ok;
};

void subdivide(const FieldHandle& f, Rect cell, double tol, int depth,
               int depth_cap, std::vector<Candidate>& out) {
    double r = std::hypot(cell.half_w(), cell.half_h());
    Vec2 c = cell.center();
    Vec2 Xc = f.X(c);
    double dxb = f.dx_bound ? f.dx_bound(cell) : sampled_dx_gradient_bound(f, cell);
    double L = f.DX(c).opnorm() + r * dxb;
    if (Xc.norm() > L * r) return;  // no zero in this cell
    if (r <= std::max(tol, 1e-12) || depth >= depth_cap) {
        // try Newton from the center; keep the cell center as fallback for
        // degenerate zeros where Newton cannot converge
        Vec2 z = c;
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
            Vec2 X = f.X(z);
            Mat2 DX = f.DX(z);
            if (std::abs(DX.det()) < 1e-14) break;
            Vec2 step = DX.inverse() * X;
            z -= step;
            if ((z - c).norm() > 8 * r) break;  // left the cell
            if (step.norm() < tol * 1e-3 && f.X(z).norm() < 1e-10) {
                ok = true;
                break;
            }
        }
        out.push_back(ok ? Candidate{z, true} : Candidate{c, false});
        return;
    }
    double xm = c.x, ym = c.y;
    subdivide(f, {cell.xlo, xm, cell.ylo, ym}, tol, depth + 1, depth_cap, out);
    subdivide(f, {xm, cell.xhi, cell.ylo, ym}, tol, depth + 1, depth_cap, out);
    subdivide(f, {cell.xlo, xm, ym, cell.yhi}, tol, depth + 1, depth_cap, out);
    subdivide(f, {xm, cell.xhi, ym, cell.yhi}, tol, depth + 1, depth_cap, out);
}

}  // namespace

std::vector<FixedPointRecord> find_zeros(const FieldHandle& f, Rect region,
                                         double tol, int depth_cap) {
    if (tol <= 0) throw InvalidInput("find_zeros: tol must be positive");
    std::vector<Candidate> cands;
    subdivide(f, region, tol, 0, depth_cap, cands);

    // cluster candidates
    std::vector<std::vector<Candidate>> clusters;
    const double merge_r = 64 * tol;
    for (const auto& cd : cands) {
        bool placed = false;
        for (auto& cl : clusters) {
            if ((cl.front().p - cd.p).norm() < merge_r) {
                cl.push_back(cd);
                placed = true;
                break;
            }
        }
        if (!placed) clusters.push_back({cd});
    }

    std::vector<FixedPointRecord> zeros;
    for (auto& cl : clusters) {
        // prefer a Newton-converged representative, else average the cells
        Vec2 z{0, 0};
        bool newton = false;
        for (const auto& cd : cl)
            if (cd.newton_ok) {
                z = cd.p;
                newton = true;
                break;
            }
        if (!newton) {
            for (const auto& cd : cl) z += cd.p;
            z = z / double(cl.size());
        }
        if (f.X(z).norm() > std::sqrt(tol)) continue;  // spurious cluster
        FixedPointRecord rec;
        rec.location = z;
        rec.jacobian = f.DX(z);
        rec.nondegenerate = std::abs(rec.jacobian.det()) > 1e-8;
        zeros.push_back(rec);
    }

    // TolTooCoarse when two distinct zeros approach within 10 tol
    for (std::size_t i = 0; i < zeros.size(); ++i)
        for (std::size_t j = i + 1; j < zeros.size(); ++j) {
            double d = (zeros[i].location - zeros[j].location).norm();
            if (d < 10 * tol)
                throw TolTooCoarse("zeros separated by " + std::to_string(d));
        }

    // indices: winding number on a small circle (the sign of det for
    // nondegenerate zeros, cross-checked)
    for (auto& z : zeros) {
        double iso = 0.1;
        for (const auto& o : zeros)
            if (&o != &z)
                iso = std::min(iso, (o.location - z.location).norm() / 3.0);
        double radius = std::max(1e-5, iso);
        z.lefschetz_index =
            winding_index([&f](Vec2 p) { return f.X(p); }, z.location, radius);
        if (z.nondegenerate) {
            int expect = (z.jacobian.det() < 0) ? -1 : 1;
            if (expect != z.lefschetz_index)
                throw AngleJump("winding disagrees with Jacobian sign at a nondegenerate zero");
        }
    }
    std::sort(zeros.begin(), zeros.end(), [](const auto& a, const auto& b) {
        if (a.location.x != b.location.x) return a.location.x < b.location.x;
        return a.location.y < b.location.y;
    });
    return zeros;
}

std::vector<FixedPointRecord> find_zeros(const PlanarHamiltonian& H, Rect region,
                                         double tol) {
    auto zeros = find_zeros(handle_of(H), region, tol);
    for (auto& z : zeros) {
        double iso = 0.25;
        for (const auto& o : zeros)
            if (&o != &z)
                iso = std::min(iso, (o.location - z.location).norm() / 3.0);
        z.hyperbolic_regions = hyperbolic_regions(H, z.location, iso);
    }
    return zeros;
}

namespace {

struct AngleSample {
    double t;
    double angle;  // continuous (unwrapped against previous)
};

}  // namespace

int winding_index(const std::function<Vec2(Vec2)>& X, Vec2 center, double radius) {
    auto at = [&](double t) {
        return X({center.x + radius * std::cos(t), center.y + radius * std::sin(t)});
    };
    // min |X| guard
    for (int i = 0; i < 512; ++i) {
        if (at(TWO_PI * i / 512.0).norm() < 1e-8)
            throw ZeroOnContour("field vanishes on the contour");
    }
    std::vector<double> ts;
    int n0 = 256;
    ts.reserve(static_cast<std::size_t>(n0) + 1);
    for (int i = 0; i <= n0; ++i) ts.push_back(TWO_PI * i / n0);
    double total = 0;
    Vec2 prev = at(ts[0]);
    std::size_t i = 1;
    int budget = 1 << 22;
    while (i < ts.size()) {
        Vec2 cur = at(ts[i]);
        double d = std::atan2(cross(prev, cur), dot(prev, cur));
        if (std::abs(d) >= PI / 2.0) {
            if (ts[i] - ts[i - 1] < 1e-12 || --budget <= 0)
                throw AngleJump("angle jump >= pi/2 after maximal refinement");
            ts.insert(ts.begin() + static_cast<long>(i), 0.5 * (ts[i - 1] + ts[i]));
            continue;
        }
        total += d;
        prev = cur;
        ++i;
    }
    double w = total / TWO_PI;
    int wi = static_cast<int>(std::lround(w));
    if (std::abs(w - wi) > 1e-6)
        throw AngleJump("winding not integral: " + std::to_string(w));
    return wi;
}

int winding_index(const PlanarHamiltonian& H, Vec2 center, double radius) {
    return winding_index([&H](Vec2 p) { return H.field(p); }, center, radius);
}

int hyperbolic_regions(const FieldHandle& f, Vec2 zero, double radius) {
    double H0 = f.H(zero);
    auto g = [&](double t) {
        return f.H({zero.x + radius * std::cos(t), zero.y + radius * std::sin(t)}) - H0;
    };
    // field must not vanish on the contour (same guard as winding_index)
    for (int i = 0; i < 512; ++i) {
        double t = TWO_PI * i / 512.0;
        if (f.X({zero.x + radius * std::cos(t), zero.y + radius * std::sin(t)}).norm() < 1e-8)
            throw ZeroOnContour("field vanishes on the contour");
    }
    int n = 1 << 12;
    int changes = 0;
    double prev = g(0.0);
    for (int i = 1; i <= n; ++i) {
        double cur = g(TWO_PI * i / n);
        if (prev != 0 && cur != 0 && (prev < 0) != (cur < 0)) ++changes;
        if (cur != 0) prev = cur;
    }
    return changes;
}

int hyperbolic_regions(const PlanarHamiltonian& H, Vec2 zero, double radius) {
    return hyperbolic_regions(handle_of(H), zero, radius);
}

}  // namespace symflow
