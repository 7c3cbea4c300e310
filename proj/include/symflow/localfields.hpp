#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "symflow/core.hpp"
#include "symflow/sp2index.hpp"

namespace symflow {

enum class Variant { pure, linear_perturbed, cubic_perturbed, custom };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& s);

// The local Hamiltonians of the surface constructions:
//   pure:             H0 = prod_{j=1..h/2} (x - tan(j a) y),  h = 4g-2, a = 2pi/h
//   linear_perturbed: H0 + delta x
//   cubic_perturbed:  H0 - delta x^3
// The product form is kept for evaluation (derivatives by the product rule via
// dual numbers); a monomial table is kept for certified derivative bounds.
class PlanarHamiltonian {
  public:
    PlanarHamiltonian(int genus, Variant variant, double delta = 0.0);

    // custom local Hamiltonian hook (degree bound needed for zero exclusion)
    static PlanarHamiltonian custom_field(int genus,
                                          std::function<Dual2(Dual2, Dual2)> f);

    int genus() const { return genus_; }
    Variant variant() const { return variant_; }
    double delta() const { return delta_; }
    int h() const { return h_; }
    double sector_angle() const { return a_; }
    const std::vector<double>& slopes() const { return slopes_; }

    template <class S>
    S value(const S& x, const S& y) const {
        if (custom_) return eval_custom(x, y);
        S prod(1.0);
        for (double s : slopes_) prod *= (x - s * y);
        if (variant_ == Variant::linear_perturbed) prod += delta_ * x;
        if (variant_ == Variant::cubic_perturbed) prod -= delta_ * (x * x * x);
        return prod;
    }

    double value_at(Vec2 p) const { return value(p.x, p.y); }
    Dual2 eval(Vec2 p) const { return value(Dual2::varx(p.x), Dual2::vary(p.y)); }
    Vec2 field(Vec2 p) const { return ham_field(eval(p)); }
    Mat2 field_jacobian(Vec2 p) const { return ham_jacobian(eval(p)); }
    PlanarFieldRef field_ref() const;

    // sup over |x|<=mx, |y|<=my of each third partial of H (certified bound
    // from the monomial table); used by the zero-finder exclusion test
    double third_derivative_bound(double mx, double my) const;
    bool has_certified_bounds() const { return !mono_.empty(); }

  private:
    PlanarHamiltonian() = default;
    Dual2 eval_custom(const Dual2& x, const Dual2& y) const {
        return custom_(x, y);
    }
    double eval_custom(const double& x, const double& y) const {
        return custom_(Dual2(x), Dual2(y)).v;
    }

    int genus_ = 2;
    Variant variant_ = Variant::pure;
    double delta_ = 0;
    int h_ = 6;
    double a_ = 0;
    std::vector<double> slopes_;
    std::function<Dual2(Dual2, Dual2)> custom_;
    struct Mono { int i, j; double c; };
    std::vector<Mono> mono_;  // monomial table of H
};

struct FixedPointRecord {
    Vec2 location;
    int lefschetz_index = 0;
    Mat2 jacobian;
    bool nondegenerate = false;
    std::optional<int> hyperbolic_regions;
};

struct Rect {
    double xlo, xhi, ylo, yhi;
    Vec2 center() const { return {(xlo + xhi) / 2, (ylo + yhi) / 2}; }
    double half_w() const { return (xhi - xlo) / 2; }
    double half_h() const { return (yhi - ylo) / 2; }
};

// A planar field with second-order evaluation; adapters exist for
// PlanarHamiltonian and for the blended chart fields.
struct FieldHandle {
    std::function<Dual2(Vec2)> eval;        // Hamiltonian value with 2 jets
    std::function<double(Rect)> dx_bound;   // sup of |grad DX| over a cell; may be null
    Vec2 X(Vec2 p) const { return ham_field(eval(p)); }
    Mat2 DX(Vec2 p) const { return ham_jacobian(eval(p)); }
    double H(Vec2 p) const { return eval(p).v; }
};

FieldHandle handle_of(const PlanarHamiltonian& H);

// All zeros of the Hamiltonian field in the region, located to within tol by
// quadtree subdivision with derivative-bound exclusion plus Newton polishing.
std::vector<FixedPointRecord> find_zeros(const FieldHandle& f, Rect region,
                                         double tol, int depth_cap = 40);
std::vector<FixedPointRecord> find_zeros(const PlanarHamiltonian& H, Rect region,
                                         double tol);

// Winding number of the field around the circle (Poincare index of the
// enclosed zero set), by accumulated continuous angle with adaptive sampling.
int winding_index(const std::function<Vec2(Vec2)>& X, Vec2 center, double radius);
int winding_index(const PlanarHamiltonian& H, Vec2 center, double radius);

// Number of hyperbolic sectors at an isolated zero: sign-changing zeros of
// H - H(zero) on the circle around it.
int hyperbolic_regions(const PlanarHamiltonian& H, Vec2 zero, double radius);
int hyperbolic_regions(const FieldHandle& f, Vec2 zero, double radius);

}  // namespace symflow
