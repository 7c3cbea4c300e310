#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "symflow/exact.hpp"
#include "symflow/localfields.hpp"

namespace symflow {

// ---------------------------------------------------------------------------
// Monotone C^3 spline: affine pieces through knots, blended by a septic
// polynomial step inside small windows around interior knots. Knot values are
// attained exactly. Used to reparametrize a polygon side onto a tube angle.
// ---------------------------------------------------------------------------
struct SplineC3 {
    std::vector<double> w;    // knots, strictly increasing
    std::vector<double> th;   // values at knots
    std::vector<double> hw;   // window half-widths at interior knots

    static SplineC3 through(std::vector<double> knots_w,
                            std::vector<double> knots_th,
                            double window_frac = 0.3);

    void eval(double x, double out[4]) const;  // value, d1, d2, d3
    double operator()(double x) const {
        double j[4];
        eval(x, j);
        return j[0];
    }
    double deriv(double x) const {
        double j[4];
        eval(x, j);
        return j[1];
    }
    double inverse(double theta) const;  // monotone increasing inverse
    void check_monotone() const;         // throws GeometryViolation
    double max_deriv() const;
};

// ---------------------------------------------------------------------------
// The polygon D with its side roles, seam blends and junction collars.
// ---------------------------------------------------------------------------
struct SideGeom {
    enum Role { Seam, Circle };

    int label = 0;        // spec-style side label, 1..l
    int ccw = 0;          // position index, counterclockwise from the right side
    Role role = Seam;
    int partner_label = 0;  // seam partner / other circle side (self for single)
    int circle_index = 0;   // 1..g for circle sides (= attached torus index)
    bool single_circle = false;

    Vec2 A, B;            // endpoints, counterclockwise
    Vec2 t_hat, n_out;    // unit tangent (A->B) and outward normal
    double offset = 0;    // <q, n_out> on the side line
    double w0 = 0, w1 = 0;  // w-range, w = <q, t_hat>

    // seam band data
    double ray_angle = 0;   // separatrix ray bisecting the side
    Vec2 n_ray;             // unit normal of the ray line
    double kappa = 0;       // signed coefficient of the band form kappa*<q,n_ray>
    double e2 = 0, e1 = 0;  // D'' and D' line offsets (e2 < e1 < offset)

    // circle collar data
    SplineC3 theta;        // tube angle as a function of w
    double depth_skip = 0;  // depths beyond this cannot reach u > u2
};

struct DGeometry {
    int genus = 2;
    int l = 4, h = 6;
    double R2 = 0.8;      // vertex radius of D''
    double rJ = 0.1;      // junction circle radius (= eps/4)
    double u1 = 0, u2 = 0;  // collar profile bounds in u = 2 rho
    std::vector<SideGeom> sides;        // by ccw index
    std::vector<double> lambda;         // per circle 1..g (index 0 unused)

    const SideGeom& by_label(int label) const;
    Rect bounding_box() const;
    // negative inside; max over sides of (<q,n_out> - offset)
    double boundary_gap(Vec2 q) const;
    std::vector<const SideGeom*> circle_sides(int circle_index) const;
};

enum class BlendStage { Hhat, Full };

// The blended D-chart Hamiltonian: core variant inside D'', linear seam forms
// outside D', junction collars matching the connector tubes.
class BlendedField {
  public:
    BlendedField() = default;
    BlendedField(PlanarHamiltonian core, std::shared_ptr<const DGeometry> geom,
                 BlendStage stage)
        : core_(std::move(core)), geom_(std::move(geom)), stage_(stage) {}

    Dual2 eval(Vec2 q) const;
    double value(Vec2 q) const { return eval(q).v; }
    Vec2 X(Vec2 q) const { return ham_field(eval(q)); }
    Mat2 DX(Vec2 q) const { return ham_jacobian(eval(q)); }
    FieldHandle handle() const;

    const PlanarHamiltonian& core() const { return core_; }
    const DGeometry& geom() const { return *geom_; }
    BlendStage stage() const { return stage_; }

  private:
    PlanarHamiltonian core_{2, Variant::pure, 0.0};
    std::shared_ptr<const DGeometry> geom_;
    BlendStage stage_ = BlendStage::Full;
};

// Geometry parameters for interpolated_field / build_surface.
struct GeometryParams {
    double R2 = 0.8;              // D'' vertex radius
    double offset_ratio_mid = 7.0 / 6.0;  // D' seam-line offset / D''
    double offset_ratio_out = 8.0 / 6.0;  // D  seam-line offset / D''
    double eps = 0.4;             // torus hole square side
    double window_frac = 0.3;     // spline blend window fraction
};

// Builds the nested D''/D'/D polygons with the vertex condition, locates the
// level crossings on the circle sides and lays out the junction splines.
// Throws GeometryViolation on nesting/vertex/spline failures.
std::shared_ptr<const DGeometry> make_d_geometry(
    const PlanarHamiltonian& core, const GeometryParams& params,
    const std::vector<double>& tube_speeds);

// The two blend stages of the construction on a default geometry.
BlendedField interpolated_field(const PlanarHamiltonian& H, BlendStage stage,
                                const GeometryParams& params = {});

// ---------------------------------------------------------------------------
// Charts and the glued surface
// ---------------------------------------------------------------------------

enum class ChartKind { torus, regionD, cylinderBand, connector };

struct TorusChart {
    int index = 1;          // 1..g
    Vec2 hole_center{0.5, 0.5};
    double eps = 0.4;
    double u = 1.0, v = 0;  // field components
    ExactReal slope;        // v/u as an exact value
    Vec2 e_hat, n_hat;      // flow frame
    double speed = 1.0;
};

struct TubeChart {
    int index = 1;   // = circle/torus index
    double eps = 0.4;
    double rJ = 0.1;
    double speed = 1.0;  // field is (speed, 0); Hamiltonian -speed * eta
};

struct PairingDesc {
    std::string kind;  // "seam", "hole-square", "junction-circle"
    int a = 0, b = 0;  // labels / chart indices
    std::string detail;
};

struct TransitionDesc {
    std::string kind;  // "torus-tube", "tube-regionD"
    int a = 0, b = 0;
    std::string detail;
};

struct AtlasParams {
    int genus = 2;
    Variant variant = Variant::pure;
    double delta = 0.1;
    GeometryParams geometry;
    std::vector<ExactReal> slopes;  // per torus; default sqrt2/phi/sqrt3 cycle
    bool allow_rational_slopes = false;  // negative-control override
};

struct ChartAtlas {
    AtlasParams params;
    std::vector<TorusChart> tori;
    std::vector<TubeChart> tubes;
    std::shared_ptr<const DGeometry> geom;
    BlendedField field;  // the D-chart Hamiltonian (Full stage)
    std::vector<PairingDesc> pairings;
    std::vector<TransitionDesc> transitions;
    std::vector<Vec2> core_zeros;  // fixed points of the core field in D''

    int genus() const { return params.genus; }
};

ChartAtlas build_surface(const AtlasParams& params);

// default irrational slopes: sqrt2, golden ratio, sqrt3, sqrt2+1, ...
std::vector<ExactReal> default_slopes(int genus);

struct AtlasValidation {
    bool edges_matched = false;
    int euler_characteristic = 0;
    double max_transition_det_error = 0;
    double max_field_mismatch = 0;
    double min_interior_field_norm = 0;  // over band sweep away from zeros
    bool pairing_tables_ok = false;
    bool ok = false;
};

AtlasValidation validate_atlas(const ChartAtlas& atlas);

// ---------------------------------------------------------------------------
// Blow-up and gluing coordinates
// ---------------------------------------------------------------------------

// Interpolating diffeomorphism f : [delta, 2 delta] -> [delta^2/2, 2 delta]
// equal to x^2/2 near delta and to x near 2 delta, quintic in between.
struct BlowupGluing {
    double delta = 0.1;
    double eps_f = 0.01;           // exact-piece width (delta/10)
    std::array<double, 6> quintic{};  // middle piece coefficients

    double f(double x) const;
    double fprime(double x) const;
    double finv(double rho) const;
    // h(rho) = finv(rho) * finv'(rho), the density of the glued area form
    double hval(double rho) const;
    void check() const;  // f' > 0 and h > 0 sampled; throws GeometryViolation
};

BlowupGluing make_blowup_gluing(double delta);

struct BlowupChart {
    Vec2 center;
    double delta;
    BlowupGluing glue;
    // inner transition (r,theta) -> (rho = r^2/2, theta); band transition
    // (r,theta) -> (f(r), theta). Jacobian determinants of the induced maps on
    // (x,y) are checked by validate().
    double inner_det_error(int samples = 1000) const;
    double band_det_error(int samples = 1000) const;
};

// Throws CrowdedDisc if another zero lies within 2 delta of z.
BlowupChart blowup_chart(const std::vector<FixedPointRecord>& zeros, Vec2 z,
                         double delta);

// Direction map induced on the boundary circle by a linear map A.
double circle_direction_map(const Mat2& A, double theta);

// F on the doubled cylinder from a Hamiltonian with H(0) = 0.
struct GluedF {
    std::function<double(double, double)> H;  // H(x, y)
    double operator()(double rho, double theta) const;
};

GluedF glue_F(std::function<double(double, double)> H);

struct C1Report {
    bool c1_ok = false;
    double value_mismatch = 0;      // F continuity across rho = 0
    double drho_mismatch = 0;       // dF/drho one-sided limits
    double dtheta_mismatch = 0;     // dF/dtheta continuity
    bool c2_bounded = true;
    double second_derivative_peak = 0;
};

C1Report check_glue_regularity(const GluedF& F, int n_theta = 16);

}  // namespace symflow
