#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace symflow {

// ---------------------------------------------------------------------------
// Errors. Each named error from the operation contracts gets its own type so
// callers can catch precisely.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SYMFLOW_ERROR(Name)                                                  \
    struct Name : Error {                                                    \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {}  \
    }

SYMFLOW_ERROR(DegenerateEndpoint);
SYMFLOW_ERROR(InsufficientSampling);
SYMFLOW_ERROR(NotAFixedPoint);
SYMFLOW_ERROR(ZeroDivision);
SYMFLOW_ERROR(FloorExhausted);
SYMFLOW_ERROR(TolTooCoarse);
SYMFLOW_ERROR(ZeroOnContour);
SYMFLOW_ERROR(AngleJump);
SYMFLOW_ERROR(GeometryViolation);
SYMFLOW_ERROR(FieldMismatch);
SYMFLOW_ERROR(CrowdedDisc);
SYMFLOW_ERROR(NotVanishingAtOrigin);
SYMFLOW_ERROR(StuckAtBoundary);
SYMFLOW_ERROR(LeftAtlas);
SYMFLOW_ERROR(HorizonExceeded);
SYMFLOW_ERROR(InvalidInput);

#undef SYMFLOW_ERROR

// ---------------------------------------------------------------------------
// 2-vectors and 2x2 matrices
// ---------------------------------------------------------------------------

struct Vec2 {
    double x = 0, y = 0;
    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}
    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
// 90-degree counterclockwise rotation (the standard complex structure J).
inline Vec2 rot90(const Vec2& v) { return {-v.y, v.x}; }

struct Mat2 {
    // row-major: [a b; c d]
    double a = 0, b = 0, c = 0, d = 0;
    Mat2() = default;
    Mat2(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

    static Mat2 identity() { return {1, 0, 0, 1}; }
    static Mat2 rotation(double phi) {
        double cp = std::cos(phi), sp = std::sin(phi);
        return {cp, -sp, sp, cp};
    }

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
    Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    Mat2 inverse() const {
        double dt = det();
        if (dt == 0.0) throw ZeroDivision("singular 2x2 matrix");
        return {d / dt, -b / dt, -c / dt, a / dt};
    }
    Mat2 transpose() const { return {a, c, b, d}; }
    double norm() const {  // Frobenius
        return std::sqrt(a * a + b * b + c * c + d * d);
    }
    double opnorm() const {  // largest singular value
        double t = a * a + b * b + c * c + d * d;
        double dt = det();
        double disc = std::max(0.0, t * t / 4.0 - dt * dt);
        return std::sqrt(t / 2.0 + std::sqrt(disc));
    }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

// J = [0 -1; 1 0], the matrix of v -> rot90(v).
inline Mat2 Jmat() { return {0, -1, 1, 0}; }

// exp of a traceless 2x2 matrix (closed form: M^2 = -det(M) I).
inline Mat2 expm_sl2(const Mat2& m) {
    double q = m.det();
    double co, si;  // exp = co*I + si*M
    if (q > 1e-14) {
        double w = std::sqrt(q);
        co = std::cos(w);
        si = std::sin(w) / w;
    } else if (q < -1e-14) {
        double w = std::sqrt(-q);
        co = std::cosh(w);
        si = std::sinh(w) / w;
    } else {
        co = 1.0;
        si = 1.0;
    }
    return Mat2{co, 0, 0, co} + si * m;
}

// log of an Sp(2) matrix with trace > -2 (principal branch, lands in sl(2)).
inline Mat2 logm_sp2(const Mat2& A) {
    double tau = A.trace() / 2.0;
    if (tau <= -1.0)
        throw InvalidInput("logm_sp2: trace <= -2, no principal sl(2) log");
    Mat2 N = A - Mat2{tau, 0, 0, tau};
    double f;
    if (tau < 1.0 - 1e-12) {
        double phi = std::acos(std::max(-1.0, std::min(1.0, tau)));
        f = phi / std::sin(phi);
    } else if (tau > 1.0 + 1e-12) {
        double mu = std::acosh(tau);
        f = mu / std::sinh(mu);
    } else {
        f = 1.0;
    }
    return f * N;
}

// ---------------------------------------------------------------------------
// Second-order dual numbers in two variables: value, gradient, Hessian.
// One templated evaluation of a Hamiltonian yields field and linearization.
// ---------------------------------------------------------------------------

struct Dual2 {
    double v = 0;          // value
    double gx = 0, gy = 0;  // gradient
    double hxx = 0, hxy = 0, hyy = 0;  // Hessian

    Dual2() = default;
    Dual2(double c) : v(c) {}
    static Dual2 varx(double x) { Dual2 d(x); d.gx = 1; return d; }
    static Dual2 vary(double y) { Dual2 d(y); d.gy = 1; return d; }

    Dual2 operator-() const {
        Dual2 r;
        r.v = -v; r.gx = -gx; r.gy = -gy; r.hxx = -hxx; r.hxy = -hxy; r.hyy = -hyy;
        return r;
    }
    Dual2 operator+(const Dual2& o) const {
        Dual2 r;
        r.v = v + o.v; r.gx = gx + o.gx; r.gy = gy + o.gy;
        r.hxx = hxx + o.hxx; r.hxy = hxy + o.hxy; r.hyy = hyy + o.hyy;
        return r;
    }
    Dual2 operator-(const Dual2& o) const { return *this + (-o); }
    Dual2 operator*(const Dual2& o) const {
        Dual2 r;
        r.v = v * o.v;
        r.gx = gx * o.v + v * o.gx;
        r.gy = gy * o.v + v * o.gy;
        r.hxx = hxx * o.v + 2 * gx * o.gx + v * o.hxx;
        r.hxy = hxy * o.v + gx * o.gy + gy * o.gx + v * o.hxy;
        r.hyy = hyy * o.v + 2 * gy * o.gy + v * o.hyy;
        return r;
    }
    Dual2& operator+=(const Dual2& o) { *this = *this + o; return *this; }
    Dual2& operator-=(const Dual2& o) { *this = *this - o; return *this; }
    Dual2& operator*=(const Dual2& o) { *this = *this * o; return *this; }

    // chain rule for scalar function with derivatives f1 = phi', f2 = phi''
    Dual2 chain(double f0, double f1, double f2) const {
        Dual2 r;
        r.v = f0;
        r.gx = f1 * gx; r.gy = f1 * gy;
        r.hxx = f1 * hxx + f2 * gx * gx;
        r.hxy = f1 * hxy + f2 * gx * gy;
        r.hyy = f1 * hyy + f2 * gy * gy;
        return r;
    }
    Dual2 operator/(const Dual2& o) const {
        double iv = 1.0 / o.v;
        return *this * o.chain(iv, -iv * iv, 2 * iv * iv * iv);
    }
};

inline Dual2 operator+(double c, const Dual2& d) { return Dual2(c) + d; }
inline Dual2 operator-(double c, const Dual2& d) { return Dual2(c) - d; }
inline Dual2 operator*(double c, const Dual2& d) { return Dual2(c) * d; }
inline Dual2 operator/(double c, const Dual2& d) { return Dual2(c) / d; }

inline Dual2 sqrt(const Dual2& d) {
    double s = std::sqrt(d.v);
    return d.chain(s, 0.5 / s, -0.25 / (s * d.v));
}
inline Dual2 sin(const Dual2& d) {
    double s = std::sin(d.v), c = std::cos(d.v);
    return d.chain(s, c, -s);
}
inline Dual2 cos(const Dual2& d) {
    double s = std::sin(d.v), c = std::cos(d.v);
    return d.chain(c, -s, -c);
}
inline Dual2 exp(const Dual2& d) {
    double e = std::exp(d.v);
    return d.chain(e, e, e);
}

// value/gradient/Hessian accessors used by field evaluation
inline Vec2 gradient(const Dual2& d) { return {d.gx, d.gy}; }
// Hamiltonian field X_H = (-dH/dy, dH/dx)
inline Vec2 ham_field(const Dual2& d) { return {-d.gy, d.gx}; }
// Jacobian of the Hamiltonian field: J * Hess(H)
inline Mat2 ham_jacobian(const Dual2& d) {
    return {-d.hxy, -d.hyy, d.hxx, d.hxy};
}

// C-infinity step: 0 for u<=0, 1 for u>=1, strictly monotone between.
template <class S>
S smoothstep_cinf(const S& u);

inline double smoothstep_cinf_raw(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    double e0 = std::exp(-1.0 / u);
    double e1 = std::exp(-1.0 / (1.0 - u));
    return e0 / (e0 + e1);
}

template <>
inline double smoothstep_cinf<double>(const double& u) { return smoothstep_cinf_raw(u); }

template <>
inline Dual2 smoothstep_cinf<Dual2>(const Dual2& u) {
    if (u.v <= 0.0) return Dual2(0.0);
    if (u.v >= 1.0) return Dual2(1.0);
    Dual2 e0 = exp(-1.0 / u);
    Dual2 e1 = exp(-1.0 / (1.0 - u));
    return e0 / (e0 + e1);
}

// ---------------------------------------------------------------------------
// Deterministic RNG helpers
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline constexpr double PI = 3.14159265358979323846;
inline constexpr double TWO_PI = 2.0 * PI;

inline double wrap_pi(double a) {  // wrap to (-pi, pi]
    a = std::fmod(a, TWO_PI);
    if (a > PI) a -= TWO_PI;
    if (a <= -PI) a += TWO_PI;
    return a;
}

inline double wrap_unit(double a) {  // wrap to [0,1)
    a -= std::floor(a);
    if (a >= 1.0) a -= 1.0;
    return a;
}

}  // namespace symflow
