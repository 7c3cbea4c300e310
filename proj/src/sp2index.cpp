#include "symflow/sp2index.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace symflow {

namespace {

double det_minus_id(const Mat2& m) {
    // det(M - I) = 2 - tr(M) on Sp(2)
    return 2.0 - m.trace();
}

// Rotation invariant on Sp(2): oriented eigenvalue angle on the elliptic
// locus, 0 / pi on the positive / negative hyperbolic locus.
double rotation_angle(const Mat2& m) {
    double tau = m.trace() / 2.0;
    if (tau >= 1.0) return 0.0;
    if (tau <= -1.0) return PI;
    double phi = std::acos(tau);
    return (m.c - m.b) >= 0 ? phi : -phi;
}

}  // namespace

void SymplecticPath::validate() const {
    if (times.size() != mats.size() || times.size() < 2)
        throw InvalidInput("SymplecticPath: need >= 2 samples");
    if ((mats.front() - Mat2::identity()).norm() > kIdentityTol)
        throw InvalidInput("SymplecticPath: first sample is not the identity");
    if (std::abs(times.front()) > 1e-15 || std::abs(times.back() - 1.0) > 1e-15)
        throw InvalidInput("SymplecticPath: times must cover [0,1]");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        if (!(times[i] < times[i + 1]))
            throw InvalidInput("SymplecticPath: times not strictly increasing");
    for (const auto& m : mats)
        if (std::abs(m.det() - 1.0) > kDetTol)
            throw InvalidInput("SymplecticPath: sample determinant differs from 1");
}

Mat2 SymplecticPath::at(double t) const {
    if (generator) return generator(t);
    t = std::clamp(t, times.front(), times.back());
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t i = (it == times.begin()) ? 0 : (it - times.begin() - 1);
    if (i + 1 >= times.size()) i = times.size() - 2;
    double dt = times[i + 1] - times[i];
    double s = (t - times[i]) / dt;
    Mat2 trans = mats[i].inverse() * mats[i + 1];
    Mat2 L = logm_sp2(trans);
    return mats[i] * expm_sl2(s * L);
}

SymplecticPath SymplecticPath::resampled(std::size_t n) const {
    SymplecticPath out;
    out.generator = generator;
    out.times.resize(n);
    out.mats.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = double(i) / double(n - 1);
        out.times[i] = t;
        out.mats[i] = at(t);
    }
    out.mats.front() = Mat2::identity();
    return out;
}

SymplecticPath SymplecticPath::from_generator(std::function<Mat2(double)> gen,
                                              std::size_t n) {
    SymplecticPath p;
    p.generator = std::move(gen);
    p.times.resize(n);
    p.mats.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = double(i) / double(n - 1);
        p.times[i] = t;
        p.mats[i] = p.generator(t);
    }
    p.validate();
    return p;
}

SymplecticPath SymplecticPath::rotation(double total_angle, std::size_t n) {
    return from_generator(
        [total_angle](double t) { return Mat2::rotation(total_angle * t); }, n);
}

SymplecticPath SymplecticPath::hyperbolic(double rate, std::size_t n) {
    return from_generator(
        [rate](double t) {
            return Mat2{std::exp(rate * t), 0, 0, std::exp(-rate * t)};
        },
        n);
}

SymplecticPath SymplecticPath::constant_identity(std::size_t n) {
    return from_generator([](double) { return Mat2::identity(); }, n);
}

namespace {

// S(t) = -J * Psi'(t) * Psi(t)^{-1}, symmetrized. For a Hamiltonian path this
// is the (symmetric) Hessian of the generating quadratic form.
Mat2 generator_S(const SymplecticPath& p, double t) {
    double h = 1e-6;
    double lo = std::max(0.0, t - h), hi = std::min(1.0, t + h);
    Mat2 dPsi = (p.at(hi) - p.at(lo)) * (1.0 / (hi - lo));
    Mat2 S = (Jmat() * (-1.0)) * (dPsi * p.at(t).inverse());
    return {S.a, 0.5 * (S.b + S.c), 0.5 * (S.b + S.c), S.d};
}

int signature(const Mat2& S, double tol) {
    // eigenvalue signs of a symmetric 2x2
    double tr = S.trace(), dt = S.det();
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - dt));
    double l1 = tr / 2.0 + disc, l2 = tr / 2.0 - disc;
    int s = 0;
    if (l1 > tol) s++; else if (l1 < -tol) s--;
    if (l2 > tol) s++; else if (l2 < -tol) s--;
    return s;
}

struct Crossing {
    double t;
    int contribution;
};

// Locate a sign change of c(t) = det(Psi(t)-I) inside [a,b] by bisection.
double bisect_crossing(const SymplecticPath& p, double a, double b) {
    double fa = det_minus_id(p.at(a));
    for (int i = 0; i < 80 && (b - a) > 1e-14; ++i) {
        double m = 0.5 * (a + b);
        double fm = det_minus_id(p.at(m));
        if ((fa <= 0) == (fm <= 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

int crossing_contribution(const SymplecticPath& p, double t0) {
    Mat2 A = p.at(t0);
    Mat2 S = generator_S(p, t0);
    Mat2 N = A - Mat2::identity();
    double nn = N.norm();
    if (nn < 1e-7) return signature(S, 1e-9);  // full 2-dim kernel
    // kernel vector of N: a row of adj(N), or the vector orthogonal to the
    // larger row of N.
    Vec2 r1{N.a, N.b}, r2{N.c, N.d};
    Vec2 row = (r1.norm() > r2.norm()) ? r1 : r2;
    Vec2 v{-row.y, row.x};
    double nv = v.norm();
    if (nv == 0) return signature(S, 1e-9);
    v = v / nv;
    double gamma = v.x * (S.a * v.x + S.b * v.y) + v.y * (S.c * v.x + S.d * v.y);
    if (gamma > 0) return 1;
    if (gamma < 0) return -1;
    return 0;
}

// Rotation invariant (shared with the mean index): oriented eigenvalue angle
// on the elliptic locus, 0 / pi on the hyperbolic locus.
double rot_angle_of(const Mat2& m) {
    double tau = m.trace() / 2.0;
    if (tau >= 1.0) return 0.0;
    if (tau <= -1.0) return PI;
    double phi = std::acos(tau);
    return (m.c - m.b) >= 0 ? phi : -phi;
}

std::vector<Crossing> find_crossings(const SymplecticPath& p,
                                     const std::vector<double>& grid) {
    std::vector<Crossing> out;
    constexpr double kTouchTol = 1e-11;
    // transversal crossings: sign changes of c(t) = det(Psi(t) - I)
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        double a = grid[i], b = grid[i + 1];
        double fa = det_minus_id(p.at(a));
        double fb = det_minus_id(p.at(b));
        if (i == 0 && std::abs(fa) <= kTouchTol) {
            // departure from the identity at t=0 is handled separately
            double eps = (b - a) * 1e-3;
            fa = det_minus_id(p.at(a + eps));
            a = a + eps;
        }
        if ((fa <= 0) != (fb <= 0)) {
            double t0 = bisect_crossing(p, a, b);
            out.push_back({t0, crossing_contribution(p, t0)});
        }
    }
    // full-turn touches: the lifted rotation angle crosses a multiple of 2 pi
    // strictly while c(t) keeps its sign (Psi(t0) = I, 2-dim kernel)
    double lift = 0.0;
    double prev = rot_angle_of(p.at(grid[0]));
    for (std::size_t i = 1; i < grid.size(); ++i) {
        double ang = rot_angle_of(p.at(grid[i]));
        double d = wrap_pi(ang - prev);
        double lift_next = lift + d;
        // strict crossing of a nonzero multiple of 2 pi inside this interval
        double klo = std::ceil(std::min(lift, lift_next) / TWO_PI - 1e-12);
        double khi = std::floor(std::max(lift, lift_next) / TWO_PI + 1e-12);
        for (double kk = klo; kk <= khi; kk += 1.0) {
            double target = kk * TWO_PI;
            if (std::abs(lift - target) < 1e-9 ||
                std::abs(lift_next - target) < 1e-9)
                continue;  // lock boundaries belong to the sign-change detector
            if ((lift < target) == (lift_next < target)) continue;
            // bisect on the local angle relative to the target branch
            double a = grid[i - 1], b = grid[i];
            double base = lift - rot_angle_of(p.at(a));
            for (int it = 0; it < 80 && (b - a) > 1e-14; ++it) {
                double m = 0.5 * (a + b);
                double val = base + rot_angle_of(p.at(m)) - target;
                if ((val < 0) == (lift - target < 0)) a = m;
                else b = m;
            }
            double t0 = 0.5 * (a + b);
            if (t0 <= grid[1] * 0.5) continue;  // the departure at t=0
            bool dup = false;
            for (const auto& c : out)
                if (std::abs(c.t - t0) < 1e-9) dup = true;
            if (!dup) out.push_back({t0, crossing_contribution(p, t0)});
        }
        lift = lift_next;
        prev = ang;
    }
    std::sort(out.begin(), out.end(),
              [](const Crossing& a, const Crossing& b) { return a.t < b.t; });
    return out;
}

std::vector<double> uniform_grid(std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = double(i) / double(n - 1);
    return g;
}

}  // namespace

int cz_index(const SymplecticPath& path) {
    path.validate();
    if (std::abs(det_minus_id(path.endpoint())) < SymplecticPath::kDetTol)
        throw DegenerateEndpoint("endpoint has eigenvalue 1");

    // Departure term: half the signature of the generator at t=0.
    Mat2 S0 = generator_S(path, 0.0);
    int sig0 = signature(S0, 1e-10);
    if (sig0 % 2 != 0)
        throw InsufficientSampling("degenerate generator at t=0, half-signature odd");

    std::size_t base = std::max<std::size_t>(2 * path.times.size(), 256);
    auto crossings = find_crossings(path, uniform_grid(base));
    auto refined = find_crossings(path, uniform_grid(2 * base));
    if (crossings.size() != refined.size())
        throw InsufficientSampling("crossing count changed under refinement");
    for (std::size_t i = 0; i < crossings.size(); ++i)
        if (crossings[i].contribution != refined[i].contribution)
            throw InsufficientSampling("crossing sign changed under refinement");

    int total = sig0 / 2;
    for (const auto& c : crossings) total += c.contribution;
    return total;
}

double mean_index(const SymplecticPath& path) {
    path.validate();
    // continuous lift of the rotation invariant along the path
    double lift = 0.0;
    double prev = rotation_angle(path.mats.front());
    std::size_t n = std::max<std::size_t>(path.times.size(), 256);
    std::vector<double> grid = uniform_grid(n);
    std::size_t i = 1;
    double t_prev = 0.0;
    int max_halvings = 48;
    while (i < grid.size()) {
        double t = grid[i];
        double ang = rotation_angle(path.at(t));
        double d = wrap_pi(ang - prev);
        if (std::abs(d) >= PI / 2.0) {
            // refine this interval
            if (t - t_prev < 1e-13 || max_halvings-- <= 0)
                throw InsufficientSampling("rotation angle jump >= pi/2 after maximal refinement");
            grid.insert(grid.begin() + i, 0.5 * (t_prev + t));
            continue;
        }
        lift += d;
        prev = ang;
        t_prev = t;
        ++i;
    }
    return lift / PI;
}

IndexResult index_result(const SymplecticPath& path) {
    IndexResult r;
    r.mean = mean_index(path);
    r.nondegenerate =
        std::abs(det_minus_id(path.endpoint())) > SymplecticPath::kDetTol;
    if (r.nondegenerate) r.cz = cz_index(path);
    return r;
}

SymplecticPath iterate(const SymplecticPath& path, int k) {
    path.validate();
    if (k < 1) throw InvalidInput("iterate: k must be >= 1");
    if (k == 1) return path;
    Mat2 end = path.endpoint();
    // composition loses determinant precision for strongly hyperbolic
    // endpoints; renormalize each composed sample back to Sp(2)
    auto renorm = [](Mat2 m) {
        double d = m.det();
        if (d > 0) m = m * (1.0 / std::sqrt(d));
        return m;
    };
    std::vector<Mat2> powers(static_cast<std::size_t>(k));
    powers[0] = Mat2::identity();
    for (int j = 1; j < k; ++j) powers[j] = renorm(powers[j - 1] * end);

    // capture data by value; evaluation uses the base path
    SymplecticPath base = path;
    auto gen = [base, powers, k, renorm](double t) {
        double u = t * k;
        int j = std::min(k - 1, static_cast<int>(std::floor(u)));
        double s = u - j;
        return renorm(base.at(s) * powers[static_cast<std::size_t>(j)]);
    };
    std::size_t n = std::max<std::size_t>(path.times.size() * k, 257);
    return SymplecticPath::from_generator(gen, n | 1);
}

SymplecticPath linearized_path(const PlanarFieldRef& field, Vec2 fixed_point,
                               double T, double fixed_point_tol,
                               std::size_t n_samples) {
    Vec2 v = field.X(fixed_point);
    if (v.norm() > fixed_point_tol)
        throw NotAFixedPoint("field norm " + std::to_string(v.norm()) +
                             " at requested point");
    // Integrate d/dt Psi = A(t) Psi with A constant (the orbit is the point),
    // by the implicit midpoint rule; also track determinant drift.
    Mat2 A = field.DX(fixed_point);
    std::size_t n = std::max<std::size_t>(n_samples, 65);
    SymplecticPath p;
    p.times.resize(n);
    p.mats.resize(n);
    p.mats[0] = Mat2::identity();
    p.times[0] = 0.0;
    double h = T / double(n - 1);
    // midpoint step: Psi_{k+1} = (I - h/2 A)^{-1} (I + h/2 A) Psi_k
    Mat2 M = (Mat2::identity() - (h / 2.0) * A).inverse() *
             (Mat2::identity() + (h / 2.0) * A);
    for (std::size_t i = 1; i < n; ++i) {
        p.times[i] = double(i) / double(n - 1);
        p.mats[i] = M * p.mats[i - 1];
    }
    double drift = 0;
    for (const auto& m : p.mats) drift = std::max(drift, std::abs(m.det() - 1.0));
    if (drift > 1e-7)
        throw InsufficientSampling("variational determinant drift above 1e-7");
    return p;
}

std::string path_to_csv(const SymplecticPath& path) {
    std::ostringstream os;
    os.precision(17);
    os << "time,m11,m12,m21,m22\n";
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        const Mat2& m = path.mats[i];
        os << path.times[i] << ',' << m.a << ',' << m.b << ',' << m.c << ','
           << m.d << '\n';
    }
    return os.str();
}

SymplecticPath path_from_csv(const std::string& csv) {
    SymplecticPath p;
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line.find("time") != std::string::npos) continue;
        std::istringstream ls(line);
        double t;
        Mat2 m;
        char comma;
        if (ls >> t >> comma >> m.a >> comma >> m.b >> comma >> m.c >> comma >> m.d) {
            p.times.push_back(t);
            p.mats.push_back(m);
        }
    }
    p.validate();
    return p;
}

}  // namespace symflow
