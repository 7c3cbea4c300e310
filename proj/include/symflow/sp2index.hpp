#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "symflow/core.hpp"

namespace symflow {

// A sampled path in Sp(2) starting at the identity, t in [0,1].
// If a generator is present it is the exact rule t -> matrix and refinement
// queries it; otherwise refinement interpolates via the sl(2) log of the
// transition between neighbouring samples (stays in Sp(2) exactly).
struct SymplecticPath {
    std::vector<double> times;
    std::vector<Mat2> mats;
    std::function<Mat2(double)> generator;  // optional closed form

    static constexpr double kIdentityTol = 1e-12;
    static constexpr double kDetTol = 1e-9;

    void validate() const;
    Mat2 at(double t) const;          // interpolated/exact evaluation
    Mat2 endpoint() const { return mats.back(); }
    SymplecticPath resampled(std::size_t n) const;

    static SymplecticPath from_generator(std::function<Mat2(double)> gen,
                                         std::size_t n_samples = 257);
    static SymplecticPath rotation(double total_angle, std::size_t n = 257);
    static SymplecticPath hyperbolic(double rate, std::size_t n = 257);
    static SymplecticPath constant_identity(std::size_t n = 9);
};

struct IndexResult {
    std::optional<int> cz;
    double mean = 0;
    bool nondegenerate = false;
};

// Conley-Zehnder index by the crossing-form algorithm.
int cz_index(const SymplecticPath& path);

// Mean index: continuous lift of the rotation invariant, divided by pi.
double mean_index(const SymplecticPath& path);

IndexResult index_result(const SymplecticPath& path);

// k-th iterate reparametrized to [0,1]: Psi^k(t) = Psi(kt-j) Psi(1)^j.
SymplecticPath iterate(const SymplecticPath& path, int k);

// A planar vector field with its Jacobian, as needed for linearization.
struct PlanarFieldRef {
    std::function<Vec2(Vec2)> X;
    std::function<Mat2(Vec2)> DX;
};

// Path of Jacobians of the time-t flow at a fixed point, by integrating the
// variational equation d/dt Psi = DX(x(t)) Psi along the (stationary) orbit.
SymplecticPath linearized_path(const PlanarFieldRef& field, Vec2 fixed_point,
                               double T, double fixed_point_tol = 1e-10,
                               std::size_t n_samples = 513);

// CSV import/export, rows: time,m11,m12,m21,m22
std::string path_to_csv(const SymplecticPath& path);
SymplecticPath path_from_csv(const std::string& csv);

}  // namespace symflow
