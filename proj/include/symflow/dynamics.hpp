#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "symflow/atlas.hpp"

namespace symflow {

struct AtlasPos {
    ChartKind kind = ChartKind::torus;
    int index = 1;  // torus/tube index; 0 for the region-D chart
    Vec2 q;
};

struct OrbitSample {
    double t = 0;
    ChartKind kind = ChartKind::torus;
    int index = 0;
    Vec2 q;
};

struct OrbitTrace {
    std::vector<OrbitSample> samples;
    double energy_drift = 0;      // max |F - F0| over region-D segments
    double jac_det_drift = 0;     // max |det V - 1| along the orbit
    bool absorbed = false;
    double absorbed_time = 0;
    AtlasPos final_pos;
    double final_time = 0;
    Mat2 variational = Mat2::identity();
};

struct SectionSpec {
    int torus_index = 1;
    int axis = 0;      // 0: section {x = c}, coordinate is y; 1: {y = c}
    double c = 0.05;
};

struct IntegrateOptions {
    double tol = 1e-9;
    double max_step = 5e-3;         // region-D step cap
    double sample_stride = 0;       // record cadence; 0 = events only
    bool track_variational = false;
    double absorb_radius = 1e-6;
    int direction = +1;             // -1 integrates backward
    std::optional<SectionSpec> section;
    // called at section hits: (time, along-section coordinate, transverse sign)
    std::function<bool(double, double, int)> on_hit;
    std::size_t max_samples = 200000;
};

OrbitTrace integrate(const ChartAtlas& atlas, AtlasPos start, double T,
                     const IntegrateOptions& opt = {});

struct FluxVector {
    int genus = 0;
    std::vector<double> values;  // (a_1, b_1, ..., a_g, b_g) cycle integrals
};

FluxVector flux(const ChartAtlas& atlas);

struct SectionReturn {
    SectionSpec section;
    struct Hit {
        double t;
        double coord;
        int sign;
    };
    std::vector<Hit> hits;
    bool absorbed = false;
};

SectionReturn return_map(const ChartAtlas& atlas, const SectionSpec& section,
                         AtlasPos start, int n_hits, double T_max);

struct PeriodicCandidate {
    SectionSpec section;
    double seed_coord = 0;
    double coord = 0;
    int iterate = 0;
    double period = 0;
    double residual = 0;
};

struct PeriodicSearchReport {
    double horizon = 0;
    int seeds = 0;
    int absorbed_seeds = 0;
    std::vector<std::pair<int, double>> min_return_distance;  // iterate -> min
    std::vector<PeriodicCandidate> found;
};

PeriodicSearchReport search_periodic(const ChartAtlas& atlas, double T_max,
                                     int seeds, double tol);

struct IndexAudit {
    std::vector<FixedPointRecord> records;
    int sum = 0;
};

IndexAudit index_audit(const ChartAtlas& atlas);

// mean index of the linearized flow at an atlas fixed point over time T
double atlas_mean_index(const ChartAtlas& atlas, Vec2 fixed_point, double T = 1.0);

}  // namespace symflow
