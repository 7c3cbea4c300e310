#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "symflow/acceptance.hpp"
#include "symflow/io.hpp"

using namespace symflow;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitClaimFail = 1;
constexpr int kExitInputError = 2;
constexpr int kExitNumerical = 3;

void emit(const json& j, const std::string& out_dir, const std::string& name) {
    std::string text = j.dump(2) + "\n";
    if (out_dir.empty()) {
        std::cout << text;
    } else {
        fs::create_directories(out_dir);
        write_file((fs::path(out_dir) / name).string(), text);
        std::cout << "wrote " << (fs::path(out_dir) / name).string() << "\n";
    }
}

AtlasParams atlas_params_from(int genus, const std::string& variant,
                              double delta, double eps,
                              const std::string& slopes,
                              bool allow_rational) {
    AtlasParams ap;
    ap.genus = genus;
    ap.variant = variant_from_name(variant);
    ap.delta = delta;
    ap.geometry.eps = eps;
    ap.allow_rational_slopes = allow_rational;
    if (!slopes.empty()) {
        std::stringstream ss(slopes);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) ap.slopes.push_back(ExactReal::parse(tok));
    }
    return ap;
}

json claim_entry(const std::string& id, const std::string& anchor,
                 const json& computed, const json& expected, double tol,
                 bool pass) {
    return json{{"id", id},         {"anchor", anchor}, {"computed", computed},
                {"expected", expected}, {"tolerance", tol}, {"pass", pass}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"surface symplectic flow laboratory"};
    app.require_subcommand(1);

    int genus = 2;
    double delta = 0.1;
    double eps = 0.2;
    double tol = 1e-10;
    double radius = 0.5;
    double T = 100.0;
    int seeds = 256;
    std::string variant = "pure";
    std::string out_dir;
    std::string periods;
    std::string slopes;
    std::string atlas_file;
    std::string csv_file;
    std::string sections = "auto";
    std::uint64_t seed = 2026;
    bool allow_rational = false;
    double box = 2.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "output directory (default: stdout)");
    };

    auto* c_ind = app.add_subcommand("indices", "winding indices and hyperbolic regions");
    c_ind->add_option("--genus", genus);
    c_ind->add_option("--variant", variant);
    c_ind->add_option("--delta", delta);
    c_ind->add_option("--radius", radius);
    add_common(c_ind);

    auto* c_zer = app.add_subcommand("zeros", "fixed points of the local field");
    c_zer->add_option("--genus", genus);
    c_zer->add_option("--variant", variant);
    c_zer->add_option("--delta", delta);
    c_zer->add_option("--box", box);
    c_zer->add_option("--tol", tol);
    add_common(c_zer);

    auto* c_cz = app.add_subcommand("cz", "Conley-Zehnder and mean index of a path");
    c_cz->add_option("--csv", csv_file, "path samples: time,m11,m12,m21,m22");
    double rot = 0;
    double hyp = 0;
    int iterate_k = 1;
    c_cz->add_option("--rotation", rot, "use the rotation path by 2*pi*L");
    c_cz->add_option("--hyperbolic", hyp, "use diag(e^{rt}, e^{-rt})");
    c_cz->add_option("--iterate", iterate_k);
    add_common(c_cz);

    auto* c_nov = app.add_subcommand("novikov", "Morse-Novikov ranks over the Novikov field");
    c_nov->add_option("--genus", genus)->required();
    c_nov->add_option("--periods", periods, "2g comma-separated exact values")->required();
    add_common(c_nov);

    auto* c_atl = app.add_subcommand("atlas", "glued-surface atlas operations");
    auto* c_bld = c_atl->add_subcommand("build", "build and serialize an atlas");
    c_bld->add_option("--genus", genus);
    c_bld->add_option("--variant", variant);
    c_bld->add_option("--delta", delta);
    c_bld->add_option("--epsilon", eps);
    c_bld->add_option("--slopes", slopes, "comma-separated exact slopes");
    c_bld->add_flag("--allow-rational", allow_rational);
    add_common(c_bld);
    auto* c_val = c_atl->add_subcommand("validate", "re-run the atlas invariants");
    c_val->add_option("--in", atlas_file, "atlas JSON (from atlas build)")->required();
    add_common(c_val);

    auto* c_orb = app.add_subcommand("orbits", "orbit traces and periodic search");
    c_orb->add_option("--atlas", atlas_file, "atlas JSON (from atlas build)");
    c_orb->add_option("--genus", genus);
    c_orb->add_option("--variant", variant);
    c_orb->add_option("--delta", delta);
    c_orb->add_option("--T", T);
    c_orb->add_option("--seeds", seeds);
    c_orb->add_option("--sections", sections);
    c_orb->add_option("--slopes", slopes);
    c_orb->add_flag("--allow-rational", allow_rational);
    add_common(c_orb);

    auto* c_flx = app.add_subcommand("flux", "flux over the homology basis cycles");
    c_flx->add_option("--genus", genus);
    c_flx->add_option("--variant", variant);
    c_flx->add_option("--delta", delta);
    c_flx->add_option("--slopes", slopes);
    add_common(c_flx);

    auto* c_blw = app.add_subcommand("blowup", "blow-up charts and C1 gluing checks");
    double bdelta = 0.1;
    c_blw->add_option("--delta", bdelta);
    add_common(c_blw);

    auto* c_rep = app.add_subcommand("reproduce", "run the full verification suite");
    c_rep->add_option("--seed", seed);
    bool quick = false;
    c_rep->add_flag("--quick", quick, "short-horizon orbit search");
    add_common(c_rep);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_ind) {
            PlanarHamiltonian H(genus, variant_from_name(variant),
                                variant_from_name(variant) == Variant::pure ? 0.0
                                                                            : delta);
            json claims = json::array();
            bool all = true;
            if (H.variant() == Variant::pure) {
                int wi = winding_index(H, {0, 0}, radius);
                int hr = hyperbolic_regions(H, {0, 0}, radius);
                bool p1 = wi == 2 - 2 * genus;
                bool p2 = hr == 4 * genus - 2;
                claims.push_back(claim_entry("origin_index",
                                             "rmk:index_hyperbolicregion", wi,
                                             2 - 2 * genus, 0, p1));
                claims.push_back(claim_entry("hyperbolic_regions",
                                             "rmk:index_hyperbolicregion", hr,
                                             4 * genus - 2, 0, p2));
                all = p1 && p2;
            } else {
                auto zs = find_zeros(H, {-box, box, -box, box}, 1e-10);
                int sum = 0;
                json zj = json::array();
                for (auto& z : zs) {
                    sum += z.lefschetz_index;
                    zj.push_back(to_json(z));
                }
                bool p = sum == 2 - 2 * genus;
                claims.push_back(claim_entry("index_sum", "eqn:Lefschetz_indices",
                                             sum, 2 - 2 * genus, 0, p));
                all = p;
                json j{{"claims", claims}, {"zeros", zj},
                       {"status", all ? "pass" : "fail"}};
                emit(j, out_dir, "indices.json");
                return all ? kExitOk : kExitClaimFail;
            }
            json j{{"claims", claims}, {"status", all ? "pass" : "fail"}};
            emit(j, out_dir, "indices.json");
            return all ? kExitOk : kExitClaimFail;
        }

        if (*c_zer) {
            PlanarHamiltonian H(genus, variant_from_name(variant),
                                variant_from_name(variant) == Variant::pure ? 0.0
                                                                            : delta);
            auto zs = find_zeros(H, {-box, box, -box, box}, tol);
            json zj = json::array();
            for (const auto& z : zs) zj.push_back(to_json(z));
            emit(json{{"zeros", zj}}, out_dir, "zeros.json");
            // field-line sample grid for plotting
            if (!out_dir.empty())
                write_file((fs::path(out_dir) / "field_grid.csv").string(),
                           field_grid_csv(H, {-box, box, -box, box}, 200));
            return kExitOk;
        }

        if (*c_cz) {
            SymplecticPath p;
            if (!csv_file.empty()) {
                std::ifstream f(csv_file);
                if (!f) throw InvalidInput("cannot read " + csv_file);
                std::stringstream ss;
                ss << f.rdbuf();
                p = path_from_csv(ss.str());
            } else if (rot != 0) {
                p = SymplecticPath::rotation(TWO_PI * rot);
            } else if (hyp != 0) {
                p = SymplecticPath::hyperbolic(hyp);
            } else {
                throw InvalidInput("cz: give --csv, --rotation or --hyperbolic");
            }
            if (iterate_k > 1) p = iterate(p, iterate_k);
            IndexResult r = index_result(p);
            json j{{"mean_index", r.mean}, {"nondegenerate", r.nondegenerate}};
            if (r.cz) j["cz_index"] = *r.cz;
            emit(j, out_dir, "cz.json");
            return kExitOk;
        }

        if (*c_nov) {
            PeriodVector w = parse_periods(genus, periods);
            HomologyRanks h = novikov_ranks(w);
            json j = to_json(h);
            j["period_vector"] = to_json(w);
            bool expected_ok;
            if (w.is_zero())
                expected_ok = h.ranks == std::vector<int>{1, 2 * genus, 1};
            else
                expected_ok = h.ranks == std::vector<int>{0, 2 * genus - 2, 0};
            expected_ok = expected_ok && h.euler == 2 - 2 * genus;
            j["anchor"] = "cor:HNranksurfaces";
            j["status"] = expected_ok ? "pass" : "fail";
            emit(j, out_dir, "novikov.json");
            return expected_ok ? kExitOk : kExitClaimFail;
        }

        if (*c_bld) {
            AtlasParams ap = atlas_params_from(genus, variant, delta, eps,
                                               slopes, allow_rational);
            ChartAtlas atlas = build_surface(ap);
            json j = to_json(atlas);
            j["validation"] = to_json(validate_atlas(atlas));
            emit(j, out_dir, "atlas.json");
            return kExitOk;
        }

        if (*c_val) {
            std::ifstream f(atlas_file);
            if (!f) throw InvalidInput("cannot read " + atlas_file);
            json in = json::parse(f);
            AtlasParams ap = atlas_params_from(
                in.at("genus").get<int>(), in.at("variant").get<std::string>(),
                in.at("delta").get<double>(), in.at("epsilon").get<double>(),
                "", false);
            for (const auto& t : in.at("tori"))
                ap.slopes.push_back(
                    ExactReal::parse(t.at("slope_exact").get<std::string>()));
            ap.allow_rational_slopes = true;  // validate whatever was built
            ChartAtlas atlas = build_surface(ap);
            AtlasValidation v = validate_atlas(atlas);
            emit(to_json(v), out_dir, "atlas_validation.json");
            return v.ok ? kExitOk : kExitClaimFail;
        }

        if (*c_orb) {
            AtlasParams ap;
            if (!atlas_file.empty()) {
                std::ifstream f(atlas_file);
                if (!f) throw InvalidInput("cannot read " + atlas_file);
                json in = json::parse(f);
                ap = atlas_params_from(in.at("genus").get<int>(),
                                       in.at("variant").get<std::string>(),
                                       in.at("delta").get<double>(),
                                       in.at("epsilon").get<double>(), "", true);
                for (const auto& t : in.at("tori"))
                    ap.slopes.push_back(ExactReal::parse(
                        t.at("slope_exact").get<std::string>()));
            } else {
                ap = atlas_params_from(genus, variant, delta, eps, slopes,
                                       allow_rational);
            }
            ChartAtlas atlas = build_surface(ap);
            PeriodicSearchReport rep = search_periodic(atlas, T, seeds, 1e-8);
            emit(to_json(rep), out_dir, "periodic_search.json");
            emit(to_json(flux(atlas)), out_dir, "flux.json");
            if (!out_dir.empty()) {
                IntegrateOptions opt;
                opt.sample_stride = 0.01;
                OrbitTrace tr = integrate(
                    atlas, {ChartKind::torus, 1, {0.11, 0.37}},
                    std::min(T, 50.0), opt);
                write_file((fs::path(out_dir) / "orbit_trace.csv").string(),
                           orbit_csv(tr));
            }
            return rep.found.empty() ? kExitOk : kExitOk;
        }

        if (*c_flx) {
            AtlasParams ap = atlas_params_from(genus, variant, delta, eps,
                                               slopes, allow_rational);
            ChartAtlas atlas = build_surface(ap);
            emit(to_json(flux(atlas)), out_dir, "flux.json");
            return kExitOk;
        }

        if (*c_blw) {
            std::vector<FixedPointRecord> none;
            BlowupChart ch = blowup_chart(none, {0, 0}, bdelta);
            GluedF bad = glue_F([](double x, double y) { return x * (x * x + y * y); });
            C1Report rb = check_glue_regularity(bad);
            GluedF quad = glue_F([](double x, double y) { return x * x - y * y; });
            C1Report rq = check_glue_regularity(quad);
            json j;
            j["delta"] = bdelta;
            j["inner_det_error"] = ch.inner_det_error();
            j["band_det_error"] = ch.band_det_error();
            j["h_positive"] = true;
            j["quadratic"] = {{"c1_ok", rq.c1_ok}, {"c2_bounded", rq.c2_bounded}};
            j["cubic_counterexample"] = {{"c1_ok", rb.c1_ok},
                                         {"c2_bounded", rb.c2_bounded},
                                         {"second_derivative_peak",
                                          rb.second_derivative_peak}};
            j["anchor"] = "sec:2.7";
            emit(j, out_dir, "blowup.json");
            return kExitOk;
        }

        if (*c_rep) {
            AcceptanceReport rep = run_acceptance(seed, &std::cout, quick);
            emit(to_json(rep), out_dir, "report.json");
            return rep.all_pass() ? kExitOk : kExitClaimFail;
        }
    } catch (const InvalidInput& e) {
        json err{{"error", e.what()}, {"kind", "input"}};
        std::cerr << err.dump() << "\n";
        return kExitInputError;
    } catch (const Error& e) {
        json err{{"error", e.what()}, {"kind", "numerical"}};
        std::cerr << err.dump() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        json err{{"error", e.what()}, {"kind", "internal"}};
        std::cerr << err.dump() << "\n";
        return kExitNumerical;
    }
    return kExitInputError;
}
