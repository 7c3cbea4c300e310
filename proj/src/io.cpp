#include "symflow/io.hpp"

#include <fstream>
#include <sstream>

namespace symflow {

json to_json(const FixedPointRecord& r) {
    json j;
    j["location"] = {r.location.x, r.location.y};
    j["lefschetz_index"] = r.lefschetz_index;
    j["jacobian"] = {{r.jacobian.a, r.jacobian.b}, {r.jacobian.c, r.jacobian.d}};
    j["nondegenerate"] = r.nondegenerate;
    if (r.hyperbolic_regions) j["hyperbolic_regions"] = *r.hyperbolic_regions;
    return j;
}

json to_json(const HomologyRanks& h) {
    return json{{"ranks", h.ranks}, {"euler", h.euler}};
}

json to_json(const PeriodVector& w) {
    json per = json::array();
    for (const auto& p : w.periods)
        per.push_back({{"exact", p.str()}, {"approx", p.approx()}});
    return json{{"genus", w.genus}, {"periods", per}};
}

json to_json(const FluxVector& f) {
    return json{{"genus", f.genus}, {"values", f.values}};
}

json to_json(const PeriodicSearchReport& r) {
    json j;
    j["horizon"] = r.horizon;
    j["seeds"] = r.seeds;
    j["absorbed_seeds"] = r.absorbed_seeds;
    json table = json::array();
    for (const auto& [k, d] : r.min_return_distance)
        table.push_back({{"iterate", k}, {"min_distance", d}});
    j["min_return_distance"] = table;
    json found = json::array();
    for (const auto& c : r.found)
        found.push_back({{"torus", c.section.torus_index},
                         {"section_c", c.section.c},
                         {"coord", c.coord},
                         {"iterate", c.iterate},
                         {"period", c.period},
                         {"residual", c.residual}});
    j["found"] = found;
    return j;
}

json to_json(const AtlasValidation& v) {
    return json{{"edges_matched", v.edges_matched},
                {"euler_characteristic", v.euler_characteristic},
                {"max_transition_det_error", v.max_transition_det_error},
                {"max_field_mismatch", v.max_field_mismatch},
                {"pairing_tables_ok", v.pairing_tables_ok},
                {"ok", v.ok}};
}

json to_json(const ChartAtlas& atlas) {
    json j;
    j["genus"] = atlas.genus();
    j["variant"] = variant_name(atlas.params.variant);
    j["delta"] = atlas.params.delta;
    j["epsilon"] = atlas.params.geometry.eps;
    j["geometry"] = {{"R2", atlas.params.geometry.R2},
                     {"offset_ratio_mid", atlas.params.geometry.offset_ratio_mid},
                     {"offset_ratio_out", atlas.params.geometry.offset_ratio_out}};
    json tori = json::array();
    for (const auto& t : atlas.tori)
        tori.push_back({{"index", t.index},
                        {"u", t.u},
                        {"v", t.v},
                        {"slope_exact", t.slope.str()},
                        {"hole_center", {t.hole_center.x, t.hole_center.y}},
                        {"eps", t.eps}});
    j["tori"] = tori;
    json tubes = json::array();
    for (const auto& t : atlas.tubes)
        tubes.push_back({{"index", t.index},
                         {"eps", t.eps},
                         {"rJ", t.rJ},
                         {"speed", t.speed}});
    j["connectors"] = tubes;
    json sides = json::array();
    for (const auto& s : atlas.geom->sides) {
        json sj;
        sj["label"] = s.label;
        sj["role"] = (s.role == SideGeom::Seam) ? "seam" : "circle";
        sj["partner"] = s.partner_label;
        if (s.role == SideGeom::Circle) sj["circle_index"] = s.circle_index;
        sj["A"] = {s.A.x, s.A.y};
        sj["B"] = {s.B.x, s.B.y};
        sides.push_back(sj);
    }
    j["regionD"] = {{"sides", sides}, {"rJ", atlas.geom->rJ}};
    json pair = json::array();
    for (const auto& p : atlas.pairings)
        pair.push_back({{"kind", p.kind}, {"a", p.a}, {"b", p.b},
                        {"detail", p.detail}});
    j["pairings"] = pair;
    json trans = json::array();
    for (const auto& t : atlas.transitions)
        trans.push_back({{"kind", t.kind}, {"a", t.a}, {"b", t.b},
                         {"detail", t.detail}});
    j["transitions"] = trans;
    json zeros = json::array();
    for (const auto& z : atlas.core_zeros) zeros.push_back({z.x, z.y});
    j["core_zeros"] = zeros;
    return j;
}

json to_json(const AcceptanceReport& r) {
    json j;
    j["seed"] = r.seed;
    j["status"] = r.all_pass() ? "pass" : "fail";
    json claims = json::array();
    for (const auto& c : r.claims)
        claims.push_back({{"id", c.id},
                          {"anchor", c.anchor},
                          {"computed", c.computed},
                          {"expected", c.expected},
                          {"tolerance", c.tolerance},
                          {"pass", c.pass},
                          {"seconds", c.seconds}});
    j["claims"] = claims;
    return j;
}

json to_json(const IndexAudit& a) {
    json j;
    j["sum"] = a.sum;
    json recs = json::array();
    for (const auto& r : a.records) recs.push_back(to_json(r));
    j["records"] = recs;
    return j;
}

std::string orbit_csv(const OrbitTrace& t) {
    std::ostringstream os;
    os.precision(17);
    os << "time,chart,index,x,y\n";
    for (const auto& s : t.samples) {
        const char* kind = s.kind == ChartKind::torus ? "torus"
                           : s.kind == ChartKind::connector ? "connector"
                                                            : "regionD";
        os << s.t << ',' << kind << ',' << s.index << ',' << s.q.x << ','
           << s.q.y << '\n';
    }
    return os.str();
}

std::string field_grid_csv(const PlanarHamiltonian& H, Rect box, int n) {
    std::ostringstream os;
    os.precision(12);
    os << "x,y,H,Xx,Xy\n";
    for (int i = 0; i <= n; ++i)
        for (int k = 0; k <= n; ++k) {
            Vec2 p{box.xlo + (box.xhi - box.xlo) * i / n,
                   box.ylo + (box.yhi - box.ylo) * k / n};
            Dual2 d = H.eval(p);
            Vec2 X = ham_field(d);
            os << p.x << ',' << p.y << ',' << d.v << ',' << X.x << ',' << X.y
               << '\n';
        }
    return os.str();
}

PeriodVector parse_periods(int genus, const std::string& csv_list) {
    PeriodVector w;
    w.genus = genus;
    std::stringstream ss(csv_list);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) w.periods.push_back(ExactReal::parse(tok));
    w.validate();
    return w;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot open for writing: " + path);
    f << content;
}

}  // namespace symflow
