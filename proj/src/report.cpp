#include "skembed/report.hpp"

#include "skembed/error.hpp"

#include <cmath>
#include <ostream>

namespace skembed {

namespace {

// NaN (no fit) becomes null rather than relying on the dumper
Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json interval(const Interval& ci) { return Json::array({number(ci.lo), number(ci.hi)}); }

Json window_json(const Window& w) { return Json::array({w.lo, w.hi}); }

Window window_from(const Json& doc) {
    if (!doc.contains("window") || !doc["window"].is_array() || doc["window"].size() != 2) {
        throw Error(ErrorCode::InvalidArgument, "adjacency document needs window [lo, hi]");
    }
    return Window{doc["window"][0].get<std::int64_t>(), doc["window"][1].get<std::int64_t>()};
}

std::int64_t site_key(const std::string& key) {
    try {
        std::size_t used = 0;
        const auto v = std::stoll(key, &used);
        if (used == key.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidArgument, "bad site '" + key + "'");
}

} // namespace

Json report_header(std::string_view command, const RunOptions& run) {
    Json j;
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = run.seed;
    j["replicas"] = run.replicas;
    j["cap"] = run.cap;
    return j;
}

Json chain_to_json(const ChainSpec& spec) {
    Json j;
    switch (spec.kind()) {
    case ChainKind::SrwZ: j["kind"] = "srw_z"; return j;
    case ChainKind::SrwZ2: j["kind"] = "srw_z2"; return j;
    case ChainKind::IidCategorical: {
        j["kind"] = "iid";
        j["states"] = spec.labels();
        Json w = Json::array();
        for (const auto& x : spec.weights()) w.push_back(to_string(x));
        j["weights"] = std::move(w);
        break;
    }
    case ChainKind::FiniteMatrix: {
        j["kind"] = "matrix";
        j["states"] = spec.labels();
        Json rows = Json::array();
        for (const auto& row : spec.matrix()) {
            Json r = Json::array();
            for (const auto& x : row) r.push_back(to_string(x));
            rows.push_back(std::move(r));
        }
        j["rows"] = std::move(rows);
        break;
    }
    }
    j["precision"] = spec.precision() == Precision::Float ? "float" : "exact";
    return j;
}

Json to_json(const FeasibilityVerdict& verdict, const ChainSpec& spec) {
    Json j;
    j["feasible"] = verdict.feasible;
    j["verdict"] = verdict.feasible ? "feasible" : "infeasible";
    j["reason"] = to_string(verdict.reason);
    if (verdict.at) j["at"] = spec.label(*verdict.at);
    Json w = Json::array();
    for (const auto& e : verdict.witness) {
        w.push_back({{"state", spec.label(e.state)}, {"value", to_string(e.value)}, {"integer", e.integer}});
    }
    j["witness"] = std::move(w);
    j["warnings"] = verdict.warnings;
    return j;
}

Json to_json(const StoppingResult& r) {
    Json j;
    j["solver"] = r.solver;
    j["T"] = r.time;
    j["censored"] = r.censored;
    j["seed"] = r.seed;
    j["replica"] = r.replica;
    return j;
}

Json to_json(const ChiSquareResult& r) {
    Json j;
    j["statistic"] = r.statistic;
    j["dof"] = r.dof;
    j["p_value"] = r.p_value;
    j["impossible_cell"] = r.impossible_cell;
    return j;
}

Json to_json(const TailEstimate& t) {
    Json j;
    j["seed"] = t.seed;
    j["replicas"] = t.replicas;
    j["cap"] = t.cap;
    j["censored"] = t.censored;
    j["fit_window"] = Json::array({t.fit_lo, t.fit_hi});
    j["slope"] = number(t.fit.slope);
    j["intercept"] = number(t.fit.intercept);
    j["slope_se"] = number(t.fit.slope_se);
    j["fit_points"] = t.fit.points;
    j["slope_ci"] = interval(t.slope_ci);
    j["grid"] = t.grid;
    j["survival"] = t.survival;
    return j;
}

Json to_json(const MomentEstimate& m) {
    Json j;
    j["beta"] = m.beta;
    j["functional"] = to_string(m.functional);
    j["sizes"] = m.sizes;
    j["means"] = m.means;
    j["changes"] = m.changes;
    j["divergent"] = m.divergent;
    j["finite"] = m.finite;
    j["lower_bound"] = m.lower_bound;
    j["censored"] = m.censored;
    j["cap"] = m.cap;
    j["seed"] = m.seed;
    return j;
}

Json to_json(const ShiftedLawReport& r, const ChainSpec& spec) {
    auto lags = [](const std::vector<LagTest>& tests) {
        Json a = Json::array();
        for (const auto& t : tests) {
            Json j = to_json(t.result);
            j["lag"] = t.lag;
            a.push_back(std::move(j));
        }
        return a;
    };
    Json j;
    j["solver"] = r.solver;
    j["seed"] = r.seed;
    j["replicas"] = r.replicas;
    j["cap"] = r.cap;
    j["censored"] = r.censored;
    j["alpha"] = r.alpha;
    Json landing = Json::object();
    for (const auto& [s, n] : r.landing_counts) landing[spec.label(s)] = n;
    j["landing_counts"] = std::move(landing);
    j["marginal"] = to_json(r.marginal);
    if (r.marginal_exact) j["marginal_exact"] = *r.marginal_exact;
    j["forward"] = lags(r.forward);
    j["backward"] = lags(r.backward);
    j["forward_total"] = to_json(r.forward_total);
    j["backward_total"] = to_json(r.backward_total);
    j["marginal_passed"] = r.marginal_passed();
    j["forward_passed"] = r.forward_passed();
    j["backward_passed"] = r.backward_passed();
    j["passed"] = r.passed();
    return j;
}

Json to_json(const ComparisonReport& r) {
    Json j;
    j["seed"] = r.seed;
    j["replicas"] = r.replicas;
    j["cap"] = r.cap;
    j["censored_tstar"] = r.censored_tstar;
    Json arms = Json::array();
    for (const auto& arm : r.arms) {
        Json a;
        a["solver"] = arm.solver;
        a["censored"] = arm.censored;
        if (arm.validation) {
            a["validation"] = {{"passed", arm.validation->passed()},
                               {"forward_p", arm.validation->forward_total.p_value},
                               {"backward_p", arm.validation->backward_total.p_value},
                               {"marginal_p", arm.validation->marginal.p_value}};
        }
        Json costs = Json::array();
        for (const auto& c : arm.costs) {
            costs.push_back({{"psi", c.psi},
                             {"mean_tstar", c.mean_tstar},
                             {"mean_alternative", c.mean_alternative},
                             {"mean_difference", c.mean_difference},
                             {"ci", interval(c.ci)},
                             {"consistent", c.consistent},
                             {"excludes_negative", c.excludes_negative}});
        }
        a["costs"] = std::move(costs);
        arms.push_back(std::move(a));
    }
    j["arms"] = std::move(arms);
    return j;
}

Json to_json(const TransportRule& theta) {
    Json j;
    j["window"] = window_json(theta.window());
    Json rows = Json::object();
    for (const auto& [x, row] : theta.rows()) {
        Json r = Json::object();
        for (const auto& [y, w] : row) r[std::to_string(y)] = to_string(w);
        rows[std::to_string(x)] = std::move(r);
    }
    j["rows"] = std::move(rows);
    Json open = Json::object();
    for (const auto& [x, w] : theta.open_mass()) open[std::to_string(x)] = to_string(w);
    j["open"] = std::move(open);
    return j;
}

TransportRule transport_from_json(const Json& doc) {
    TransportRule theta(window_from(doc));
    if (doc.contains("rows")) {
        for (const auto& [x, row] : doc["rows"].items()) {
            for (const auto& [y, w] : row.items()) {
                theta.set(site_key(x), site_key(y), parse_rational(w.get<std::string>()));
            }
        }
    }
    if (doc.contains("open")) {
        for (const auto& [x, w] : doc["open"].items()) theta.set_open(site_key(x), parse_rational(w.get<std::string>()));
    }
    return theta;
}

Json to_json(const AllocationView& view) {
    Json j;
    j["window"] = window_json(view.window);
    Json tau = Json::object();
    for (const auto& [k, n] : view.tau) tau[std::to_string(k)] = n;
    j["tau"] = std::move(tau);
    j["frontier"] = view.frontier;
    return j;
}

AllocationView allocation_from_json(const Json& doc) {
    AllocationView view;
    view.window = window_from(doc);
    if (doc.contains("tau")) {
        for (const auto& [k, n] : doc["tau"].items()) view.tau[site_key(k)] = n.get<std::int64_t>();
    }
    if (doc.contains("frontier")) view.frontier = doc["frontier"].get<std::vector<std::int64_t>>();
    return view;
}

void write_samples_csv(std::ostream& out, const std::vector<SampleRecord>& samples, const ChainSpec& spec) {
    out << "replica,T,X_T,censored\n";
    for (const auto& s : samples) {
        std::string label = s.censored ? "" : spec.label(s.landing);
        if (label.find(',') != std::string::npos) label = '"' + label + '"'; // lattice points "x,y"
        out << s.replica << ',' << s.time << ',' << label << ','
            << (s.censored ? 1 : 0) << '\n';
    }
}

void write_survival_csv(std::ostream& out, const TailEstimate& tail) {
    out << "n,survival\n";
    const Json j = tail.survival; // shortest round-trip formatting
    for (std::size_t k = 0; k < tail.grid.size(); ++k) out << tail.grid[k] << ',' << j[k].dump() << '\n';
}

void write_moments_csv(std::ostream& out, const std::vector<MomentEstimate>& moments) {
    out << "functional,beta,replicas,mean\n";
    for (const auto& m : moments) {
        for (std::size_t k = 0; k < m.sizes.size(); ++k) {
            out << to_string(m.functional) << ',' << Json(m.beta).dump() << ',' << m.sizes[k] << ','
                << Json(m.means[k]).dump() << '\n';
        }
    }
}

} // namespace skembed
