#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <sstream>

#include "CLI11.hpp"

#include "dmalab/analysis.hpp"
#include "dmalab/barriers.hpp"
#include "dmalab/errors.hpp"
#include "dmalab/geometry.hpp"
#include "dmalab/radial.hpp"
#include "dmalab/report.hpp"
#include "dmalab/rhs.hpp"
#include "dmalab/solver.hpp"
#include "dmalab/version.hpp"

namespace dmalab::cli {

namespace {

using nlohmann::json;
using DomainPtr = std::shared_ptr<const ConvexDomain>;

// Reads node[key], writing the default back so the resolved config is complete.
double num(json& node, const char* key, double fallback) {
    if (!node.contains(key) || node[key].is_null()) node[key] = fallback;
    return node[key].get<double>();
}

int integer(json& node, const char* key, int fallback) {
    if (!node.contains(key) || node[key].is_null()) node[key] = fallback;
    return node[key].get<int>();
}

std::string text(json& node, const char* key, const std::string& fallback) {
    if (!node.contains(key) || node[key].is_null()) node[key] = fallback;
    return node[key].get<std::string>();
}

std::optional<double> maybe(const json& node, const char* key) {
    if (!node.contains(key) || node[key].is_null()) return std::nullopt;
    return node[key].get<double>();
}

double required(const json& node, const char* key, const char* where) {
    if (!node.contains(key) || node[key].is_null()) {
        throw ParameterError(std::string("config: missing ") + where + "." + key);
    }
    return node[key].get<double>();
}

json& section(json& config, const char* key) {
    if (!config.contains(key) || config[key].is_null()) config[key] = json::object();
    return config[key];
}

DomainPtr make_domain(json& d) {
    const std::string type = text(d, "type", "ball");
    if (type == "ball") {
        if (!d.contains("center")) d["center"] = json::array({0.0, 0.0});
        const Vec c = vec_from_json(d["center"]);
        return std::make_shared<const ConvexDomain>(ConvexDomain::ball(c, num(d, "radius_len", 1.0)));
    }
    if (type == "box") {
        if (!d.contains("lower")) d["lower"] = json::array({0.0, 0.0});
        if (!d.contains("upper")) d["upper"] = json::array({1.0, 1.0});
        return std::make_shared<const ConvexDomain>(
            ConvexDomain::box(vec_from_json(d["lower"]), vec_from_json(d["upper"])));
    }
    if (type == "polygon") {
        std::vector<Eigen::Vector2d> v;
        for (const auto& p : d.at("vertices")) v.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        return std::make_shared<const ConvexDomain>(ConvexDomain::polygon(v));
    }
    if (type == "cusp") {
        const int dim = integer(d, "dim", 2);
        Vec lo = -Vec::Ones(dim);
        lo[dim - 1] = 0.0;
        if (!d.contains("lower")) d["lower"] = vec_to_json(lo);
        if (!d.contains("upper")) d["upper"] = vec_to_json(Vec::Ones(dim));
        return std::make_shared<const ConvexDomain>(ConvexDomain::cusp(dim, num(d, "eta", 1.0), required(d, "a", "domain"),
                                                                       vec_from_json(d["lower"]),
                                                                       vec_from_json(d["upper"])));
    }
    if (type == "intersection") {
        const int dim = integer(d, "dim", 2);
        std::vector<HalfSpace> hs;
        std::vector<BallConstraint> balls;
        if (d.contains("halfspaces")) {
            for (const auto& h : d["halfspaces"]) hs.push_back({vec_from_json(h.at("normal")), h.at("offset").get<double>()});
        }
        if (d.contains("balls")) {
            for (const auto& b : d["balls"]) balls.push_back({vec_from_json(b.at("center")), b.at("radius_len").get<double>()});
        }
        return std::make_shared<const ConvexDomain>(ConvexDomain::intersection(dim, hs, balls));
    }
    throw ParameterError("config: unknown domain type '" + type + "'");
}

struct RhsParams {
    double A = 1.0;
    double alpha = 0.0;
    double beta = 3.0;
};

RhsParams read_rhs(json& config) {
    json& r = section(config, "rhs");
    RhsParams p;
    p.A = required(r, "A", "rhs");
    p.alpha = num(r, "alpha", 0.0);
    p.beta = required(r, "beta", "rhs");
    if (!(p.A > 0.0)) throw ParameterError("config: rhs.A must be positive");
    return p;
}

std::string file_stem(const std::string& subcommand, const json& config) {
    return subcommand + "-" + hex64(fnv1a64(subcommand + "\n" + config.dump()));
}

json envelope(const std::string& subcommand, const json& config) {
    return {{"subcommand", subcommand}, {"version", kVersionString}, {"config", config}};
}

std::string emit(const std::string& out_dir, const std::string& name, const std::string& content,
                 std::vector<std::string>& files) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
    const std::filesystem::path p = std::filesystem::path(out_dir) / name;
    write_atomic(p, content);
    files.push_back(p.string());
    return p.string();
}

std::vector<Vec> boundary_points(json& node, const ConvexDomain& domain) {
    std::vector<Vec> pts;
    if (node.contains("boundary_points") && !node["boundary_points"].is_null()) {
        for (const auto& p : node["boundary_points"]) pts.push_back(vec_from_json(p));
        return pts;
    }
    pts = domain.boundary_samples(8);
    json arr = json::array();
    for (const auto& p : pts) arr.push_back(vec_to_json(p));
    node["boundary_points"] = arr;
    return pts;
}

}  // namespace

int cmd_verify_barrier(const json& input, const std::string& out_dir, std::vector<std::string>& files) {
    json config = input;
    json& b = section(config, "barrier");
    const std::string family = text(b, "family", "edge");
    const RhsParams rp = read_rhs(config);

    if (!config.contains("domain") || config["domain"].is_null()) {
        const int n = integer(b, "n", 2);
        if (family == "cusp") {
            config["domain"] = {{"type", "cusp"}, {"dim", n}, {"a", required(b, "a", "barrier")}, {"eta", num(b, "eta", 1.0)}};
        } else if (family == "sphere") {
            config["domain"] = {{"type", "ball"}, {"center", vec_to_json(Vec::Zero(n))}, {"radius_len", 1.0}};
        } else {
            config["domain"] = {{"type", "box"}, {"lower", vec_to_json(Vec::Zero(n))}, {"upper", vec_to_json(Vec::Ones(n))}};
        }
    }
    const DomainPtr domain = make_domain(config["domain"]);
    const int n = domain->dimension();
    const PowerLawRHS F(rp.A, rp.alpha, rp.beta, domain);
    const std::optional<double> target = maybe(b, "gamma_target");
    const auto samples = static_cast<std::size_t>(integer(b, "samples", 10000));

    std::unique_ptr<Barrier> barrier;
    if (family == "edge" || family == "cusp") {
        Vec z;
        if (b.contains("boundary_point")) {
            z = vec_from_json(b["boundary_point"]);
        } else {
            z = family == "cusp" ? Vec::Zero(n) : domain->nearest_boundary_point(domain->reference_point()).point;
            b["boundary_point"] = vec_to_json(z);
        }
        if (!domain->on_boundary(z)) throw DomainMembershipError("barrier.boundary_point is not on the boundary");
        const LocalFrame frame = LocalFrame::from_direction(z, domain->inward_normal(z));
        if (family == "edge") {
            auto e = std::make_unique<EdgeBarrier>(
                edge_barrier_params(n, rp.alpha, rp.beta, rp.A, num(b, "l_len", domain->diameter()), target));
            e->frame = frame;
            barrier = std::move(e);
        } else {
            const double a = required(b, "a", "barrier");
            double eta = 0.0;
            if (auto given = maybe(b, "eta")) {
                eta = *given;
            } else {
                const AEtaCertificate cert = certify_a_eta(*domain, z, a);
                if (cert.status != CertificateStatus::Certified) {
                    throw RegimeError("boundary point is not of (a, eta) type: " + cert.reason);
                }
                eta = cert.eta;
                b["eta"] = eta;
            }
            auto c = std::make_unique<CuspBarrier>(
                cusp_barrier_params(n, rp.alpha, rp.beta, rp.A, a, eta, target, num(b, "l_len", domain->diameter())));
            c->frame = frame;
            barrier = std::move(c);
        }
    } else if (family == "sphere") {
        const std::string side = text(b, "side", "sub");
        if (side != "sub" && side != "super") throw ParameterError("config: barrier.side must be sub or super");
        const BarrierSide kind = side == "sub" ? BarrierSide::Sub : BarrierSide::Super;
        std::optional<double> R = maybe(b, "radius_len");
        Vec center;
        if (b.contains("center")) {
            center = vec_from_json(b["center"]);
        } else if (domain->kind() == ShapeKind::Ball) {
            const auto& ball = std::get<BallConstraint>(domain->constraints().front());
            center = ball.center;
            if (!R) R = ball.radius;
        } else {
            const SphereCertificate sc = sphere_conditions(*domain);
            const auto& radius = kind == BarrierSide::Sub ? sc.exterior_radius : sc.interior_radius;
            const auto& witnesses = kind == BarrierSide::Sub ? sc.exterior_witnesses : sc.interior_witnesses;
            if (!radius || witnesses.empty()) {
                throw RegimeError(std::string("domain has no ") + (kind == BarrierSide::Sub ? "exterior" : "interior") +
                                  " sphere condition");
            }
            if (!R) R = *radius;
            center = witnesses.front().center;
        }
        if (!R) throw ParameterError("config: barrier.radius_len is required with an explicit center");
        b["radius_len"] = *R;
        b["center"] = vec_to_json(center);
        auto s = std::make_unique<SphereBarrier>(sphere_barrier_params(n, rp.alpha, rp.beta, rp.A, *R, kind, target));
        s->center = center;
        barrier = std::move(s);
    } else {
        throw ParameterError("config: unknown barrier family '" + family + "'");
    }

    const BarrierCertificate cert = verify_subsolution(*barrier, F, *domain, samples);
    json rep = envelope("verify-barrier", config);
    rep["barrier"] = barrier->to_json();
    rep["certificate"] = cert.to_json();
    emit(out_dir, file_stem("verify-barrier", config) + ".json", rep.dump(2) + "\n", files);
    return cert.passed ? kOk : kNotCertified;
}

namespace {

std::shared_ptr<const Grid2D> make_grid(json& config, const DomainPtr& domain) {
    json& s = section(config, "solver");
    const double h = num(s, "h_len", 1.0 / 32.0);
    const int width = integer(s, "stencil_width", 1);
    return std::make_shared<const Grid2D>(discretize_domain(domain, h, width));
}

SingularSchedule read_schedule(json& config) {
    json& s = section(config, "solver");
    SingularSchedule sch;
    sch.first_floor = num(s, "first_floor", sch.first_floor);
    sch.levels = integer(s, "levels", sch.levels);
    sch.damping = num(s, "damping", sch.damping);
    sch.level_tolerance = num(s, "level_tolerance", sch.level_tolerance);
    const std::string method = text(s, "method", "newton");
    if (method == "newton") {
        sch.inner.method = SweepMethod::Newton;
    } else if (method == "gauss_seidel") {
        sch.inner.method = SweepMethod::GaussSeidel;
    } else if (method == "jacobi") {
        sch.inner.method = SweepMethod::Jacobi;
    } else {
        throw ParameterError("config: solver.method must be newton, gauss_seidel or jacobi");
    }
    return sch;
}

std::string solution_table(const DiscreteSolution& sol) {
    const Grid2D& g = *sol.grid;
    std::vector<std::vector<double>> rows;
    rows.reserve(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) rows.push_back({g.nodes[i].x(), g.nodes[i].y(), g.distance[i], sol.values[i]});
    return format_table({"x", "y", "d", "u"}, rows);
}

}  // namespace

int cmd_solve(const json& input, const std::string& out_dir, std::vector<std::string>& files) {
    json config = input;
    if (!config.contains("domain")) throw ParameterError("config: missing domain");
    const DomainPtr domain = make_domain(config["domain"]);
    if (domain->dimension() != 2) throw ParameterError("solve: the grid solver is two-dimensional");
    const RhsParams rp = read_rhs(config);
    const PowerLawRHS F(rp.A, rp.alpha, rp.beta, domain);
    const auto grid = make_grid(config, domain);
    const SingularSchedule sch = read_schedule(config);
    const DiscreteSolution sol = solve_singular(grid, F, sch);

    const std::string stem = file_stem("solve", config);
    json rep = envelope("solve", config);
    rep["solution"] = sol.metadata();
    rep["table"] = stem + ".txt";
    const auto [lo, hi] = std::minmax_element(sol.values.begin(), sol.values.end());
    rep["summary"] = {{"nodes", grid->size()},
                      {"min_u", *lo},
                      {"max_u", *hi},
                      {"u_at_reference", sol.sample(domain->reference_point())},
                      {"min_second_difference", sol.min_second_difference()}};
    emit(out_dir, stem + ".txt", solution_table(sol), files);
    emit(out_dir, stem + ".json", rep.dump(2) + "\n", files);
    return kOk;
}

namespace {

RadialProfile run_radial(json& config, const RhsParams& rp, int& n, double& R) {
    json& r = section(config, "radial");
    n = integer(r, "n", 2);
    R = num(r, "radius_len", 1.0);
    RadialOptions opt;
    opt.tol = num(r, "tol", opt.tol);
    return radial_solve(PowerLawRHS(rp.A, rp.alpha, rp.beta, n), R, opt);
}

std::optional<FitWindow> read_window(const json& a) {
    const auto lo = maybe(a, "window_min_len");
    const auto hi = maybe(a, "window_max_len");
    if (lo && hi) return FitWindow{*lo, *hi};
    if (lo || hi) throw ParameterError("config: give both analysis.window_min_len and analysis.window_max_len");
    return std::nullopt;
}

json verdict_json(const Consistency& c, const std::string& label) {
    return {{"contradiction", c.contradiction}, {"z_score", c.z_score}, {"verdict", c.verdict}, {"against", label}};
}

}  // namespace

int cmd_fit_exponent(const json& input, const std::string& out_dir, std::vector<std::string>& files) {
    json config = input;
    json& a = section(config, "analysis");
    const std::string source = text(a, "source", "grid");
    const auto count = static_cast<std::size_t>(integer(a, "samples", 24));
    const std::optional<double> user_prediction = maybe(a, "predicted");
    const double slope_tol = num(a, "slope_tolerance", 0.05);

    std::vector<DecayFit> fits;
    std::optional<ExponentPrediction> prediction;
    bool two_sided = false;

    if (source == "radial") {
        const RhsParams rp = read_rhs(config);
        int n = 2;
        double R = 1.0;
        const RadialProfile p = run_radial(config, rp, n, R);
        fits.push_back(fit_boundary_exponent(p, read_window(a), count));
        SphereCertificate sc;
        sc.exterior_radius = R;
        sc.interior_radius = R;
        prediction = predicted_exponents(n, rp.alpha, rp.beta, maybe(a, "a"), &sc);
        two_sided = true;
    } else if (source == "grid" || source == "synthetic") {
        if (!config.contains("domain")) throw ParameterError("config: missing domain");
        const DomainPtr domain = make_domain(config["domain"]);
        const std::vector<Vec> zs = boundary_points(a, *domain);
        if (source == "grid") {
            if (!a.contains("solution_file") || !a["solution_file"].is_string()) {
                throw IoError("config: analysis.solution_file is required for a grid fit");
            }
            const std::string path = a["solution_file"].get<std::string>();
            const auto rows = parse_table(read_file(path));
            const auto grid = make_grid(config, domain);
            if (rows.size() != grid->size()) throw IoError("solution file " + path + " does not match the configured grid");
            DiscreteSolution sol;
            sol.grid = grid;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].size() < 4 || std::abs(rows[i][0] - grid->nodes[i].x()) > 1e-9 ||
                    std::abs(rows[i][1] - grid->nodes[i].y()) > 1e-9) {
                    throw IoError("solution file " + path + " does not match the configured grid");
                }
                sol.values.push_back(rows[i][3]);
            }
            for (const Vec& z : zs) fits.push_back(fit_boundary_exponent(sol, *domain, z, read_window(a), count));
        } else {
            const double p = required(a, "synthetic_exponent", "analysis");
            const FitWindow w = read_window(a).value_or(FitWindow{1e-3 * domain->diameter(), 0.1 * domain->diameter()});
            auto field = [&](const Vec& x) { return -std::pow(std::max(domain->signed_distance(x), 0.0), p); };
            for (const Vec& z : zs) {
                if (!domain->on_boundary(z)) throw DomainMembershipError("analysis.boundary_points must lie on the boundary");
                fits.push_back(fit_decay(field, z, domain->inward_normal(z), w, count));
            }
        }
        if (config.contains("rhs")) {
            const RhsParams rp = read_rhs(config);
            const SphereCertificate sc = sphere_conditions(*domain);
            prediction = predicted_exponents(domain->dimension(), rp.alpha, rp.beta, maybe(a, "a"), &sc);
        }
    } else {
        throw ParameterError("config: analysis.source must be grid, radial or synthetic");
    }

    // Reference exponent for the verdict.
    std::optional<double> reference;
    std::string label;
    if (user_prediction) {
        reference = user_prediction;
        label = "user prediction";
    } else if (prediction) {
        const ExponentPrediction& p = *prediction;
        if (two_sided && p.gamma3.is_exact() && p.gamma4.is_exact()) {
            reference = p.gamma3.value;
            std::ostringstream os;
            os << "gamma_3 = gamma_4 = " << p.gamma3.value;
            label = os.str();
        } else if (p.gamma3.is_exact() || p.gamma3.kind == ExponentKind::One) {
            reference = p.gamma3.value;
            two_sided = false;
            label = "gamma_3 (upper bound)";
        } else if (p.gamma1.is_exact()) {
            reference = p.gamma1.value;
            two_sided = false;
            label = "gamma_1 (upper bound)";
        }
    }

    json rep = envelope("fit-exponent", config);
    rep["prediction"] = prediction ? prediction->to_json() : json(nullptr);
    json arr = json::array();
    bool any_contradiction = false;
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < fits.size(); ++k) {
        json f = fits[k].to_json();
        if (reference) {
            Consistency c = two_sided ? check_two_sided(fits[k], *reference, 3.0, slope_tol)
                                      : check_upper_bound(fits[k], *reference, 3.0);
            if (two_sided && !c.contradiction) c.verdict = "consistent with " + label;
            any_contradiction = any_contradiction || c.contradiction;
            f["consistency"] = verdict_json(c, label);
        }
        arr.push_back(f);
        for (std::size_t i = 0; i < fits[k].d.size(); ++i) rows.push_back({static_cast<double>(k), fits[k].d[i], fits[k].abs_u[i]});
    }
    rep["fits"] = arr;
    rep["contradiction"] = any_contradiction;
    const std::string stem = file_stem("fit-exponent", config);
    emit(out_dir, stem + ".txt", format_table({"point", "d", "abs_u"}, rows), files);
    emit(out_dir, stem + ".json", rep.dump(2) + "\n", files);
    return kOk;
}

int cmd_oracle_radial(const json& input, const std::string& out_dir, std::vector<std::string>& files) {
    json config = input;
    const RhsParams rp = read_rhs(config);
    int n = 2;
    double R = 1.0;
    const RadialProfile p = run_radial(config, rp, n, R);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < p.r.size(); ++i) rows.push_back({p.r[i], p.u[i], p.du[i]});
    const std::string stem = file_stem("oracle-radial", config);
    json rep = envelope("oracle-radial", config);
    rep["profile"] = p.metadata();
    rep["table"] = stem + ".txt";
    emit(out_dir, stem + ".txt", format_table({"r", "u", "du"}, rows), files);
    emit(out_dir, stem + ".json", rep.dump(2) + "\n", files);
    return kOk;
}

int cmd_certify_domain(const json& input, const std::string& out_dir, std::vector<std::string>& files) {
    json config = input;
    if (!config.contains("domain")) throw ParameterError("config: missing domain");
    const DomainPtr domain = make_domain(config["domain"]);
    json& c = section(config, "certify");
    const double a = num(c, "a", 2.0);
    AEtaOptions opt;
    opt.n_samples = static_cast<std::size_t>(integer(c, "samples", 4096));
    const auto points = static_cast<std::size_t>(integer(c, "points", 128));
    const AEtaCertificate cert = certify_a_eta_domain(*domain, a, points, opt);
    const SphereCertificate sc = sphere_conditions(*domain);
    json rep = envelope("certify-domain", config);
    rep["diameter"] = domain->diameter();
    json feats = json::array();
    for (const auto& f : domain->feature_points()) feats.push_back(vec_to_json(f));
    rep["features"] = feats;
    rep["a_eta"] = to_json(cert);
    rep["spheres"] = to_json(sc);
    emit(out_dir, file_stem("certify-domain", config) + ".json", rep.dump(2) + "\n", files);
    return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"dmalab: barriers, solvers and exponent fits for singular Monge-Ampere problems"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> h;
    bool quiet = false;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"verify-barrier", "construct a barrier from the recipe and certify it"},
        {"solve", "solve the Dirichlet problem on a 2D grid"},
        {"fit-exponent", "fit boundary decay exponents and compare with the predictions"},
        {"oracle-radial", "radial shooting solution on a ball"},
        {"certify-domain", "(a, eta) and sphere-condition certificates for a domain"}};
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->set_help_flag("--help", "print this help");
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "sampling seed");
        sub->add_option("--h", h, "override solver.h_len");
        sub->add_flag("--quiet", quiet, "print nothing on success");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kRegime;
    }
    const std::string name = app.get_subcommands().front()->get_name();

    json config;
    try {
        config = json::parse(read_file(config_path));
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const json::exception& e) {
        err << "error: config is not valid JSON: " << e.what() << "\n";
        return kRegime;
    }
    if (seed) config["seed"] = *seed;
    if (!config.contains("seed")) config["seed"] = 1;
    if (h) config["solver"]["h_len"] = *h;

    std::vector<std::string> files;
    int code = kOk;
    try {
        if (name == "verify-barrier") {
            code = cmd_verify_barrier(config, out_dir, files);
        } else if (name == "solve") {
            code = cmd_solve(config, out_dir, files);
        } else if (name == "fit-exponent") {
            code = cmd_fit_exponent(config, out_dir, files);
        } else if (name == "oracle-radial") {
            code = cmd_oracle_radial(config, out_dir, files);
        } else {
            code = cmd_certify_domain(config, out_dir, files);
        }
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << "\nresiduals:";
        for (double r : e.residuals()) err << " " << r;
        err << "\n";
        return kConvergence;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kRegime;
    } catch (const json::exception& e) {
        err << "error: bad config: " << e.what() << "\n";
        return kRegime;
    }
    if (!quiet) {
        for (const auto& f : files) out << f << "\n";
        if (code == kNotCertified) out << "barrier not certified\n";
    }
    return code;
}

}  // namespace dmalab::cli
