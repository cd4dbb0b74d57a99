#include "cfs/cfs.hpp"
#include "cfs/config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <limits>
#include <variant>

using namespace cfs;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Cell = std::variant<double, long, bool, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    /// name, value pairs written after the rows
    std::vector<std::pair<std::string, Cell>> summary;

    void add(std::vector<Cell> r) {
        if (r.size() != columns.size()) throw std::logic_error("row width mismatch");
        rows.push_back(std::move(r));
    }
};

std::string csv_cell(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) return format_double(*d);
    if (auto l = std::get_if<long>(&c)) return std::to_string(*l);
    if (auto b = std::get_if<bool>(&c)) return *b ? "true" : "false";
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

nlohmann::json json_cell(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) return std::isfinite(*d) ? nlohmann::json(*d) : nlohmann::json(nullptr);
    if (auto l = std::get_if<long>(&c)) return *l;
    if (auto b = std::get_if<bool>(&c)) return *b;
    return std::get<std::string>(c);
}

void write_table(std::ostream& os, const std::string& cmd, const RunConfig& cfg, const Table& t) {
    if (cfg.format == "json") {
        nlohmann::json j;
        j["command"] = cmd;
        nlohmann::json conf = nlohmann::json::object();
        for (const auto& [k, v] : config_entries(cfg)) conf[k] = v;
        j["config"] = conf;
        j["columns"] = t.columns;
        j["rows"] = nlohmann::json::array();
        for (const auto& r : t.rows) {
            nlohmann::json row = nlohmann::json::array();
            for (const auto& c : r) row.push_back(json_cell(c));
            j["rows"].push_back(row);
        }
        nlohmann::json s = nlohmann::json::object();
        for (const auto& [k, v] : t.summary) s[k] = json_cell(v);
        j["summary"] = s;
        // 17 significant digits like the CSV
        os << j.dump(2) << "\n";
        return;
    }
    os << "# cfs " << cmd << "\n" << echo_config(cfg);
    for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& r : t.rows) {
        for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
        os << "\n";
    }
    for (const auto& [k, v] : t.summary) os << "# " << k << ": " << csv_cell(v) << "\n";
}

struct Context {
    RunConfig cfg;
    MetricChart chart;
    RegFieldConfig rcfg;
    std::vector<std::pair<Vec4, Vec4>> pairs;
};

Context make_context(const RunConfig& cfg) {
    Context c;
    c.cfg = cfg;
    c.chart = make_chart(cfg.metric, cfg.params);
    c.rcfg.order = cfg.order;
    c.rcfg.sign = cfg.sign;
    c.pairs = sample_pairs(c.chart, cfg.pairs, cfg.seed, cfg.scale);
    return c;
}

std::string error_status(const std::exception& e) { return std::string("error: ") + e.what(); }

void push_vec(std::vector<Cell>& r, const Vec4& v) {
    for (int i = 0; i < 4; ++i) r.push_back(v(i));
}

std::vector<std::string> vec_cols(const std::string& p) { return {p + "0", p + "1", p + "2", p + "3"}; }

std::vector<std::string> cat(std::initializer_list<std::vector<std::string>> parts) {
    std::vector<std::string> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

Table cmd_geom(const Context& ctx) {
    Table t;
    t.columns = cat({{"point"}, vec_cols("x"), {"R", "ricci_tf_norm", "bianchi", "clifford", "status"}});
    std::vector<Vec4> pts{reference_point(ctx.chart)};
    for (const auto& p : ctx.pairs) pts.push_back(p.second);
    for (size_t i = 0; i < pts.size(); ++i) {
        std::vector<Cell> r{long(i)};
        push_vec(r, pts[i]);
        try {
            const auto cb = curvature_at(ctx.chart, pts[i]);
            const auto er = einstein_residual(ctx.chart, pts[i]);
            r.insert(r.end(), {cb.scalar, er.ricci_tf_norm, bianchi_residual(cb),
                               clifford_residual(gamma_at(tetrad_at(ctx.chart, pts[i])), cb.metric_inv),
                               std::string("ok")});
        } catch (const Error& e) {
            r.insert(r.end(), {kNaN, kNaN, kNaN, kNaN, error_status(e)});
        }
        t.add(r);
    }
    return t;
}

Table cmd_sigma(const Context& ctx) {
    Table t;
    t.columns = cat({{"pair"}, vec_cols("x"), vec_cols("y"), {"sigma", "identity", "eikonal", "status"}});
    for (size_t i = 0; i < ctx.pairs.size(); ++i) {
        const auto& [x, y] = ctx.pairs[i];
        std::vector<Cell> r{long(i)};
        push_vec(r, x);
        push_vec(r, y);
        try {
            const auto w = world_function(ctx.chart, x, y);
            r.insert(r.end(), {w.sigma, check_fundamental_identity(w), eikonal_residual(w), std::string("ok")});
        } catch (const Error& e) {
            r.insert(r.end(), {kNaN, kNaN, kNaN, error_status(e)});
        }
        t.add(r);
    }
    return t;
}

Table cmd_vanvleck(const Context& ctx) {
    Table t;
    t.columns = {"pair", "sigma", "delta", "delta_sqrt", "transport_residual", "spin_unitarity", "status"};
    for (size_t i = 0; i < ctx.pairs.size(); ++i) {
        const auto& [x, y] = ctx.pairs[i];
        try {
            const auto f = make_frame(ctx.chart, x, y);
            const double u = (spin_adjoint(f.U) * f.U - SpinMatrix::Identity()).cwiseAbs().maxCoeff();
            t.add({long(i), f.wf.sigma, f.delta, f.delta_sqrt, van_vleck_transport_residual(ctx.chart, x, y), u,
                   std::string("ok")});
        } catch (const Error& e) {
            t.add({long(i), kNaN, kNaN, kNaN, kNaN, kNaN, error_status(e)});
        }
    }
    return t;
}

Table cmd_symbols(const Context& ctx) {
    const double h = 1e-3;
    Table t;
    t.columns = {"pair", "eps", "n", "sigma_eps_re", "sigma_eps_im", "T_re", "T_im", "recurrence", "derivative",
                 "kleingordon", "status"};
    const double m = ctx.cfg.mass;
    for (size_t i = 0; i < ctx.pairs.size(); ++i) {
        const auto& [x, y] = ctx.pairs[i];
        for (double eps : ctx.cfg.eps) {
            const auto sc = regfield_context(ctx.chart, ctx.rcfg, y, m, eps);
            for (int n = -1; n <= ctx.cfg.order; ++n) {
                try {
                    const Complex s = sc.sig_eps(x);
                    const Complex T = t_value(n, s, m);
                    t.add({long(i), eps, long(n), s.real(), s.imag(), T.real(), T.imag(), check_t_recurrence(n, s, m),
                           check_t_derivative(n, sc, x, h), check_t_kleingordon(n, sc, x, h), std::string("ok")});
                } catch (const Error& e) {
                    t.add({long(i), eps, long(n), kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, error_status(e)});
                }
            }
        }
    }
    t.summary.emplace_back("fd_step", h);
    return t;
}

Table cmd_regfield(const Context& ctx) {
    Table t;
    t.columns = cat({{"pair", "eps", "f_re", "f_im", "f0_re", "f1_re", "f1_im"},
                     vec_cols("chi"),
                     {"t", "r", "nonlinear_residual", "cc_leading", "cc_exact", "status"}});
    RegFieldSolver s(ctx.chart, ctx.rcfg);
    for (size_t i = 0; i < ctx.pairs.size(); ++i) {
        const auto& [x, y] = ctx.pairs[i];
        for (double eps : ctx.cfg.eps) {
            std::vector<Cell> r{long(i), eps};
            try {
                const auto g = solve_geodesic(ctx.chart, x, y, false);
                const auto w = world_function(g);
                const auto rf = solve_regfield(s, g, eps);
                const Complex f = rf.value();
                const Complex f1 = rf.orders.size() > 1 ? rf.orders[1] : Complex(0.0);
                r.insert(r.end(), {f.real(), f.imag(), rf.orders[0].real(), f1.real(), f1.imag()});
                push_vec(r, rf.chi);
                const auto tr = temporal_radial(w, rf);
                r.insert(r.end(), {tr.t, tr.r, std::abs(nonlinear_residual(rf, w, eps)),
                                   check_cc_nonpositive(w, rf, eps), check_cc_exact(w, rf, eps), std::string("ok")});
            } catch (const Error& e) {
                r.resize(2);
                for (int k = 0; k < 14; ++k) r.push_back(kNaN);
                r.push_back(error_status(e));
            }
            t.add(r);
        }
    }
    return t;
}

Table cmd_sdw(const Context& ctx) {
    const int N = std::max(ctx.cfg.order, 1);
    SDWConfig sc;
    sc.nodes = ctx.cfg.sdw_nodes;
    SDWSolver s(ctx.chart, nullptr, sc);
    Table t;
    t.columns = {"pair", "sigma", "a1_re", "a1_im", "a1_offdiag", "a2_re", "a2_im", "a1_plus_R12", "status"};
    auto offdiag = [](const SpinMatrix& m) {
        return (m - m(0, 0) * SpinMatrix::Identity()).cwiseAbs().maxCoeff();
    };
    // coincidence row at the reference point
    {
        const Vec4 x = reference_point(ctx.chart);
        try {
            const SpinMatrix a1 = s.coefficient(1, x, x);
            const double R = curvature_at(ctx.chart, x).scalar;
            const double dev = (a1 + R / 12 * SpinMatrix::Identity()).cwiseAbs().maxCoeff();
            t.add({-1L, 0.0, a1(0, 0).real(), a1(0, 0).imag(), offdiag(a1), kNaN, kNaN, dev, std::string("ok")});
        } catch (const Error& e) {
            t.add({-1L, 0.0, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, error_status(e)});
        }
    }
    for (size_t i = 0; i < ctx.pairs.size(); ++i) {
        const auto& [x, y] = ctx.pairs[i];
        try {
            const auto c = sdw_coefficients(s, x, y, N);
            const Complex a2 = N >= 2 ? c.coeffs[2](0, 0) : Complex(kNaN, kNaN);
            t.add({long(i), world_function(ctx.chart, x, y).sigma, c.coeffs[1](0, 0).real(), c.coeffs[1](0, 0).imag(),
                   offdiag(c.coeffs[1]), a2.real(), a2.imag(), kNaN, std::string("ok")});
        } catch (const Error& e) {
            t.add({long(i), kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, error_status(e)});
        }
    }
    t.summary.emplace_back("pair_minus_one", std::string("coincidence at the reference point"));
    return t;
}

struct PairData {
    BiTensorFrame f;
    RegField rf;
};

template <class Row>
void pair_eps_loop(const Context& ctx, Table& t, int width, Row row) {
    RegFieldSolver s(ctx.chart, ctx.rcfg);
    for (size_t i = 0; i < ctx.pairs.size(); ++i) {
        const auto& [x, y] = ctx.pairs[i];
        for (double eps : ctx.cfg.eps) {
            std::vector<Cell> r{long(i), eps};
            try {
                const auto g = solve_geodesic(ctx.chart, x, y, false);
                const PairData p{make_frame(g), solve_regfield(s, g, eps)};
                row(r, p, eps);
            } catch (const Error& e) {
                r.resize(2);
                for (int k = 0; k < width; ++k) r.push_back(kNaN);
                r.push_back(error_status(e));
            }
            t.add(r);
        }
    }
}

Table cmd_projector(const Context& ctx) {
    Table t;
    t.columns = {"pair", "eps", "lp_re", "lp_im", "lm_re", "lm_im", "analytic_lp_re", "analytic_lp_im",
                 "analytic_lm_re", "analytic_lm_im", "rel_err", "pair_spread", "algebra_defect", "status"};
    const double m = ctx.cfg.mass;
    pair_eps_loop(ctx, t, 11, [&](std::vector<Cell>& r, const PairData& p, double eps) {
        const auto s = closed_chain(p_leading(p.f, p.rf, m, eps));
        const auto [lp, lm] = analytic_eigenvalues(p.f, p.rf, eps, m);
        const double err = std::max(std::abs(s.lambda_plus - lp) / std::abs(lp), std::abs(s.lambda_minus - lm) / std::abs(lm));
        r.insert(r.end(), {s.lambda_plus.real(), s.lambda_plus.imag(), s.lambda_minus.real(), s.lambda_minus.imag(),
                           lp.real(), lp.imag(), lm.real(), lm.imag(), s.degenerate ? kNaN : err, s.pair_spread,
                           s.degenerate ? kNaN : projector_algebra_defect(s),
                           std::string(s.degenerate ? "degenerate" : "ok")});
    });
    return t;
}

Table cmd_eigen(const Context& ctx) {
    Table t;
    t.columns = {"pair", "eps", "abs_lp", "abs_lm", "modulus_gap", "lagrangian", "spectral_weight", "status"};
    const double m = ctx.cfg.mass;
    double worst = 0;
    pair_eps_loop(ctx, t, 5, [&](std::vector<Cell>& r, const PairData& p, double eps) {
        const auto s = closed_chain(p_leading(p.f, p.rf, m, eps));
        const double a = std::abs(s.lambda_plus), b = std::abs(s.lambda_minus);
        const double gap = std::abs(a - b) / a;
        worst = std::max(worst, gap);
        r.insert(r.end(), {a, b, gap, lagrangian(s.eigenvalues), spectral_weight(s.eigenvalues), std::string("ok")});
    });
    t.summary.emplace_back("max_modulus_gap", worst);
    return t;
}

Table cmd_perturb(const Context& ctx) {
    Table t;
    t.columns = {"pair",          "eps",          "dA_norm",      "nonbilinear",  "dl_plus_re",   "dl_plus_im",
                 "dl_minus_re",   "dl_minus_im",  "closed_plus_re", "closed_plus_im", "dabs_plus", "dabs_minus",
                 "fd_rel_err",    "status"};
    const double m = ctx.cfg.mass;
    pair_eps_loop(ctx, t, 11, [&](std::vector<Cell>& r, const PairData& p, double eps) {
        const auto k = p_leading(p.f, p.rf, m, eps);
        const auto s = closed_chain(k);
        const SpinMatrix dA = delta_p_geom(p.f, p.rf, m, eps);
        const double n = dA.cwiseAbs().maxCoeff();
        if (s.degenerate) {
            r.insert(r.end(), {n, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, std::string("degenerate")});
            return;
        }
        const auto d = delta_spectrum(s, dA, p.f, k.xi, eps);
        const auto [fp, fm] = fd_delta_lambda(s.A, dA, 1e-6);
        const double err = std::max(std::abs(fp - d.dl_plus), std::abs(fm - d.dl_minus)) / std::abs(s.lambda_plus);
        r.insert(r.end(), {n, d.nonbilinear, d.dl_plus.real(), d.dl_plus.imag(), d.dl_minus.real(), d.dl_minus.imag(),
                           d.dl_plus_closed.real(), d.dl_plus_closed.imag(), d.dabs_plus, d.dabs_minus, err,
                           std::string("ok")});
    });
    t.summary.emplace_back("perturbation", std::string("geometric (trace-free Ricci) part of the next-order kernel"));
    return t;
}

Table cmd_integrals(const Context& ctx) {
    RegFieldConfig rc = ctx.rcfg;
    TangentConfig q;
    q.cutoff = ctx.cfg.cutoff;
    q.scale_with_eps = ctx.cfg.scale_with_eps;
    q.taper = ctx.cfg.taper;
    q.rel_tol = ctx.cfg.rel_tol;
    const Vec4 x = reference_point(ctx.chart);
    Table t;
    t.columns = {"eps", "C0_00", "C1_00", "trace0", "err0", "trace1", "err1", "kappa", "real_part"};
    std::vector<CTensors> sweep;
    for (double eps : ctx.cfg.eps) {
        sweep.push_back(tangent_integrals(ctx.chart, x, eps, ctx.cfg.mass, rc, q));
        const auto& c = sweep.back();
        t.add({eps, c.C0(0, 0), c.C1(0, 0), c_trace(c.C0, ctx.chart, x), c.err0.sum(), c_trace(c.C1, ctx.chart, x),
               c.err1.sum(), kappa_of(c), c.real_part});
    }
    if (sweep.size() >= 2) {
        const auto k = kappa_extract(sweep);
        t.summary.emplace_back("kappa_slope", k.slope);
        std::cerr << "kappa slope " << format_double(k.slope) << "\n";
    }
    return t;
}

Table cmd_einstein(const Context& ctx) {
    Table t;
    t.columns = cat({{"point"}, vec_cols("x"), {"R", "ricci_tf_norm", "residual", "lambda", "status"}});
    std::vector<Vec4> pts{reference_point(ctx.chart)};
    for (const auto& p : ctx.pairs) pts.push_back(p.second);
    std::vector<Vec4> good;
    for (size_t i = 0; i < pts.size(); ++i) {
        std::vector<Cell> r{long(i)};
        push_vec(r, pts[i]);
        try {
            const auto e = einstein_residual(ctx.chart, pts[i]);
            const auto l = lambda_reconstruct(ctx.chart, {pts[i]});
            r.insert(r.end(), {curvature_at(ctx.chart, pts[i]).scalar, e.ricci_tf_norm, e.norm, l.lambda,
                               std::string("ok")});
            good.push_back(pts[i]);
        } catch (const Error& e) {
            r.insert(r.end(), {kNaN, kNaN, kNaN, kNaN, error_status(e)});
        }
        t.add(r);
    }
    if (!good.empty()) t.summary.emplace_back("lambda_spread", lambda_reconstruct(ctx.chart, good).constancy);
    return t;
}

Table cmd_verify(const RunConfig& cfg, bool& all_pass) {
    Table t;
    t.columns = {"id", "name", "pass", "seconds", "detail"};
    std::vector<int> ids = cfg.suite;
    if (ids.empty())
        for (int i = 1; i <= int(verify::suites().size()); ++i) ids.push_back(i);
    all_pass = true;
    for (int id : ids) {
        const auto r = verify::run_check(id);
        std::cerr << (r.pass ? "PASS " : "FAIL ") << r.id << " " << r.name << "\n";
        all_pass = all_pass && r.pass;
        t.add({long(r.id), r.name, r.pass, r.seconds, r.detail});
    }
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regularized fermionic projector kernels on curved backgrounds"};
    app.require_subcommand(1);

    struct Flags {
        std::string config, metric, mass, eps, order, pairs, seed, scale, sign, nodes, cutoff, taper, rel_tol, out,
            format, suite;
        std::vector<std::string> params;
        bool fixed_radius = false;
    } fl;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"geom", "curvature and frame checks at sample points"},
        {"sigma", "world function and its identities on sampled pairs"},
        {"vanvleck", "van Vleck determinant and spin transport"},
        {"symbols", "T-symbol values and identities"},
        {"regfield", "regularizing field hierarchy"},
        {"sdw", "heat-kernel coefficients"},
        {"projector", "closed-chain spectrum vs analytic eigenvalues"},
        {"eigen", "leading-degree criticality"},
        {"perturb", "first-order eigenvalue perturbation"},
        {"integrals", "tangent-space integrals and kappa(eps)"},
        {"einstein", "trace-free Ricci residual and Lambda"},
        {"verify", "acceptance suites"},
    };
    for (const auto& [name, help] : commands) {
        auto* s = app.add_subcommand(name, help);
        s->add_option("--config", fl.config, "key = value config file");
        s->add_option("--metric", fl.metric, "minkowski | desitter | flrw | schwarzschild | ultrastatic");
        s->add_option("--param", fl.params, "metric parameter k=v (repeatable)");
        s->add_option("--mass", fl.mass, "fermion mass m");
        s->add_option("--eps", fl.eps, "comma-separated eps list, increasing");
        s->add_option("--order", fl.order, "truncation order N");
        s->add_option("--pairs", fl.pairs, "number of sampled pairs");
        s->add_option("--seed", fl.seed, "sampling seed");
        s->add_option("--scale", fl.scale, "pair separation scale");
        s->add_option("--sign", fl.sign, "regularizing field sign (+1 | -1)");
        s->add_option("--sdw-nodes", fl.nodes, "Gauss-Legendre nodes for the SDW transport");
        s->add_option("--cutoff", fl.cutoff, "tangent integral outer radius");
        s->add_flag("--fixed-radius", fl.fixed_radius, "radius cutoff/m instead of cutoff*eps");
        s->add_option("--taper", fl.taper, "taper start as a fraction of the radius");
        s->add_option("--rel-tol", fl.rel_tol, "panel tolerance of the tangent quadrature");
        s->add_option("--out", fl.out, "output path (default stdout)");
        s->add_option("--format", fl.format, "csv | json");
        s->add_option("--suite", fl.suite, "comma-separated acceptance ids for verify");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    RunConfig cfg;
    try {
        if (!fl.config.empty()) {
            std::ifstream in(fl.config);
            if (!in) throw ConfigError("config", "cannot read '" + fl.config + "'");
            std::stringstream ss;
            ss << in.rdbuf();
            cfg = parse_config(ss.str());
        }
        const std::pair<const char*, const std::string*> flags[] = {
            {"metric", &fl.metric}, {"mass", &fl.mass},     {"eps", &fl.eps},       {"order", &fl.order},
            {"pairs", &fl.pairs},   {"seed", &fl.seed},     {"scale", &fl.scale},   {"regfield.sign", &fl.sign},
            {"quad.sdw_nodes", &fl.nodes}, {"quad.cutoff", &fl.cutoff}, {"quad.taper", &fl.taper},
            {"quad.rel_tol", &fl.rel_tol}, {"out", &fl.out}, {"format", &fl.format}, {"suite", &fl.suite}};
        for (const auto& [k, v] : flags)
            if (!v->empty()) set_key(cfg, k, *v);
        for (const auto& p : fl.params) {
            const auto eq = p.find('=');
            if (eq == std::string::npos) throw ConfigError("param", "expected k=v, got '" + p + "'");
            set_key(cfg, "param." + p.substr(0, eq), p.substr(eq + 1));
        }
        if (fl.fixed_radius) cfg.scale_with_eps = false;
        // the tangent integrals and the symbol identities need g(∇σ^ε,∇σ^ε) = 2σ^ε
        if (cfg.sign == 0) cfg.sign = (cmd == "integrals" || cmd == "symbols") ? -1 : 1;
        validate(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "invalid configuration: field '" << e.field << "': " << e.message << "\n";
        return 2;
    }

    std::ofstream file;
    if (!cfg.out.empty()) {
        file.open(cfg.out);
        if (!file) {
            std::cerr << "invalid configuration: field 'out': cannot write '" << cfg.out << "'\n";
            return 2;
        }
    }
    std::ostream& os = cfg.out.empty() ? std::cout : file;

    try {
        if (cmd == "verify") {
            bool ok = true;
            write_table(os, cmd, cfg, cmd_verify(cfg, ok));
            return ok ? 0 : 3;
        }
        const Context ctx = make_context(cfg);
        Table t;
        if (cmd == "geom")
            t = cmd_geom(ctx);
        else if (cmd == "sigma")
            t = cmd_sigma(ctx);
        else if (cmd == "vanvleck")
            t = cmd_vanvleck(ctx);
        else if (cmd == "symbols")
            t = cmd_symbols(ctx);
        else if (cmd == "regfield")
            t = cmd_regfield(ctx);
        else if (cmd == "sdw")
            t = cmd_sdw(ctx);
        else if (cmd == "projector")
            t = cmd_projector(ctx);
        else if (cmd == "eigen")
            t = cmd_eigen(ctx);
        else if (cmd == "perturb")
            t = cmd_perturb(ctx);
        else if (cmd == "integrals")
            t = cmd_integrals(ctx);
        else
            t = cmd_einstein(ctx);
        write_table(os, cmd, cfg, t);
    } catch (const DomainError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "computation failed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
