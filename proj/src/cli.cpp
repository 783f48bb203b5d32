#include "modsurf/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>

#include "modsurf/autoforms.hpp"
#include "modsurf/equilab.hpp"
#include "modsurf/errors.hpp"
#include "modsurf/kernels.hpp"
#include "modsurf/quadinv.hpp"
#include "modsurf/specfun.hpp"

namespace modsurf::cli {

using nlohmann::json;

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw Error("table row width does not match the header");
    rows.push_back(std::move(row));
}

std::string format_cell(const Cell& c) {
    if (auto* d = std::get_if<double>(&c)) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *d == 0.0 ? 0.0 : *d);  // no "-0"
        return buf;
    }
    if (auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t j = 0; j < t.columns.size(); ++j) out += (j ? "," : "") + t.columns[j];
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + format_cell(row[j]);
        out += "\n";
    }
    return out;
}

cplx parse_complex(const std::string& text) {
    static const std::regex full(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*(?:([+-])\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*i)?\s*$)");
    static const std::regex imag_only(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*i\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, imag_only)) {
        std::string s = m[1].str();
        double v = s.empty() || s == "+" ? 1.0 : (s == "-" ? -1.0 : std::stod(s));
        return {0.0, v};
    }
    if (text.find_first_not_of(" \t") != std::string::npos && std::regex_match(text, m, full) &&
        (m[1].matched || m[2].matched)) {
        double re = m[1].matched ? std::stod(m[1].str()) : 0.0;
        double im = 0.0;
        if (m[2].matched) {
            im = m[3].matched ? std::stod(m[3].str()) : 1.0;
            if (m[2].str() == "-") im = -im;
        }
        return {re, im};
    }
    throw DomainError("cannot parse complex number '" + text + "'");
}

Point parse_point(const std::string& text) {
    cplx z = parse_complex(text);
    if (!(z.imag() > 0.0)) throw DomainError("point '" + text + "' is not in the upper half-plane");
    return Point(z.real(), z.imag());
}

std::vector<double> parse_grid(const std::string& text) {
    double a, b, h;
    char c1, c2;
    std::istringstream in(text);
    if (!(in >> a >> c1 >> b >> c2 >> h) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
        throw DomainError("grid must look like a:b:step, got '" + text + "'");
    if (!(h > 0.0) || b < a) throw DomainError("grid needs step > 0 and b >= a");
    std::size_t n = static_cast<std::size_t>(std::floor((b - a) / h * (1.0 + 1e-12) + 1e-9)) + 1;
    if (n > 10000000) throw ResourceError("grid has more than 1e7 points");
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a + static_cast<double>(k) * h;
    return out;
}

namespace {

struct Outcome {
    Table table;
    bool check_failed = false;  // data written, exit 3
    std::string message;
};

struct Common {
    std::string out_dir = ".";
    std::string prefix;
};

GenusSelection parse_genus(const std::string& s) {
    if (s == "all") return {};
    if (s == "principal") return {GenusSelection::Kind::Principal, 0};
    try {
        std::size_t pos = 0;
        int idx = std::stoi(s, &pos);
        if (pos == s.size() && idx >= 0) return {GenusSelection::Kind::Coset, idx};
    } catch (const std::exception&) {
    }
    throw DomainError("genus selector must be all, principal or a class index, got '" + s + "'");
}

std::int64_t require_fundamental(std::int64_t D) {
    if (!is_fundamental_discriminant(D)) throw DomainError("D = " + std::to_string(D) + " is not a fundamental discriminant");
    if (std::abs(D) > kMaxAbsDiscriminant) throw ResourceError("|D| exceeds the supported range");
    return D;
}

std::vector<Point> points_of(const std::vector<std::string>& v) {
    std::vector<Point> out;
    for (const auto& s : v) out.push_back(parse_point(s));
    return out;
}

std::vector<Cell> form_cells(int idx, const QuadForm& f) {
    return {std::int64_t(idx), f.a, f.b, f.c};
}

json cell_json(const Cell& c) {
    if (auto* d = std::get_if<double>(&c)) return *d;
    if (auto* i = std::get_if<std::int64_t>(&c)) return *i;
    return std::get<std::string>(c);
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i];
    return s;
}

struct Driver {
    CLI::App app{"modsurf: numerical experiments on the modular surface"};
    std::map<std::string, Common> common;
    std::function<Outcome()> job;
    CLI::App* chosen = nullptr;

    CLI::App* sub(const std::string& name, const std::string& desc) {
        auto* s = app.add_subcommand(name, desc);
        auto& c = common[name];
        c.prefix = name;
        s->add_option("--out-dir", c.out_dir, "directory for the CSV and JSON outputs")->capture_default_str();
        s->add_option("--prefix", c.prefix, "output file stem")->capture_default_str();
        s->configurable();
        return s;
    }

    void bind(CLI::App* s, std::function<Outcome()> fn) {
        s->callback([this, s, fn] {
            chosen = s;
            job = fn;
        });
    }

    Driver();
};

Driver::Driver() {
    app.require_subcommand(1);
    app.set_config("--config", "", "INI file; [subcommand] sections, flags override it");
    app.config_formatter(std::make_shared<CLI::ConfigINI>());
    app.set_version_flag("--version", kToolVersion);

    {
        auto* s = sub("ms-check", "off-diagonal inner products of truncated Eisenstein series vs the closed form");
        auto p = std::make_shared<std::tuple<std::vector<std::string>, std::vector<std::string>, std::vector<double>, int, double>>(
            std::vector<std::string>{"0.6+3i", "0.55+2i", "0.7+5i"}, std::vector<std::string>{"0.6+3i", "0.55+2i", "0.7+5i"},
            std::vector<double>{1.5, 3.0}, 64, 1e-3);
        s->add_option("--s", std::get<0>(*p), "first spectral parameters")->delimiter(',')->capture_default_str();
        s->add_option("--r", std::get<1>(*p), "second spectral parameters")->delimiter(',')->capture_default_str();
        s->add_option("--T", std::get<2>(*p), "truncation heights")->delimiter(',')->capture_default_str();
        s->add_option("--nodes", std::get<3>(*p), "quadrature nodes per direction")->capture_default_str();
        s->add_option("--tol", std::get<4>(*p), "relative tolerance")->capture_default_str();
        bind(s, [p] {
            auto& [sv, rv, Tv, nodes, tol] = *p;
            Outcome o;
            o.table.columns = {"s_re", "s_im", "r_re", "r_im", "T", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "rel_diff"};
            for (const auto& ss : sv)
                for (const auto& rs : rv)
                    for (double T : Tv) {
                        cplx s1 = parse_complex(ss), r1 = parse_complex(rs);
                        cplx lhs = maass_selberg_lhs(s1, r1, T, nodes);
                        cplx rhs = maass_selberg_rhs(s1, r1, T);
                        double rel = std::abs(lhs - rhs) / std::abs(rhs);
                        o.check_failed |= !(rel <= tol);
                        o.table.add({s1.real(), s1.imag(), r1.real(), r1.imag(), T, lhs.real(), lhs.imag(), rhs.real(),
                                     rhs.imag(), rel});
                    }
            return o;
        });
    }
    {
        auto* s = sub("shc", "h_R on a t-grid against its asymptotic regimes");
        auto R = std::make_shared<double>(0.0);
        auto grid = std::make_shared<std::string>();
        s->add_option("--R", *R, "ball radius")->required();
        s->add_option("--t-grid", *grid, "a:b:step")->required();
        bind(s, [R, grid] {
            Outcome o;
            o.table.columns = {"t", "h_R", "regime", "regime_value", "diff"};
            for (double t : parse_grid(*grid)) {
                double h = h_R(t, *R);
                auto a = asymptotic_h(*R, t);
                o.table.add({t, h, std::int64_t(a.regime), a.value, std::abs(h - a.value)});
            }
            return o;
        });
    }
    {
        auto* s = sub("eisen", "E(z, s) through its Fourier expansion");
        auto sv = std::make_shared<std::string>();
        auto zs = std::make_shared<std::vector<std::string>>();
        s->add_option("--s", *sv, "spectral parameter, e.g. 0.5+14i")->required();
        s->add_option("--z", *zs, "points x+yi")->delimiter(',')->required();
        bind(s, [sv, zs] {
            Outcome o;
            o.table.columns = {"x", "y", "re", "im", "terms"};
            cplx sp = parse_complex(*sv);
            for (const auto& z : points_of(*zs)) {
                auto v = eisenstein_eval_detail(z, sp);
                o.table.add({z.x, z.y, v.value.real(), v.value.imag(), std::int64_t(v.terms)});
            }
            return o;
        });
    }
    struct FormSource {
        double t = 0.0;
        std::string maass_file;
        double hecke_tol = 1e-6;
    };
    auto form_options = [](CLI::App* s, FormSource& f) {
        s->add_option("--t", f.t, "Eisenstein spectral parameter t_g");
        s->add_option("--maass-file", f.maass_file, "Maass coefficient file");
        s->add_option("--hecke-tol", f.hecke_tol, "Hecke relation tolerance on load")->capture_default_str();
    };
    {
        auto* s = sub("ball-avg", "ball averages of |g|^2");
        struct P {
            FormSource f;
            std::vector<std::string> w{"i"};
            std::vector<double> R{0.3};
            double tol = 1e-8;
        };
        auto p = std::make_shared<P>();
        form_options(s, p->f);
        s->add_option("--w", p->w, "ball centers")->delimiter(',')->capture_default_str();
        s->add_option("--R", p->R, "radii")->delimiter(',')->capture_default_str();
        s->add_option("--tol", p->tol, "quadrature tolerance")->capture_default_str();
        bind(s, [p] {
            Evaluable g;
            std::shared_ptr<MaassFormData> data;
            std::shared_ptr<EisensteinField> field;
            if (!p->f.maass_file.empty()) {
                data = std::make_shared<MaassFormData>(load_maass_file(p->f.maass_file, p->f.hecke_tol));
                g = [data](const Point& z) { return cplx(maass_eval(*data, z), 0.0); };
            } else {
                if (!(p->f.t > 0.0)) throw DomainError("ball-avg needs --t > 0 or --maass-file");
                field = std::make_shared<EisensteinField>(cplx(0.5, p->f.t));
                g = [field](const Point& z) { return (*field)(z); };
            }
            Outcome o;
            o.table.columns = {"x", "y", "R", "average", "error"};
            for (const auto& w : points_of(p->w))
                for (double R : p->R) {
                    BallSpec ball(w, R);
                    auto r = ball_integral([&](const Point& z) { return cplx(std::norm(g(z)), 0.0); }, ball, p->tol);
                    o.table.add({w.x, w.y, R, r.value.real() / ball.volume, r.error / ball.volume});
                }
            return o;
        });
    }
    {
        auto* s = sub("variance", "Monte-Carlo variance of shrinking-ball averages");
        struct P {
            FormSource f;
            std::string target = "eisenstein";
            std::int64_t D = 0;
            std::optional<double> R;
            std::optional<double> delta;
            std::size_t samples = 1000;
            std::uint64_t seed = 1;
            std::string centering = "C";
            std::string genus = "all";
            double se_target = 0.0;
            std::size_t max_samples = 1000000;
            std::vector<double> levels;
            int grid = 0;
            double step = 0.0;
            int ball_nr = 0, ball_ntheta = 0;
        };
        auto p = std::make_shared<P>();
        form_options(s, p->f);
        s->add_option("--target", p->target, "eisenstein | maass | heegner | geodesic")
            ->check(CLI::IsMember({"eisenstein", "maass", "heegner", "geodesic"}))
            ->capture_default_str();
        s->add_option("--D", p->D, "discriminant for heegner/geodesic targets");
        s->add_option("--R", p->R, "ball radius");
        s->add_option("--delta", p->delta, "R = param^-delta with param t_g or |D|");
        s->add_option("--samples", p->samples, "Monte-Carlo sample count")->capture_default_str();
        s->add_option("--seed", p->seed, "sampler seed")->capture_default_str();
        s->add_option("--centering", p->centering, "C or D (Eisenstein only)")->check(CLI::IsMember({"C", "D"}))->capture_default_str();
        s->add_option("--genus", p->genus, "all | principal | class index")->capture_default_str();
        s->add_option("--std-error-target", p->se_target, "double samples until reached (0: off)")->capture_default_str();
        s->add_option("--max-samples", p->max_samples, "sample budget")->capture_default_str();
        s->add_option("--levels", p->levels, "exceedance levels c")->delimiter(',');
        s->add_option("--grid", p->grid, "also integrate on an n x n deterministic grid (0: off)")->capture_default_str();
        s->add_option("--step", p->step, "geodesic arclength step (0: R/20)")->capture_default_str();
        s->add_option("--ball-nr", p->ball_nr, "fixed ball rule radial nodes (0: auto)")->capture_default_str();
        s->add_option("--ball-ntheta", p->ball_ntheta, "fixed ball rule angular nodes (0: auto)")->capture_default_str();
        bind(s, [p] {
            ExperimentConfig cfg;
            cfg.samples = p->samples;
            cfg.seed = p->seed;
            cfg.genus = parse_genus(p->genus);
            cfg.std_error_target = p->se_target;
            cfg.max_samples = p->max_samples;
            cfg.exceedance_levels = p->levels;
            cfg.geodesic_step = p->step;
            cfg.ball_nr = p->ball_nr;
            cfg.ball_ntheta = p->ball_ntheta;
            bool arithmetic = p->target == "heegner" || p->target == "geodesic";
            if (arithmetic) require_fundamental(p->D);
            double R;
            if (p->R) {
                R = *p->R;
            } else if (p->delta) {
                double param = arithmetic ? static_cast<double>(p->D) : p->f.t;
                if (p->target == "maass") throw DomainError("use --R with maass data");
                R = schedule_radius(param, *p->delta);
            } else {
                throw DomainError("variance needs --R or --delta");
            }
            if (!(R > 0.0)) throw DomainError("R must be positive");
            Centering centering = p->centering == "D" ? Centering::DConst : Centering::CConst;
            VarianceReport rep;
            std::optional<GridEstimate> grid;
            if (p->target == "eisenstein") {
                if (!(p->f.t > 0.0)) throw DomainError("eisenstein target needs --t > 0");
                rep = var_estimator_eisenstein(p->f.t, R, cfg, centering);
                if (p->grid > 0) grid = var_grid_eisenstein(p->f.t, R, p->grid, p->grid, cfg, centering);
            } else if (p->target == "maass") {
                if (p->f.maass_file.empty()) throw DomainError("maass target needs --maass-file");
                auto data = load_maass_file(p->f.maass_file, p->f.hecke_tol);
                Evaluable g = [&data](const Point& z) { return cplx(maass_eval(data, z), 0.0); };
                rep = var_estimator(g, R, cfg);
                if (p->grid > 0) grid = var_grid(g, R, p->grid, p->grid, cfg);
            } else {
                auto kind = p->target == "heegner" ? GenusKind::Heegner : GenusKind::Geodesic;
                rep = genus_variance_estimator(p->D, kind, R, cfg);
                if (p->grid > 0) grid = genus_variance_grid(p->D, kind, R, p->grid, p->grid, cfg);
            }
            Outcome o;
            o.table.columns = {"target", "R", "n", "centering", "estimate", "std_error", "partial", "c", "exceedance"};
            if (grid) {
                o.table.columns.push_back("grid_value");
                o.table.columns.push_back("grid_error");
            }
            for (const auto& e : rep.exceedance) {
                std::vector<Cell> row{p->target, R, std::int64_t(rep.n), std::string(centering_name(rep.centering)),
                                      rep.estimate, rep.std_error, std::int64_t(rep.partial), e.c, e.measure};
                if (grid) {
                    row.push_back(grid->value);
                    row.push_back(grid->error);
                }
                o.table.add(std::move(row));
            }
            if (rep.partial) o.message = "std_error target not reached within max_samples (partial report)";
            return o;
        });
    }
    {
        auto* s = sub("planck", "Cauchy-Schwarz lower bound for Eisenstein ball averages");
        struct P {
            std::vector<double> t{5.0, 20.0};
            std::vector<double> R{0.05, 0.3};
            std::vector<std::string> w{"i", "0.3+1.2i"};
            double tol = 1e-9, slack = 1e-8;
        };
        auto p = std::make_shared<P>();
        s->add_option("--t", p->t, "spectral parameters")->delimiter(',')->capture_default_str();
        s->add_option("--R", p->R, "radii")->delimiter(',')->capture_default_str();
        s->add_option("--w", p->w, "ball centers")->delimiter(',')->capture_default_str();
        s->add_option("--tol", p->tol, "quadrature tolerance")->capture_default_str();
        s->add_option("--slack", p->slack, "allowed excess")->capture_default_str();
        bind(s, [p] {
            Outcome o;
            o.table.columns = {"t", "R", "x", "y", "lhs", "rhs", "error", "violated"};
            for (double t : p->t)
                for (double R : p->R)
                    for (const auto& w : points_of(p->w)) {
                        auto c = planck_check(t, R, w, p->tol, p->slack);
                        o.check_failed |= c.violated;
                        o.table.add({t, R, w.x, w.y, c.lhs, c.rhs, c.error, std::int64_t(c.violated)});
                    }
            return o;
        });
    }
    {
        auto* s = sub("classgroup", "reduced forms, genus labels and inverses");
        auto D = std::make_shared<std::int64_t>(0);
        auto wide = std::make_shared<bool>(false);
        s->add_option("--D", *D, "fundamental discriminant")->required();
        s->add_flag("--wide", *wide, "wide class group for D > 0");
        bind(s, [D, wide] {
            auto table = class_group(require_fundamental(*D), !*wide);
            Outcome o;
            o.table.columns = {"class", "a", "b", "c", "genus", "inverse", "order"};
            for (int i = 0; i < table.h; ++i) {
                std::int64_t order = 1;
                for (int x = i; x != 0; x = table.op(x, i)) ++order;
                auto row = form_cells(i, table.representatives[i]);
                row.insert(row.end(), {std::int64_t(table.genus[i]), std::int64_t(table.inverse(i)), order});
                o.table.add(std::move(row));
            }
            return o;
        });
    }
    {
        auto* s = sub("genus", "genus character values on every class");
        auto D = std::make_shared<std::int64_t>(0);
        s->add_option("--D", *D, "fundamental discriminant")->required();
        bind(s, [D] {
            auto table = class_group(require_fundamental(*D));
            Outcome o;
            o.table.columns = {"d1", "d2", "class", "a", "b", "c", "chi"};
            for (const auto& chi : genus_characters(*D))
                for (int i = 0; i < table.h; ++i) {
                    const auto& f = table.representatives[i];
                    o.table.add({chi.d1, chi.d2, std::int64_t(i), f.a, f.b, f.c, std::int64_t(chi_eval(chi, i, table))});
                }
            return o;
        });
    }
    {
        auto* s = sub("heegner", "reduced Heegner points, or a ball count with --w/--R");
        struct P {
            std::int64_t D = 0;
            std::string genus = "all";
            std::optional<std::string> w;
            std::optional<double> R;
        };
        auto p = std::make_shared<P>();
        s->add_option("--D", p->D, "negative fundamental discriminant")->required();
        s->add_option("--genus", p->genus, "all | principal | class index")->capture_default_str();
        s->add_option("--w", p->w, "ball center");
        s->add_option("--R", p->R, "ball radius");
        bind(s, [p] {
            if (require_fundamental(p->D) >= 0) throw DomainError("heegner needs D < 0");
            auto sel = parse_genus(p->genus);
            Outcome o;
            if (p->w.has_value() != p->R.has_value()) throw DomainError("--w and --R go together");
            if (p->w) {
                Point w = parse_point(*p->w);
                auto table = class_group(p->D);
                int count = heegner_ball_count(p->D, sel, BallSpec(w, *p->R));
                o.table.columns = {"D", "x", "y", "R", "count", "classes"};
                o.table.add({p->D, w.x, w.y, *p->R, std::int64_t(count), std::int64_t(select_classes(table, sel).size())});
                return o;
            }
            auto table = class_group(p->D);
            o.table.columns = {"class", "a", "b", "c", "x", "y"};
            for (int i : select_classes(table, sel)) {
                Point z = reduce(heegner_point(table.representatives[i])).first;
                auto row = form_cells(i, table.representatives[i]);
                row.insert(row.end(), {z.x, z.y});
                o.table.add(std::move(row));
            }
            return o;
        });
    }
    {
        auto* s = sub("geodesic", "closed geodesic lengths, or the length inside a ball with --w/--R");
        struct P {
            std::int64_t D = 0;
            std::string genus = "all";
            std::optional<std::string> w;
            std::optional<double> R;
            double step = 0.0;
        };
        auto p = std::make_shared<P>();
        s->add_option("--D", p->D, "positive fundamental discriminant")->required();
        s->add_option("--genus", p->genus, "all | principal | class index")->capture_default_str();
        s->add_option("--w", p->w, "ball center");
        s->add_option("--R", p->R, "ball radius");
        s->add_option("--step", p->step, "arclength step (0: R/20)")->capture_default_str();
        bind(s, [p] {
            if (require_fundamental(p->D) <= 0) throw DomainError("geodesic needs D > 0");
            auto sel = parse_genus(p->genus);
            Outcome o;
            if (p->w.has_value() != p->R.has_value()) throw DomainError("--w and --R go together");
            if (p->w) {
                Point w = parse_point(*p->w);
                double step = p->step > 0.0 ? p->step : *p->R / 20.0;
                auto r = geodesic_ball_length(p->D, sel, BallSpec(w, *p->R), step);
                o.table.columns = {"D", "x", "y", "R", "step", "length", "error", "samples"};
                o.table.add({p->D, w.x, w.y, *p->R, step, r.length, r.error, std::int64_t(r.samples)});
                return o;
            }
            auto table = class_group(p->D);
            auto unit = pell_unit(p->D);
            o.table.columns = {"class", "a", "b", "c", "root_minus", "root_plus", "length"};
            for (int i : select_classes(table, sel)) {
                auto seg = geodesic_of_form(table.representatives[i], unit);
                auto row = form_cells(i, table.representatives[i]);
                row.insert(row.end(), {seg.root_minus, seg.root_plus, seg.length});
                o.table.add(std::move(row));
            }
            return o;
        });
    }
    {
        auto* s = sub("minus-cf", "minus continued fraction cycles per narrow class");
        auto D = std::make_shared<std::int64_t>(0);
        auto shift = std::make_shared<int>(1);
        s->add_option("--D", *D, "positive fundamental discriminant")->required();
        s->add_option("--seed-shift", *shift, "seed shift k >= 1")->capture_default_str();
        bind(s, [D, shift] {
            if (require_fundamental(*D) <= 0) throw DomainError("minus-cf needs D > 0");
            auto table = class_group(*D);
            Outcome o;
            o.table.columns = {"class", "a", "b", "c", "length", "volume", "cycle"};
            for (int i = 0; i < table.h; ++i) {
                auto cyc = minus_cf_cycle(i, table, *shift);
                std::vector<std::string> e;
                for (auto n : cyc.entries) e.push_back(std::to_string(n));
                auto row = form_cells(i, table.representatives[i]);
                row.insert(row.end(), {std::int64_t(cyc.length()), cyc.volume(), join(e)});
                o.table.add(std::move(row));
            }
            return o;
        });
    }
    {
        auto* s = sub("weyl", "genus-character Weyl sums with the L-function oracle");
        struct P {
            std::int64_t D = 0;
            std::string s = "2";
            std::optional<std::int64_t> d1;
            double step = 0.01;
            std::string maass_file;
            double hecke_tol = 1e-6;
            double tol = 0.0;
        };
        auto p = std::make_shared<P>();
        s->add_option("--D", p->D, "fundamental discriminant")->required();
        s->add_option("--s", p->s, "spectral parameter (Eisenstein)")->capture_default_str();
        s->add_option("--d1", p->d1, "single character chi_{d1, D/d1} (default: all)");
        s->add_option("--step", p->step, "geodesic arclength step")->capture_default_str();
        s->add_option("--maass-file", p->maass_file, "sum a Maass form instead of E(., s)");
        s->add_option("--hecke-tol", p->hecke_tol, "Hecke relation tolerance on load")->capture_default_str();
        s->add_option("--tol", p->tol, "fail when an oracle rel_diff exceeds this (0: report only)")->capture_default_str();
        bind(s, [p] {
            require_fundamental(p->D);
            std::optional<GenusChar> chi;
            if (p->d1) {
                if (*p->d1 == 0 || p->D % *p->d1 != 0) throw DomainError("d1 must divide D");
                GenusChar c{*p->d1, p->D / *p->d1};
                bool ok = false;
                for (const auto& g : genus_characters(p->D)) ok |= (g.d1 == c.d1 && g.d2 == c.d2) || (g.d1 == c.d2 && g.d2 == c.d1);
                if (!ok) throw DomainError("(d1, D/d1) is not a genus character of D");
                chi = c;
            }
            if (!(p->step > 0.0)) throw DomainError("--step must be positive");
            WeylSumReport rep;
            if (!p->maass_file.empty())
                rep = weyl_sum_maass(load_maass_file(p->maass_file, p->hecke_tol), p->D, chi, p->step);
            else
                rep = weyl_sum_eisenstein(p->D, chi, parse_complex(p->s), p->step);
            Outcome o;
            o.table.columns = {"d1", "d2", "direct_re", "direct_im", "oracle_re", "oracle_im", "rel_diff"};
            for (const auto& e : rep.entries) {
                if (e.oracle) {
                    o.check_failed |= p->tol > 0.0 && !(e.rel_diff <= p->tol);
                    o.table.add({e.chi.d1, e.chi.d2, e.direct.real(), e.direct.imag(), e.oracle->real(), e.oracle->imag(), e.rel_diff});
                } else {
                    o.table.add({e.chi.d1, e.chi.d2, e.direct.real(), e.direct.imag(), "NA", "NA", "NA"});
                }
            }
            o.message = rep.note;
            return o;
        });
    }
    {
        auto* s = sub("cnf-check", "class number formula over a discriminant range");
        struct P {
            std::int64_t dmin = -500, dmax = -3;
            double tol = 1e-6;
        };
        auto p = std::make_shared<P>();
        s->add_option("--dmin", p->dmin, "smallest D")->capture_default_str();
        s->add_option("--dmax", p->dmax, "largest D")->capture_default_str();
        s->add_option("--tol", p->tol, "absolute tolerance on h")->capture_default_str();
        bind(s, [p] {
            if (p->dmin > p->dmax) throw DomainError("dmin > dmax");
            if (std::max(std::abs(p->dmin), std::abs(p->dmax)) > 1000000) throw ResourceError("cnf-check supports |D| <= 1e6");
            std::vector<std::int64_t> Ds;
            for (std::int64_t D = p->dmin; D <= p->dmax; ++D)
                if (D != 1 && is_fundamental_discriminant(D)) Ds.push_back(D);
            Outcome o;
            o.table.columns = {"D", "h_table", "h_formula", "abs_diff"};
            for (auto D : Ds) {
                auto r = class_number_formula_check(D);
                o.check_failed |= !(r.abs_diff <= p->tol);
                o.table.add({D, std::int64_t(r.h_table), r.h_formula, r.abs_diff});
            }
            return o;
        });
    }
    {
        auto* s = sub("kronecker", "Kronecker limit formula residuals");
        struct P {
            std::vector<std::string> w{"i", "0.3+1.2i"};
            std::vector<double> eps{1e-2, 1e-3};
        };
        auto p = std::make_shared<P>();
        s->add_option("--w", p->w, "points")->delimiter(',')->capture_default_str();
        s->add_option("--eps", p->eps, "offsets from s = 1")->delimiter(',')->capture_default_str();
        bind(s, [p] {
            Outcome o;
            o.table.columns = {"x", "y", "eps", "residual"};
            for (const auto& w : points_of(p->w))
                for (double e : p->eps) o.table.add({w.x, w.y, e, kronecker_limit_check(w, e)});
            return o;
        });
    }
}

json manifest_of(CLI::App* s, const std::string& csv, const std::string& js, double wall) {
    json params = json::object(), tols = json::object();
    json seed = nullptr;
    for (const CLI::Option* opt : s->get_options()) {
        std::string name = opt->get_name(false, true);
        if (name.rfind("--", 0) == 0) name = name.substr(2);
        if (name.find("help") != std::string::npos || name.empty()) continue;
        std::string value = opt->count() ? join(opt->results()) : opt->get_default_str();
        params[name] = value;
        if (name.find("tol") != std::string::npos || name == "slack") tols[name] = value;
        if (name == "seed") seed = value;
    }
    return json{{"subcommand", s->get_name()}, {"parameters", params},   {"seed", seed},
                {"tool_version", kToolVersion}, {"wall_time_s", wall},   {"outputs", {{"csv", csv}, {"json", js}}},
                {"tolerances", tols}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Driver d;
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        d.app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << d.app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << d.app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion& e) {
        out << kToolVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    }
    if (!d.job) {
        err << "error: no subcommand\n";
        return kValidation;
    }
    auto t0 = std::chrono::steady_clock::now();
    try {
        Outcome o = d.job();
        for (const auto& row : o.table.rows)
            for (const auto& c : row)
                if (auto* v = std::get_if<double>(&c); v && !std::isfinite(*v))
                    throw ToleranceNotMet("non-finite value in column output");
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto& c = d.common.at(d.chosen->get_name());
        std::filesystem::path dir(c.out_dir);
        std::filesystem::create_directories(dir);
        std::string csv = (dir / (c.prefix + ".csv")).string();
        std::string js = (dir / (c.prefix + ".json")).string();
        json rows = json::array();
        for (const auto& row : o.table.rows) {
            json rec = json::object();
            for (std::size_t j = 0; j < row.size(); ++j) rec[o.table.columns[j]] = cell_json(row[j]);
            rows.push_back(rec);
        }
        json doc{{"manifest", manifest_of(d.chosen, csv, js, wall)}, {"columns", o.table.columns}, {"rows", rows}};
        if (!o.message.empty()) doc["note"] = o.message;
        {
            std::ofstream f(csv, std::ios::binary);
            f << to_csv(o.table);
            if (!f) throw ResourceError("cannot write " + csv);
        }
        {
            std::ofstream f(js, std::ios::binary);
            f << doc.dump(2) << "\n";
            if (!f) throw ResourceError("cannot write " + js);
        }
        out << csv << "\n" << js << "\n";
        if (!o.message.empty()) err << "note: " << o.message << "\n";
        if (o.check_failed) {
            err << "check failed: a row exceeds its tolerance\n";
            return kTolerance;
        }
        return kOk;
    } catch (const DomainError& e) {
        err << "validation error: " << e.what() << "\n";
        return kValidation;
    } catch (const ToleranceNotMet& e) {
        err << "tolerance not met: " << e.what() << "\n";
        return kTolerance;
    } catch (const ResourceError& e) {
        err << "resource error: " << e.what() << "\n";
        return kResource;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "resource error: " << e.what() << "\n";
        return kResource;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace modsurf::cli
