#include "modsurf/quadinv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <string>

#include "modsurf/errors.hpp"
#include "modsurf/specfun.hpp"

namespace modsurf {

namespace {

using i128 = __int128;

std::int64_t narrow64(i128 v, const char* what) {
    if (v > static_cast<i128>(INT64_MAX) || v < static_cast<i128>(INT64_MIN))
        throw ResourceError(std::string(what) + ": 64-bit overflow");
    return static_cast<std::int64_t>(v);
}

std::int64_t isqrt(std::int64_t n) {
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && static_cast<i128>(r) * r > n) --r;
    while (static_cast<i128>(r + 1) * (r + 1) <= n) ++r;
    return r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t pos_mod(i128 a, std::int64_t m) {
    i128 r = a % m;
    if (r < 0) r += m;
    return static_cast<std::int64_t>(r);
}

// u*a + v*b = g >= 0
std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& u, std::int64_t& v) {
    std::int64_t r0 = a, r1 = b, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
    while (r1 != 0) {
        std::int64_t q = r0 / r1;
        std::tie(r0, r1) = std::make_pair(r1, r0 - q * r1);
        std::tie(s0, s1) = std::make_pair(s1, s0 - q * s1);
        std::tie(t0, t1) = std::make_pair(t1, t0 - q * t1);
    }
    if (r0 < 0) {
        r0 = -r0;
        s0 = -s0;
        t0 = -t0;
    }
    u = s0;
    v = t0;
    return r0;
}

bool is_square(std::int64_t n) {
    if (n < 0) return false;
    std::int64_t r = isqrt(n);
    return r * r == n;
}

void check_discriminant(std::int64_t D, const char* who) {
    if (!is_discriminant(D)) throw DomainError(std::string(who) + ": not a non-square discriminant");
    if (D > kMaxAbsDiscriminant || D < -kMaxAbsDiscriminant)
        throw DomainError(std::string(who) + ": |D| exceeds 1e8");
}

void check_fundamental(std::int64_t D, const char* who) {
    check_discriminant(D, who);
    if (!is_fundamental_discriminant(D)) throw DomainError(std::string(who) + ": D is not fundamental");
}

// sort key for class representatives
auto form_key(const QuadForm& f) {
    return std::make_tuple(f.a < 0, f.a < 0 ? -f.a : f.a, f.b < 0 ? -f.b : f.b, f.b < 0, f.c);
}

bool key_less(const QuadForm& f, const QuadForm& g) { return form_key(f) < form_key(g); }

// move to an equivalent form with a > 0 (needed by the composition algorithm)
QuadForm positive_leading(const QuadForm& f) {
    if (f.a > 0) return f;
    QuadForm g = reduce_form(f);
    if (g.a < 0) g = rho(g);
    return g;
}

double log_big(const BigInt& v) {
    if (v <= 0) return -INFINITY;
    std::size_t bits = boost::multiprecision::msb(v);
    if (bits < 900) return std::log(v.convert_to<double>());
    std::size_t shift = bits - 60;
    BigInt top = v >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::numbers::ln2;
}

// log((x + y sqrt D)/2) for x^2 - D y^2 = +-4 with x, y > 0
double log_unit(const BigInt& x, const BigInt& y, std::int64_t D) {
    double lx = log_big(x);
    double ly = log_big(y) + 0.5 * std::log(static_cast<double>(D));
    double hi = std::max(lx, ly), lo = std::min(lx, ly);
    return hi + std::log1p(std::exp(lo - hi)) - std::numbers::ln2;
}

}  // namespace

std::int64_t QuadForm::D() const {
    return narrow64(static_cast<i128>(b) * b - static_cast<i128>(4) * a * c, "QuadForm::D");
}

bool QuadForm::primitive() const { return std::gcd(std::gcd(a, b), c) == 1; }

bool QuadForm::reduced() const {
    std::int64_t d = D();
    if (d < 0) {
        if (!(a > 0)) return false;
        if (!((b < 0 ? -b : b) <= a && a <= c)) return false;
        if ((b < 0) && (-b == a || a == c)) return false;
        return true;
    }
    // sqrt(D) - b < 2|a| < sqrt(D) + b with 0 < b < sqrt(D)
    if (b <= 0 || static_cast<i128>(b) * b >= d) return false;
    i128 aa = 2 * static_cast<i128>(a < 0 ? -a : a);
    if ((aa + b) * (aa + b) <= d) return false;
    i128 m = aa - b;
    return m <= 0 || m * m < d;
}

std::int64_t QuadForm::eval(std::int64_t x, std::int64_t y) const {
    i128 v = static_cast<i128>(a) * x * x + static_cast<i128>(b) * x * y + static_cast<i128>(c) * y * y;
    return narrow64(v, "QuadForm::eval");
}

bool is_discriminant(std::int64_t D) {
    std::int64_t r = ((D % 4) + 4) % 4;
    return (r == 0 || r == 1) && D != 0 && !is_square(D);
}

QuadForm transform(const QuadForm& f, const Mat2& g) {
    if (g.det() != 1) throw DomainError("transform: matrix must lie in SL2(Z)");
    i128 p = g.a, q = g.b, r = g.c, s = g.d;
    i128 A = f.a * s * s - f.b * r * s + f.c * r * r;
    i128 B = -2 * f.a * q * s + f.b * (p * s + q * r) - 2 * f.c * p * r;
    i128 C = f.a * q * q - f.b * q * p + f.c * p * p;
    return {narrow64(A, "transform"), narrow64(B, "transform"), narrow64(C, "transform")};
}

QuadForm rho(const QuadForm& f) {
    std::int64_t D = f.D();
    if (D <= 0 || f.c == 0) throw DomainError("rho: needs an indefinite form with c != 0");
    std::int64_t s = isqrt(D);
    std::int64_t ac = f.c < 0 ? -f.c : f.c;
    std::int64_t m = 2 * ac;
    std::int64_t r;
    if (ac > s) {
        r = pos_mod(-static_cast<i128>(f.b), m);
        if (r > ac) r -= m;
    } else {
        // largest r < sqrt D with r = -b mod 2|c|
        r = s - pos_mod(static_cast<i128>(s) + f.b, m);
    }
    i128 num = static_cast<i128>(r) * r - D;
    return {f.c, r, narrow64(num / (4 * static_cast<i128>(f.c)), "rho")};
}

QuadForm reduce_form(const QuadForm& f0) {
    std::int64_t D = f0.D();
    if (!is_discriminant(D)) throw DomainError("reduce_form: discriminant is zero or a square");
    if (D < 0) {
        QuadForm f = f0;
        if (f.a < 0) throw DomainError("reduce_form: negative definite form");
        for (int it = 0; it < 100000; ++it) {
            // b into (-a, a]
            std::int64_t m = 2 * f.a;
            std::int64_t b = pos_mod(f.b, m);
            if (b > f.a) b -= m;
            i128 k = (static_cast<i128>(b) - f.b) / m;  // T^k shift
            i128 c = f.c + k * f.b + k * k * f.a;       // f(x + ky, y)
            f = {f.a, b, narrow64(c, "reduce_form")};
            if (f.a > f.c) {
                f = {f.c, -f.b, f.a};
                continue;
            }
            if (f.b < 0 && (f.a == f.c || -f.b == f.a)) f.b = -f.b;
            return f;
        }
        throw ResourceError("reduce_form: iteration cap");
    }
    QuadForm f = f0;
    for (int it = 0; it < 1000000; ++it) {
        if (f.reduced()) return f;
        f = rho(f);
    }
    throw ResourceError("reduce_form: iteration cap");
}

QuadForm compose(const QuadForm& f0, const QuadForm& g0) {
    std::int64_t D = f0.D();
    if (g0.D() != D) throw DomainError("compose: discriminants differ");
    if (!f0.primitive() || !g0.primitive()) throw DomainError("compose: forms must be primitive");
    QuadForm f1 = positive_leading(f0), f2 = positive_leading(g0);
    if (f1.a > f2.a) std::swap(f1, f2);
    std::int64_t a1 = f1.a, b1 = f1.b, a2 = f2.a, b2 = f2.b, c2 = f2.c;
    std::int64_t s = (b1 + b2) / 2;
    std::int64_t n = b2 - s;
    std::int64_t y1, d;
    if (a2 % a1 == 0) {
        y1 = 0;
        d = a1;
    } else {
        std::int64_t u, v;
        d = ext_gcd(a2, a1, u, v);
        y1 = u;
    }
    std::int64_t x2, y2, d1;
    if (s % d == 0) {
        y2 = -1;
        x2 = 0;
        d1 = d;
    } else {
        std::int64_t u, v;
        d1 = ext_gcd(s, d, u, v);
        x2 = u;
        y2 = -v;
    }
    std::int64_t v1 = a1 / d1, v2 = a2 / d1;
    std::int64_t r = pos_mod(static_cast<i128>(y1) * y2 * n - static_cast<i128>(x2) * c2, v1);
    i128 b3 = b2 + static_cast<i128>(2) * v2 * r;
    i128 a3 = static_cast<i128>(v1) * v2;
    i128 num = b3 * b3 - D;
    if (num % (4 * a3) != 0) throw Error("compose: internal inconsistency");
    QuadForm out{narrow64(a3, "compose"), narrow64(b3, "compose"), narrow64(num / (4 * a3), "compose")};
    return reduce_form(out);
}

std::vector<QuadForm> enumerate_reduced(std::int64_t D) {
    check_discriminant(D, "enumerate_reduced");
    if (D > 0) throw DomainError("enumerate_reduced: D must be negative");
    std::vector<QuadForm> out;
    for (std::int64_t a = 1; 3 * a * a <= -D; ++a) {
        for (std::int64_t b = -a + 1; b <= a; ++b) {
            i128 num = static_cast<i128>(b) * b - D;
            if (num % (4 * a) != 0) continue;
            auto c = static_cast<std::int64_t>(num / (4 * a));
            if (c < a || (c == a && b < 0)) continue;
            QuadForm f{a, b, c};
            if (f.primitive()) out.push_back(f);
        }
    }
    std::sort(out.begin(), out.end(), key_less);
    return out;
}

std::vector<std::vector<QuadForm>> reduced_cycles(std::int64_t D) {
    check_discriminant(D, "reduced_cycles");
    if (D < 0) throw DomainError("reduced_cycles: D must be positive");
    std::int64_t s = isqrt(D);
    std::set<QuadForm> forms;
    for (std::int64_t b = (D % 2 == 0) ? 2 : 1; b <= s; b += 2) {
        std::int64_t N = (D - b * b) / 4;  // -ac
        for (std::int64_t m = 1; m * m <= N; ++m) {
            if (N % m != 0) continue;
            for (std::int64_t aa : {m, N / m}) {
                QuadForm f{aa, b, -N / aa};
                if (!f.reduced() || !f.primitive()) continue;
                forms.insert(f);
                forms.insert({-aa, b, N / aa});
            }
        }
    }
    std::vector<std::vector<QuadForm>> cycles;
    std::set<QuadForm> seen;
    for (const auto& f : forms) {
        if (seen.count(f)) continue;
        std::vector<QuadForm> cyc;
        QuadForm g = f;
        do {
            cyc.push_back(g);
            seen.insert(g);
            g = rho(g);
            if (cyc.size() > forms.size()) throw Error("reduced_cycles: cycle did not close");
        } while (g != f);
        // start the cycle at its smallest member
        auto it = std::min_element(cyc.begin(), cyc.end(), key_less);
        std::rotate(cyc.begin(), it, cyc.end());
        cycles.push_back(std::move(cyc));
    }
    std::sort(cycles.begin(), cycles.end(),
              [](const auto& x, const auto& y) { return key_less(x.front(), y.front()); });
    return cycles;
}

int narrow_class_number(std::int64_t D) {
    if (D < 0) return static_cast<int>(enumerate_reduced(D).size());
    return static_cast<int>(reduced_cycles(D).size());
}

int ClassGroupTable::inverse(int i) const {
    for (int j = 0; j < h; ++j)
        if (compose[i][j] == 0) return j;
    throw Error("ClassGroupTable: no inverse");
}

int ClassGroupTable::index_of(const QuadForm& f) const {
    if (f.D() != D) throw DomainError("index_of: discriminant mismatch");
    if (!f.primitive()) throw DomainError("index_of: form is not primitive");
    QuadForm g = reduce_form(f);
    auto it = lookup.find(g);
    if (it == lookup.end()) throw Error("index_of: reduced form missing from the table");
    return it->second;
}

int ClassGroupTable::genus_count() const {
    return genus.empty() ? 0 : *std::max_element(genus.begin(), genus.end()) + 1;
}

ClassGroupTable class_group(std::int64_t D, bool narrow) {
    check_fundamental(D, "class_group");
    ClassGroupTable t;
    t.D = D;
    t.narrow = narrow || D < 0;
    if (D < 0) {
        t.representatives = enumerate_reduced(D);
        for (std::size_t i = 0; i < t.representatives.size(); ++i)
            t.lookup[t.representatives[i]] = static_cast<int>(i);
    } else {
        auto cycles = reduced_cycles(D);
        for (std::size_t i = 0; i < cycles.size(); ++i) {
            t.representatives.push_back(cycles[i].front());
            for (const auto& f : cycles[i]) t.lookup[f] = static_cast<int>(i);
        }
    }
    t.h = static_cast<int>(t.representatives.size());
    t.compose.assign(t.h, std::vector<int>(t.h, 0));
    for (int i = 0; i < t.h; ++i)
        for (int j = i; j < t.h; ++j)
            t.compose[i][j] = t.compose[j][i] = t.index_of(compose(t.representatives[i], t.representatives[j]));

    if (!t.narrow) {
        // quotient by the class of the negated principal form
        const QuadForm& p = t.representatives[0];
        int J = t.index_of({-p.a, p.b, -p.c});
        std::vector<int> coset(t.h, -1);
        std::vector<int> keep;
        for (int i = 0; i < t.h; ++i) {
            if (coset[i] >= 0) continue;
            coset[i] = coset[t.compose[i][J]] = static_cast<int>(keep.size());
            keep.push_back(i);
        }
        ClassGroupTable w;
        w.D = D;
        w.narrow = false;
        w.h = static_cast<int>(keep.size());
        for (int i : keep) w.representatives.push_back(t.representatives[i]);
        for (const auto& [f, idx] : t.lookup) w.lookup[f] = coset[idx];
        w.compose.assign(w.h, std::vector<int>(w.h, 0));
        for (int i = 0; i < w.h; ++i)
            for (int j = 0; j < w.h; ++j) w.compose[i][j] = coset[t.compose[keep[i]][keep[j]]];
        t = std::move(w);
    }

    std::set<int> sq;
    for (int i = 0; i < t.h; ++i) sq.insert(t.compose[i][i]);
    t.squares_subgroup.assign(sq.begin(), sq.end());
    t.genus.assign(t.h, -1);
    int label = 0;
    for (int i = 0; i < t.h; ++i) {
        if (t.genus[i] >= 0) continue;
        for (int s : t.squares_subgroup) t.genus[t.compose[i][s]] = label;
        ++label;
    }
    return t;
}

Point heegner_point(const QuadForm& f) {
    std::int64_t D = f.D();
    if (D >= 0 || f.a <= 0) throw DomainError("heegner_point: needs a positive definite form");
    double a2 = 2.0 * static_cast<double>(f.a);
    return Point(-static_cast<double>(f.b) / a2, std::sqrt(-static_cast<double>(D)) / a2);
}

double PellUnit::value() const { return std::exp(log_value); }

PellUnit pell_unit(std::int64_t D) {
    check_fundamental(D, "pell_unit");
    if (D < 0) throw DomainError("pell_unit: D must be positive");
    const std::int64_t delta = D % 2;
    const std::int64_t s = isqrt(D);
    // continued fraction of omega = (delta + sqrt D)/2 as (P + sqrt D)/Q
    std::int64_t P = delta, Q = 2;
    BigInt p0 = 1, p1 = 0, q0 = 0, q1 = 1;  // (p_{k-1}, p_{k-2}), (q_{k-1}, q_{k-2})
    const BigInt c4 = (BigInt(delta) * delta - D) / 4;
    PellUnit u;
    u.D = D;
    for (long it = 0; it < 10000000; ++it) {
        std::int64_t a = floor_div(P + s, Q);
        BigInt p = a * p0 + p1, q = a * q0 + q1;
        p1 = p0;
        p0 = p;
        q1 = q0;
        q0 = q;
        BigInt N = p * p - delta * p * q + q * q * c4;
        if (N == 1 || N == -1) {
            u.fx = 2 * p - delta * q;
            u.fy = q;
            u.norm_of_fundamental_unit = N == 1 ? 1 : -1;
            break;
        }
        std::int64_t Pn = a * Q - P;
        std::int64_t Qn = narrow64((static_cast<i128>(D) - static_cast<i128>(Pn) * Pn) / Q, "pell_unit");
        P = Pn;
        Q = Qn;
    }
    if (u.fy == 0) throw ResourceError("pell_unit: continued fraction did not reach a unit");
    if (u.norm_of_fundamental_unit == 1) {
        u.x = u.fx;
        u.y = u.fy;
    } else {
        // eps^2 = ((x^2 + D y^2)/2 + x y sqrt D)/2
        u.x = (u.fx * u.fx + D * u.fy * u.fy) / 2;
        u.y = u.fx * u.fy;
    }
    if (u.x * u.x - D * u.y * u.y != 4) throw Error("pell_unit: x^2 - D y^2 != 4");
    u.log_fundamental = log_unit(u.fx, u.fy, D);
    u.log_value = log_unit(u.x, u.y, D);
    return u;
}

Point GeodesicSegment::at(double t) const {
    double dir = form.a > 0 ? 1.0 : -1.0;
    return Point(center + dir * radius * std::tanh(t), radius / std::cosh(t));
}

std::vector<GeodesicSample> GeodesicSegment::sample(double step, std::size_t max_samples) const {
    if (!(step > 0.0)) throw DomainError("GeodesicSegment::sample: step must be positive");
    double nd = std::ceil(length / step);
    if (nd > static_cast<double>(max_samples)) throw ResourceError("GeodesicSegment::sample: sample cap exceeded");
    auto n = static_cast<std::size_t>(std::max(1.0, nd));
    const double h = length / static_cast<double>(n);
    const double sqrtD = std::sqrt(static_cast<double>(form.D()));

    QuadForm frame = form;
    double dir = form.a > 0 ? 1.0 : -1.0;
    double c = center, r = radius;
    double tau = -0.5 * h;  // local parameter on the frame's circle
    std::vector<GeodesicSample> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        tau += h;
        double ch = std::cosh(tau);
        Point z(c + dir * r * std::tanh(tau), r / ch);
        auto [zr, word] = reduce(z);
        if (!word.is_identity()) {
            const Mat2& g = word.matrix;
            // carry the tangent direction through g to orient the new frame
            cplx tangent(dir / (ch * ch), -std::tanh(tau) / ch);
            cplx den = static_cast<double>(g.c) * z.z() + static_cast<double>(g.d);
            cplx image = tangent / (den * den);
            frame = transform(frame, g);
            double a2 = 2.0 * static_cast<double>(frame.a);
            double rp = (-static_cast<double>(frame.b) + sqrtD) / a2;
            double rm = (-static_cast<double>(frame.b) - sqrtD) / a2;
            c = 0.5 * (rp + rm);
            r = 0.5 * std::abs(rp - rm);
            dir = image.real() > 0.0 ? 1.0 : -1.0;
            tau = std::asinh(dir * (zr.x - c) / zr.y);
        }
        out.push_back({zr, frame, (static_cast<double>(k) + 0.5) * h});
    }
    return out;
}

GeodesicSegment geodesic_of_form(const QuadForm& f, const PellUnit& unit) {
    std::int64_t D = f.D();
    if (D <= 0 || is_square(D)) throw DomainError("geodesic_of_form: D must be positive and not a square");
    if (unit.D != D) throw DomainError("geodesic_of_form: unit has the wrong discriminant");
    GeodesicSegment g;
    g.form = f;
    double sq = std::sqrt(static_cast<double>(D));
    double a2 = 2.0 * static_cast<double>(f.a);
    g.root_minus = (-static_cast<double>(f.b) - sq) / a2;
    g.root_plus = (-static_cast<double>(f.b) + sq) / a2;
    g.center = 0.5 * (g.root_minus + g.root_plus);
    g.radius = 0.5 * std::abs(g.root_plus - g.root_minus);
    g.length = 2.0 * unit.log_value;
    return g;
}

GeodesicSegment geodesic_of_form(const QuadForm& f) {
    std::int64_t D = f.D();
    if (D <= 0 || is_square(D)) throw DomainError("geodesic_of_form: D must be positive and not a square");
    return geodesic_of_form(f, pell_unit(D));
}

std::vector<std::int64_t> prime_discriminants(std::int64_t D) {
    check_fundamental(D, "prime_discriminants");
    std::vector<std::int64_t> out;
    std::int64_t m = D < 0 ? -D : D;
    std::int64_t rest = D;
    while (m % 2 == 0) m /= 2;
    for (std::int64_t p = 3; p * p <= m; p += 2) {
        if (m % p != 0) continue;
        m /= p;
        std::int64_t ps = (p % 4 == 1) ? p : -p;
        out.push_back(ps);
        rest /= ps;
    }
    if (m > 1) {
        std::int64_t ps = (m % 4 == 1) ? m : -m;
        out.push_back(ps);
        rest /= ps;
    }
    if (rest != 1) {
        if (rest != -4 && rest != 8 && rest != -8) throw Error("prime_discriminants: bad 2-part");
        out.insert(out.begin(), rest);
    }
    return out;
}

std::vector<GenusChar> genus_characters(std::int64_t D) {
    auto primes = prime_discriminants(D);
    std::vector<GenusChar> out;
    const std::size_t w = primes.size();
    if (w == 0) return out;
    // subsets avoiding the last prime discriminant pick one of each unordered pair
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (w - 1)); ++mask) {
        std::int64_t d1 = 1;
        for (std::size_t i = 0; i + 1 < w; ++i)
            if (mask >> i & 1) d1 *= primes[i];
        out.push_back({d1, D / d1});
    }
    return out;
}

int chi_eval(const GenusChar& chi, int class_index, const ClassGroupTable& table) {
    if (class_index < 0 || class_index >= table.h) throw DomainError("chi_eval: class index out of range");
    if (chi.d1 * chi.d2 != table.D) throw DomainError("chi_eval: character does not match the table");
    if (table.D > 0 && !table.narrow) throw DomainError("chi_eval: genus characters live on the narrow group");
    if (chi.trivial()) return 1;
    const QuadForm& f = table.representatives[class_index];
    const std::int64_t absD = table.D < 0 ? -table.D : table.D;
    std::vector<int> found;
    long trials = 0;
    // (x, y) on the ring max(|x|,|y|) = r, one of each pair +-(x, y)
    auto try_point = [&](std::int64_t x, std::int64_t y) {
        if (++trials > 1000000) throw ResourceError("chi_eval: representation search exhausted");
        if (std::gcd(x, y) != 1) return;
        std::int64_t m = f.eval(x, y);
        if (m <= 0 || std::gcd(m, absD) != 1) return;
        int v1 = kronecker_symbol(chi.d1, m);
        int v2 = kronecker_symbol(chi.d2, m);
        if (v1 != v2) throw Error("chi_eval: chi_d1 and chi_d2 disagree on a represented value");
        found.push_back(v1);
    };
    for (std::int64_t r = 1; found.size() < 2; ++r) {
        for (std::int64_t x = -r; x <= r && found.size() < 2; ++x) try_point(x, r);
        for (std::int64_t y = -r + 1; y < r && found.size() < 2; ++y) try_point(r, y);
    }
    if (found[0] != found[1]) throw Error("chi_eval: value depends on the represented integer");
    return found[0];
}

double MinusCFCycle::volume() const { return std::numbers::pi * static_cast<double>(entries.size()); }

namespace {

struct Surd {
    std::int64_t P, Q;  // (P + sqrt D)/Q with Q | D - P^2
};

std::int64_t surd_floor(const Surd& x, std::int64_t s) {
    if (x.Q > 0) return floor_div(x.P + s, x.Q);
    return -floor_div(x.P + s, -x.Q) - 1;
}

Surd reciprocal(const Surd& x, std::int64_t D) {
    i128 num = static_cast<i128>(D) - static_cast<i128>(x.P) * x.P;
    return {-x.P, narrow64(num / x.Q, "minus_cf")};
}

Surd ceiling_step(const Surd& x, std::int64_t n, std::int64_t D) {
    i128 P = static_cast<i128>(n) * x.Q - x.P;
    i128 Q = (P * P - D) / x.Q;
    return {narrow64(P, "minus_cf"), narrow64(Q, "minus_cf")};
}

std::vector<std::int64_t> least_rotation(const std::vector<std::int64_t>& v) {
    std::vector<std::int64_t> best = v, cur = v;
    for (std::size_t i = 1; i < v.size(); ++i) {
        std::rotate(cur.begin(), cur.begin() + 1, cur.end());
        if (cur < best) best = cur;
    }
    return best;
}

// returns the first state that recurs, and the period entries starting there
std::pair<Surd, std::vector<std::int64_t>> ceiling_period(Surd x, std::int64_t D) {
    const std::int64_t s = isqrt(D);
    std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> seen;
    std::vector<std::int64_t> ns;
    std::vector<Surd> states;
    for (std::size_t step = 0; step < 100000; ++step) {
        auto key = std::make_pair(x.P, x.Q);
        auto it = seen.find(key);
        if (it != seen.end()) {
            std::vector<std::int64_t> period(ns.begin() + static_cast<std::ptrdiff_t>(it->second), ns.end());
            return {states[it->second], period};
        }
        seen[key] = step;
        states.push_back(x);
        std::int64_t n = surd_floor(x, s) + 1;
        ns.push_back(n);
        x = ceiling_step(x, n, D);
    }
    throw ResourceError("minus_cf: cycle not found within 1e5 steps");
}

}  // namespace

MinusCFCycle minus_cf_cycle_of(std::int64_t P, std::int64_t Q, std::int64_t D) {
    check_discriminant(D, "minus_cf_cycle_of");
    if (D < 0) throw DomainError("minus_cf_cycle_of: D must be positive");
    if (Q == 0 || (static_cast<i128>(D) - static_cast<i128>(P) * P) % Q != 0)
        throw DomainError("minus_cf_cycle_of: Q must divide D - P^2");
    auto period = ceiling_period({P, Q}, D).second;
    // the state period is already primitive; normalize the rotation
    MinusCFCycle out;
    out.entries = least_rotation(period);
    return out;
}

MinusCFCycle minus_cf_cycle(int class_index, const ClassGroupTable& table, int seed_shift) {
    if (table.D < 0 || !table.narrow) throw DomainError("minus_cf_cycle: needs a narrow table with D > 0");
    if (class_index < 0 || class_index >= table.h) throw DomainError("minus_cf_cycle: class index out of range");
    if (seed_shift < 1) throw DomainError("minus_cf_cycle: seed_shift must be >= 1");
    const std::int64_t D = table.D;
    QuadForm f = positive_leading(table.representatives[class_index]);
    // w0 = (-b + sqrt D)/(2a); the lattice w0 Z + Z belongs to the class of f
    Surd x = ceiling_period({-f.b, 2 * f.a}, D).first;
    // seed w = x/(kx + 1) = 1/(k + 1/x), SL2-equivalent to x
    Surd inv = reciprocal(x, D);
    inv.P += static_cast<std::int64_t>(seed_shift) * inv.Q;
    Surd w = reciprocal(inv, D);
    double sq = std::sqrt(static_cast<double>(D));
    double wv = (static_cast<double>(w.P) + sq) / static_cast<double>(w.Q);
    double ws = (static_cast<double>(w.P) - sq) / static_cast<double>(w.Q);
    if (!(1.0 > wv && wv > ws && ws > 0.0)) throw Error("minus_cf_cycle: seed is not admissible");
    return minus_cf_cycle_of(w.P, w.Q, D);
}

int units_count(std::int64_t D) {
    if (D == -3) return 6;
    if (D == -4) return 4;
    return 2;
}

ClassNumberReport class_number_formula_check(std::int64_t D) {
    check_fundamental(D, "class_number_formula_check");
    if (D > 1000000 || D < -1000000) throw DomainError("class_number_formula_check: |D| > 1e6");
    ClassNumberReport rep;
    rep.D = D;
    rep.h_table = narrow_class_number(D);
    rep.L1 = dirichlet_L1(D);
    double sq = std::sqrt(std::abs(static_cast<double>(D)));
    if (D < 0) {
        rep.w_K = units_count(D);
        rep.h_formula = rep.w_K * sq * rep.L1 / (2.0 * std::numbers::pi);
    } else {
        rep.log_eps_plus = pell_unit(D).log_value;
        rep.h_formula = sq * rep.L1 / rep.log_eps_plus;
    }
    rep.abs_diff = std::abs(rep.h_formula - rep.h_table);
    return rep;
}

}  // namespace modsurf
