#include "multiauto/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "multiauto/catalogue.hpp"

namespace multiauto {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

Config Config::parse(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ParseError("line " + std::to_string(lineno) + ": empty section name");
            for (const auto& e : c.entries_)
                if (e.section == section && e.key.empty())
                    throw ParseError("duplicate section [" + section + "]");
            c.entries_.push_back({section, "", "", true}); // section marker
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty()) throw ParseError("line " + std::to_string(lineno) + ": key outside any section");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("line " + std::to_string(lineno) + ": empty key");
        if (c.find(section, key)) throw ParseError("duplicate key " + section + "." + key);
        c.entries_.push_back({section, key, value, false});
    }
    return c;
}

std::string Config::print() const {
    std::ostringstream os;
    for (const auto& e : entries_) {
        if (e.key.empty()) os << '[' << e.section << "]\n";
        else os << e.key << " = " << e.value << '\n';
    }
    return os.str();
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
    for (const auto& e : entries_)
        if (e.section == section && e.key == key) return &e;
    return nullptr;
}

bool Config::has_section(const std::string& section) const {
    for (const auto& e : entries_)
        if (e.section == section) return true;
    return false;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (e) e->used = true;
    return e != nullptr;
}

const std::string& Config::get(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw ConfigError("missing key " + section + "." + key);
    e->used = true;
    return e->value;
}

std::string Config::get_or(const std::string& section, const std::string& key, const std::string& def) const {
    const Entry* e = find(section, key);
    if (!e) return def;
    e->used = true;
    return e->value;
}

double Config::num(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty()) return d;
    } catch (...) {
    }
    throw ConfigError(section + "." + key + " is not a number: '" + v + "'");
}

double Config::num_or(const std::string& section, const std::string& key, double def) const {
    return find(section, key) ? num(section, key) : def;
}

long Config::integer_or(const std::string& section, const std::string& key, long def) const {
    if (!find(section, key)) return def;
    double d = num(section, key);
    long v = std::lround(d);
    if (d != static_cast<double>(v)) throw ConfigError(section + "." + key + " must be an integer");
    return v;
}

std::vector<double> Config::nums(const std::string& section, const std::string& key) const {
    std::istringstream in(get(section, key));
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw ConfigError(section + "." + key + " must be a list of numbers");
    return out;
}

std::vector<std::string> Config::unused() const {
    std::vector<std::string> out;
    for (const auto& e : entries_)
        if (!e.used && !e.key.empty()) out.push_back(e.section + "." + e.key);
    return out;
}

// --- builders ------------------------------------------------------------

FunctionExpr function_from(const Config& c, const std::string& section) {
    FunctionExpr f;
    if (c.has(section, "catalogue")) {
        f = catalogue_get(c.get(section, "catalogue")).fn;
    } else {
        int at = static_cast<int>(c.integer_or(section, "arity_time", 1));
        int as = static_cast<int>(c.integer_or(section, "arity_state", 0));
        std::string expr = c.get(section, "expr");
        std::replace(expr.begin(), expr.end(), ';', '\n');
        f = FunctionExpr::parse(at, as, expr);
    }
    if (c.has(section, "sup_bound")) f.sup_bound = c.num(section, "sup_bound");
    if (c.has(section, "lipschitz_in_state")) f.lipschitz_in_state = c.num(section, "lipschitz_in_state");
    return f;
}

SequenceFamily family_from(const Config& c, const std::string& section) {
    std::string kind = c.get(section, "kind");
    int dim = static_cast<int>(c.integer_or(section, "dim", 1));
    if (kind == "near_return") {
        std::vector<double> freqs = c.nums(section, "freqs");
        int count = static_cast<int>(c.integer_or(section, "count", 64));
        double tol = c.num_or(section, "phase_tol", 2e-3);
        double limit = c.num_or(section, "search_limit", 2e8);
        std::vector<double> times = near_return_times(freqs, count, tol, limit);
        std::vector<std::vector<double>> elems;
        for (double t : times) elems.push_back(std::vector<double>(dim, t));
        return SequenceFamily::explicit_list(std::move(elems));
    }
    if (kind == "explicit") {
        std::istringstream in(c.get(section, "elements"));
        std::vector<std::vector<double>> elems;
        std::string part;
        while (std::getline(in, part, ';')) {
            std::istringstream pin(part);
            std::vector<double> v;
            double x;
            while (pin >> x) v.push_back(x);
            if (!v.empty()) elems.push_back(std::move(v));
        }
        if (elems.empty()) throw ConfigError(section + ".elements is empty");
        return SequenceFamily::explicit_list(std::move(elems));
    }
    ScalarSource src;
    std::string sk = c.get_or(section, "source", "arithmetic");
    if (sk == "arithmetic") src.kind = ScalarSource::Kind::Arithmetic;
    else if (sk == "geometric") src.kind = ScalarSource::Kind::Geometric;
    else if (sk == "random") src.kind = ScalarSource::Kind::RandomUniform;
    else throw ConfigError(section + ".source unknown: " + sk);
    src.start = c.num_or(section, "start", 1.0);
    src.step = c.num_or(section, "step", 1.0);
    src.growth = c.num_or(section, "growth", 1.0);
    if (kind == "diagonal") return SequenceFamily::diagonal(dim, src);
    if (kind == "axis") return SequenceFamily::axis(dim, src);
    if (kind == "integer_lattice") return SequenceFamily::integer_lattice(dim, src);
    if (kind == "full") return SequenceFamily::full(dim, src);
    throw ConfigError(section + ".kind unknown: " + kind);
}

KernelSpec kernel_from(const Config& c, const std::string& section) {
    KernelSpec k;
    if (c.has(section, "builtin")) {
        std::string b = c.get(section, "builtin");
        std::vector<double> rates = c.nums(section, "rates");
        if (b == "product_exponential") k = KernelSpec::product_exponential(rates);
        else if (b == "biexponential") k = KernelSpec::biexponential(rates);
        else throw ConfigError(section + ".builtin unknown: " + b);
    } else {
        k.dim = static_cast<int>(c.integer_or(section, "dim", 1));
        k.expr = FunctionExpr::parse(k.dim, 0, c.get(section, "expr"));
        if (c.has(section, "rates")) k.rates = c.nums(section, "rates");
    }
    if (c.has(section, "scale")) {
        double s = c.num(section, "scale");
        std::vector<ExprPtr> comps = {e_mul(e_const(s), k.expr.components()[0])};
        k.expr = FunctionExpr(k.dim, 0, std::move(comps));
        k.decay_scale = std::abs(s) * k.decay_scale;
    }
    std::string decay = c.get_or(section, "decay", "exponential");
    if (decay == "exponential") k.decay = KernelSpec::Decay::Exponential;
    else if (decay == "integrable") k.decay = KernelSpec::Decay::IntegrableDeclared;
    else if (decay == "none") k.decay = KernelSpec::Decay::None;
    else throw ConfigError(section + ".decay unknown: " + decay);
    if (c.has(section, "singular")) k.singular = c.get(section, "singular") == "true";
    return k;
}

GridWindow window_from(const Config& c, const std::string& section) {
    std::vector<double> lo = c.nums(section, "lo"), hi = c.nums(section, "hi");
    int ppa = static_cast<int>(c.integer_or(section, "points_per_axis", 33));
    return GridWindow(std::move(lo), std::move(hi), ppa);
}

DomainDescriptor domain_from(const Config& c, const std::string& section) {
    std::string kind = c.get(section, "kind");
    int dim = static_cast<int>(c.integer_or(section, "dim", 2));
    if (kind == "full") return DomainDescriptor::full_space(dim);
    if (kind == "causal") return DomainDescriptor::causal_cone(dim);
    if (kind == "orthant") {
        std::vector<double> corner = c.nums(section, "corner");
        std::vector<int> signs(corner.size(), 1);
        if (c.has(section, "signs")) {
            std::vector<double> s = c.nums(section, "signs");
            signs.assign(s.size(), 1);
            for (std::size_t i = 0; i < s.size(); ++i) signs[i] = s[i] < 0 ? -1 : 1;
        }
        return DomainDescriptor::orthant(std::move(corner), std::move(signs));
    }
    if (kind == "degenerate")
        return DomainDescriptor::custom(dim, [](std::span<const double>) { return false; }, false);
    throw ConfigError(section + ".kind unknown: " + kind);
}

QuadratureScheme quad_from(const Config& c, const std::string& section) {
    QuadratureScheme q;
    if (!c.has_section(section)) return q;
    q.panels_per_unit = static_cast<int>(c.integer_or(section, "panels_per_unit", 1));
    q.eps_tail = c.num_or(section, "eps_tail", 1e-8);
    q.fallback_radius = c.num_or(section, "fallback_radius", 40.0);
    q.picard_spacing = c.num_or(section, "picard_spacing", 0.025);
    return q;
}

LimitProbe probe_from(const Config& c, const std::string& probe_section, const std::string& family_section) {
    LimitProbe p;
    p.family = family_from(c, family_section);
    if (c.has(probe_section, "lo")) p.window = window_from(c, probe_section);
    p.depth = static_cast<int>(c.integer_or(probe_section, "depth", 64));
    p.tol_limit = c.num_or(probe_section, "tol_limit", 1e-2);
    p.tol_subseq = c.num_or(probe_section, "tol_subseq", 3e-2);
    p.seed = static_cast<std::uint64_t>(c.integer_or(probe_section, "seed", 0));
    if (p.seed == 0) p.seed = 0x243F6A8885A308D3ULL;
    if (c.has(probe_section, "state_ball_radius")) {
        std::vector<double> center = c.nums(probe_section, "state_ball_center");
        p.state_set = BoundedSetSpec::ball(center, c.num(probe_section, "state_ball_radius"),
                                           static_cast<int>(c.integer_or(probe_section, "state_samples", 4)));
    }
    p.validate();
    return p;
}

MemorySystem memory_system_from(const Config& c, const std::string& section) {
    MemorySystem sys;
    sys.dim = static_cast<int>(c.integer_or(section, "dim", 1));
    std::string a = c.get(section, "A");
    if (a.rfind("laplacian1d", 0) == 0) {
        std::size_t l = a.find('('), r = a.find(')');
        if (l == std::string::npos || r == std::string::npos) throw ConfigError("bad laplacian1d spec: " + a);
        std::istringstream in(a.substr(l + 1, r - l - 1));
        int d = 0;
        double h = 0;
        char comma = 0;
        if (!(in >> d >> comma >> h) || comma != ',') throw ConfigError("bad laplacian1d spec: " + a);
        MemorySystem lap = MemorySystem::laplacian1d(d, h);
        sys.dim = d;
        sys.A = lap.A;
    } else {
        sys.A = Eigen::MatrixXd::Zero(sys.dim, sys.dim);
        std::istringstream rows(a);
        std::string row;
        int i = 0;
        while (std::getline(rows, row, ';')) {
            std::istringstream rin(row);
            for (int j = 0; j < sys.dim; ++j)
                if (!(rin >> sys.A(i, j))) throw ConfigError("matrix row too short in " + section + ".A");
            ++i;
        }
        if (i != sys.dim) throw ConfigError(section + ".A must have dim rows separated by ';'");
    }
    if (c.has(section, "profile")) {
        sys.profile = FunctionExpr::parse(1, 0, c.get(section, "profile"));
        sys.has_memory = true;
    }
    if (c.has(section, "forcing")) {
        sys.f = FunctionExpr::parse(1, sys.dim, c.get(section, "forcing"));
        sys.has_forcing = true;
        sys.lip_f = c.num(section, "lip_f");
    }
    if (c.has(section, "g_scale")) {
        double scale = c.num(section, "g_scale");
        double clip = c.num_or(section, "g_clip", 1.0);
        int d = sys.dim;
        sys.g_nonlocal = [scale, clip, d](const std::vector<Eigen::VectorXd>& traj) {
            Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
            for (const auto& v : traj) mean += v;
            if (!traj.empty()) mean /= static_cast<double>(traj.size());
            for (int i = 0; i < d; ++i) mean(i) = std::clamp(mean(i), -clip, clip);
            return Eigen::VectorXd(scale * mean);
        };
        sys.lip_g = std::abs(scale);
    }
    if (c.has(section, "u0")) {
        std::vector<double> u0 = c.nums(section, "u0");
        if (static_cast<int>(u0.size()) != sys.dim) throw ConfigError(section + ".u0 has wrong length");
        sys.u0 = Eigen::Map<Eigen::VectorXd>(u0.data(), sys.dim);
    } else {
        sys.u0 = Eigen::VectorXd::Zero(sys.dim);
    }
    sys.validate();
    return sys;
}

} // namespace multiauto
