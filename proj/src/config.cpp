#include "sbmlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sbmlab/stats.hpp"

namespace sbm {

const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Duality: return "duality";
        case ExperimentKind::SelfDuality: return "self-duality";
        case ExperimentKind::MpCheck: return "mp-check";
        case ExperimentKind::HeatSuite: return "heat-suite";
        case ExperimentKind::PamDecay: return "pam-decay";
        case ExperimentKind::GlobalExtinction: return "global-extinction";
        case ExperimentKind::LocalExtinction: return "local-extinction";
        case ExperimentKind::UniquenessProxy: return "uniqueness-proxy";
    }
    return "unknown";
}

std::optional<ExperimentKind> kind_from_name(const std::string& name) {
    static const std::map<std::string, ExperimentKind> kinds = {
        {"duality", ExperimentKind::Duality},
        {"self-duality", ExperimentKind::SelfDuality},
        {"mp-check", ExperimentKind::MpCheck},
        {"heat-suite", ExperimentKind::HeatSuite},
        {"pam-decay", ExperimentKind::PamDecay},
        {"global-extinction", ExperimentKind::GlobalExtinction},
        {"local-extinction", ExperimentKind::LocalExtinction},
        {"uniqueness-proxy", ExperimentKind::UniquenessProxy},
    };
    const auto it = kinds.find(name);
    if (it == kinds.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> all_kind_names() {
    return {"duality",   "self-duality",      "mp-check",         "heat-suite",
            "pam-decay", "global-extinction", "local-extinction", "uniqueness-proxy"};
}

long ExperimentConfig::effective_replicas() const {
    if (replicas > 0) return replicas;
    switch (kind) {
        case ExperimentKind::Duality:
        case ExperimentKind::SelfDuality:
        case ExperimentKind::MpCheck: return 10000;
        case ExperimentKind::UniquenessProxy: return 5000;
        case ExperimentKind::PamDecay:
        case ExperimentKind::GlobalExtinction:
        case ExperimentKind::LocalExtinction: return 2000;
        case ExperimentKind::HeatSuite: return 1;
    }
    return 1000;
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream os;
    os.precision(17);
    const char* clip_name = clip == NegativityPolicy::ClipState
                                ? "on"
                                : (clip == NegativityPolicy::FullTruncation ? "full-truncation" : "off");
    os << "kind=" << kind_name(kind) << "\nL=" << half_width << "\nN=" << points
       << "\nlambda=" << lambda << "\nclip=" << clip_name << "\nrho=" << rho
       << "\nu1=" << u1.describe() << "\nu2=" << u2.describe() << "\nv0=" << v0.describe()
       << "\nf=" << f.describe() << "\nphi=" << phi.describe() << "\npsi=" << psi.describe()
       << "\ng=" << g.describe() << "\nT=" << horizon << "\ncheckpoints=" << checkpoints
       << "\nreplicas=" << effective_replicas() << "\nbase_seed=" << base_seed
       << "\nz_max=" << z_max << "\nepsilon_frac=" << epsilon_frac
       << "\nfinal_fraction_max=" << final_fraction_max << "\nmedian_final_tol=" << median_final_tol
       << "\nsqrt_mass_decay_factor=" << sqrt_mass_decay_factor
       << "\nl1_tolerance=" << l1_tolerance << "\nflat_tolerance=" << flat_tolerance
       << "\nks_min_p=" << ks_min_p << "\nks_refinement_allowance=" << ks_refinement_allowance
       << "\ndump_fields=" << (dump_fields ? 1 : 0)
       << "\nfault_noise_scale=" << fault_noise_scale
       << "\nfault_drift_scale=" << fault_drift_scale
       << "\nfault_rho=" << (fault_rho ? std::to_string(*fault_rho) : std::string("none")) << "\n";
    return os.str();
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(canonical_text())); }

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

bool parse_double(const std::string& s, double& out) {
    try {
        size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(out);
    } catch (...) {
        return false;
    }
}

bool parse_long(const std::string& s, long long& out) {
    try {
        size_t pos = 0;
        out = std::stoll(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

InitialData parse_term(const std::string& text) {
    const auto toks = split_ws(text);
    if (toks.empty()) throw std::invalid_argument("empty descriptor term");
    const std::string& name = toks[0];

    std::map<std::string, double> kv;
    std::vector<double> positional;
    for (size_t i = 1; i < toks.size(); ++i) {
        const auto eq = toks[i].find('=');
        double val = 0.0;
        if (eq == std::string::npos) {
            if (!parse_double(toks[i], val))
                throw std::invalid_argument("descriptor term '" + name + "': bad number '" + toks[i] + "'");
            positional.push_back(val);
        } else {
            if (!parse_double(toks[i].substr(eq + 1), val))
                throw std::invalid_argument("descriptor term '" + name + "': bad value in '" + toks[i] + "'");
            kv[toks[i].substr(0, eq)] = val;
        }
    }
    auto take = [&](const std::string& key) -> std::optional<double> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        const double v = it->second;
        kv.erase(it);
        return v;
    };
    auto reject_leftovers = [&]() {
        if (!kv.empty())
            throw std::invalid_argument("descriptor term '" + name + "': unknown parameter '" +
                                        kv.begin()->first + "'");
    };

    if (name == "zero") {
        reject_leftovers();
        if (!positional.empty()) throw std::invalid_argument("zero takes no parameters");
        return InitialData{};
    }
    if (name == "constant") {
        const auto v = take("value");
        reject_leftovers();
        if (v && !positional.empty())
            throw std::invalid_argument("constant: give one value");
        if (!v && positional.size() != 1)
            throw std::invalid_argument("constant: give one value");
        return constant_data(v ? *v : positional[0]);
    }
    if (name == "gaussian_bump") {
        const auto mass = take("mass");
        const auto amplitude = take("amplitude");
        const double center = take("center").value_or(0.0);
        const double width = take("width").value_or(0.5);
        reject_leftovers();
        if (!positional.empty()) throw std::invalid_argument("gaussian_bump: named parameters only");
        if (mass && amplitude)
            throw std::invalid_argument("gaussian_bump: give mass or amplitude, not both");
        if (!mass && !amplitude)
            throw std::invalid_argument("gaussian_bump: mass or amplitude required");
        return mass ? gaussian_bump_with_mass(*mass, center, width)
                    : gaussian_bump(*amplitude, center, width);
    }
    if (name == "smooth_cutoff_bump") {
        const double amplitude = take("amplitude").value_or(1.0);
        const auto n = take("n");
        reject_leftovers();
        if (!positional.empty())
            throw std::invalid_argument("smooth_cutoff_bump: named parameters only");
        if (!n) throw std::invalid_argument("smooth_cutoff_bump: n required");
        return smooth_cutoff_bump(amplitude, *n);
    }
    if (name == "sine") {
        const double amplitude = take("amplitude").value_or(1.0);
        const auto k = take("k");
        reject_leftovers();
        if (!positional.empty()) throw std::invalid_argument("sine: named parameters only");
        if (!k || *k < 1.0 || *k != std::floor(*k))
            throw std::invalid_argument("sine: integer wavenumber k >= 1 required");
        return sine_data(amplitude, static_cast<int>(*k));
    }
    if (name == "table") {
        reject_leftovers();
        if (positional.empty()) throw std::invalid_argument("table: values required");
        return table_data(positional);
    }
    throw std::invalid_argument("unknown descriptor kind '" + name + "'");
}

}  // namespace

InitialData parse_descriptor(const std::string& text) {
    InitialData out;
    std::string term;
    std::istringstream is(text);
    bool any = false;
    while (std::getline(is, term, '+')) {
        term = trim(term);
        if (term.empty()) throw std::invalid_argument("empty descriptor term");
        out += parse_term(term);
        any = true;
    }
    if (!any) throw std::invalid_argument("empty descriptor");
    return out;
}

namespace {

struct RawEntry {
    std::string value;
    int line = 0;
    bool used = false;
};

using RawSections = std::map<std::string, std::map<std::string, RawEntry>>;

const std::map<std::string, std::vector<std::string>>& known_keys() {
    static const std::map<std::string, std::vector<std::string>> keys = {
        {"grid", {"L", "N"}},
        {"scheme", {"lambda", "clip"}},
        {"model", {"kind", "rho"}},
        {"initial", {"u1", "u2", "v0", "f"}},
        {"test_functions", {"phi", "psi", "g"}},
        {"run", {"kind", "T", "checkpoints", "replicas", "base_seed", "workers"}},
        {"thresholds",
         {"z_max", "epsilon_frac", "final_fraction_max", "median_final_tol",
          "sqrt_mass_decay_factor", "l1_tolerance", "flat_tolerance", "ks_min_p",
          "ks_refinement_allowance"}},
        {"output", {"dump_fields", "plot"}},
        {"fault", {"noise_scale", "drift_scale", "rho"}},
    };
    return keys;
}

}  // namespace

ParseResult parse_config(const std::string& text) {
    ParseResult result;
    auto& errors = result.errors;
    RawSections sections;

    std::istringstream is(text);
    std::string raw_line;
    std::string section;
    int line_no = 0;
    while (std::getline(is, raw_line)) {
        ++line_no;
        const auto hash_pos = raw_line.find('#');
        std::string line = trim(hash_pos == std::string::npos ? raw_line : raw_line.substr(0, hash_pos));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back({line_no, "malformed section header"});
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (known_keys().find(section) == known_keys().end())
                errors.push_back({line_no, "unknown section [" + section + "]"});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back({line_no, "expected key = value"});
            continue;
        }
        if (section.empty()) {
            errors.push_back({line_no, "key outside any [section]"});
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto ks = known_keys().find(section);
        if (ks != known_keys().end() &&
            std::find(ks->second.begin(), ks->second.end(), key) == ks->second.end()) {
            errors.push_back({line_no, "unknown key '" + key + "' in section [" + section + "]"});
            continue;
        }
        if (sections[section].count(key))
            errors.push_back({line_no, "duplicate key '" + key + "' in section [" + section + "]"});
        sections[section][key] = {value, line_no, false};
    }

    ExperimentConfig cfg;

    auto entry = [&](const std::string& sec, const std::string& key) -> RawEntry* {
        auto s = sections.find(sec);
        if (s == sections.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        k->second.used = true;
        return &k->second;
    };
    // Return the entry only when its value parsed; a malformed value records
    // an error and reads as absent (defaults stay in place).
    auto get_double = [&](const std::string& sec, const std::string& key, double& out) -> const RawEntry* {
        const RawEntry* e = entry(sec, key);
        if (!e) return nullptr;
        if (!parse_double(e->value, out)) {
            errors.push_back({e->line, "[" + sec + "] " + key + ": not a number: '" + e->value + "'"});
            return nullptr;
        }
        return e;
    };
    auto get_long = [&](const std::string& sec, const std::string& key, long long& out) -> const RawEntry* {
        const RawEntry* e = entry(sec, key);
        if (!e) return nullptr;
        if (!parse_long(e->value, out)) {
            errors.push_back({e->line, "[" + sec + "] " + key + ": not an integer: '" + e->value + "'"});
            return nullptr;
        }
        return e;
    };
    auto get_flag = [&](const std::string& sec, const std::string& key, bool& out) {
        const RawEntry* e = entry(sec, key);
        if (!e) return;
        if (e->value == "on" || e->value == "true" || e->value == "1")
            out = true;
        else if (e->value == "off" || e->value == "false" || e->value == "0")
            out = false;
        else
            errors.push_back({e->line, "[" + sec + "] " + key + ": expected on/off"});
    };
    auto get_descriptor = [&](const std::string& sec, const std::string& key, InitialData& out) -> const RawEntry* {
        const RawEntry* e = entry(sec, key);
        if (!e) return nullptr;
        try {
            out = parse_descriptor(e->value);
        } catch (const std::exception& ex) {
            errors.push_back({e->line, "[" + sec + "] " + key + ": " + ex.what()});
        }
        return e;
    };

    // run.kind first: it decides which keys are required.
    const RawEntry* kind_entry = entry("run", "kind");
    if (!kind_entry) {
        errors.push_back({0, "[run] kind is required"});
        return result;
    }
    const auto kind = kind_from_name(kind_entry->value);
    if (!kind) {
        errors.push_back({kind_entry->line, "[run] kind: unknown experiment kind '" + kind_entry->value +
                                                "' (see `list`)"});
        return result;
    }
    cfg.kind = *kind;

    double dval;
    long long ival;
    if (get_double("grid", "L", dval)) cfg.half_width = dval;
    if (const auto* e = get_long("grid", "N", ival)) {
        cfg.points = static_cast<int>(ival);
        if (cfg.points < 4 || cfg.points % 2 != 0)
            errors.push_back({e->line, "[grid] N: must be even and >= 4"});
    }
    if (!(cfg.half_width > 0.0)) {
        const RawEntry* e = entry("grid", "L");
        errors.push_back({e ? e->line : 0, "[grid] L: must be positive"});
    }

    if (const auto* e = get_double("scheme", "lambda", dval)) {
        cfg.lambda = dval;
        if (!(cfg.lambda > 0.0) || cfg.lambda > 1.0)
            errors.push_back({e->line, "[scheme] lambda: stability bound lambda <= 1 violated"});
    }
    if (const RawEntry* e = entry("scheme", "clip")) {
        if (e->value == "on")
            cfg.clip = NegativityPolicy::ClipState;
        else if (e->value == "off")
            cfg.clip = NegativityPolicy::Off;
        else if (e->value == "full-truncation")
            cfg.clip = NegativityPolicy::FullTruncation;
        else
            errors.push_back({e->line, "[scheme] clip: expected on, off or full-truncation"});
    }

    if (const RawEntry* e = entry("model", "kind")) {
        const std::string want = (cfg.kind == ExperimentKind::HeatSuite) ? "heat"
                                 : (cfg.kind == ExperimentKind::SelfDuality ||
                                    cfg.kind == ExperimentKind::PamDecay)
                                     ? "pam"
                                     : "sbm";
        if (e->value != want)
            errors.push_back({e->line, "[model] kind: experiment '" + std::string(kind_name(cfg.kind)) +
                                           "' uses model '" + want + "'"});
    }
    if (const auto* e = get_double("model", "rho", dval)) {
        cfg.rho = dval;
        if (std::fabs(cfg.rho) > 1.0)
            errors.push_back({e->line, "[model] rho: must lie in [-1, 1]"});
        else if (cfg.rho != 1.0 &&
                 (cfg.kind == ExperimentKind::Duality || cfg.kind == ExperimentKind::MpCheck ||
                  cfg.kind == ExperimentKind::UniquenessProxy ||
                  cfg.kind == ExperimentKind::GlobalExtinction ||
                  cfg.kind == ExperimentKind::LocalExtinction))
            errors.push_back({e->line, "[model] rho: this experiment verifies the rho = 1 system"});
    }

    get_descriptor("initial", "u1", cfg.u1);
    get_descriptor("initial", "u2", cfg.u2);
    get_descriptor("initial", "v0", cfg.v0);
    get_descriptor("initial", "f", cfg.f);
    get_descriptor("test_functions", "phi", cfg.phi);
    get_descriptor("test_functions", "psi", cfg.psi);
    get_descriptor("test_functions", "g", cfg.g);

    const bool t_present = sections.count("run") && sections["run"].count("T");
    const RawEntry* t_entry = get_double("run", "T", dval);
    if (t_entry) cfg.horizon = dval;
    if (const auto* e = get_long("run", "checkpoints", ival)) {
        cfg.checkpoints = static_cast<int>(ival);
        if (cfg.checkpoints < 1) errors.push_back({e->line, "[run] checkpoints: must be >= 1"});
    }
    if (const auto* e = get_long("run", "replicas", ival)) {
        cfg.replicas = ival;
        if (cfg.replicas < 2) errors.push_back({e->line, "[run] replicas: must be >= 2"});
    }
    if (get_long("run", "base_seed", ival)) cfg.base_seed = static_cast<std::uint64_t>(ival);
    if (const auto* e = get_long("run", "workers", ival)) {
        cfg.workers = static_cast<int>(ival);
        if (cfg.workers < 1) errors.push_back({e->line, "[run] workers: must be >= 1"});
    }

    get_double("thresholds", "z_max", cfg.z_max);
    get_double("thresholds", "epsilon_frac", cfg.epsilon_frac);
    get_double("thresholds", "final_fraction_max", cfg.final_fraction_max);
    get_double("thresholds", "median_final_tol", cfg.median_final_tol);
    get_double("thresholds", "sqrt_mass_decay_factor", cfg.sqrt_mass_decay_factor);
    get_double("thresholds", "l1_tolerance", cfg.l1_tolerance);
    get_double("thresholds", "flat_tolerance", cfg.flat_tolerance);
    get_double("thresholds", "ks_min_p", cfg.ks_min_p);
    get_double("thresholds", "ks_refinement_allowance", cfg.ks_refinement_allowance);

    get_flag("output", "dump_fields", cfg.dump_fields);
    get_flag("output", "plot", cfg.plot);

    get_double("fault", "noise_scale", cfg.fault_noise_scale);
    get_double("fault", "drift_scale", cfg.fault_drift_scale);
    if (get_double("fault", "rho", dval)) cfg.fault_rho = dval;

    // Horizon checks.
    if (!t_present) {
        errors.push_back({0, "[run] T is required"});
    } else if (!t_entry) {
        // value present but malformed; already reported
    } else if (cfg.kind == ExperimentKind::Duality || cfg.kind == ExperimentKind::SelfDuality) {
        if (cfg.horizon < 0.0) errors.push_back({t_entry->line, "[run] T: must be >= 0"});
    } else if (!(cfg.horizon > 0.0)) {
        errors.push_back({t_entry->line, "[run] T: must be positive"});
    }
    // Wrap-around control: experiments that compare against free-space heat
    // flow must satisfy the torus-horizon rule. The longtime extinction and
    // decay experiments intentionally probe the torus asymptotics and are
    // exempt.
    const bool horizon_rule = cfg.kind == ExperimentKind::Duality ||
                              cfg.kind == ExperimentKind::SelfDuality ||
                              cfg.kind == ExperimentKind::MpCheck ||
                              cfg.kind == ExperimentKind::UniquenessProxy ||
                              cfg.kind == ExperimentKind::HeatSuite;
    if (t_entry && horizon_rule && cfg.horizon > 0.0 &&
        std::sqrt(cfg.horizon) > cfg.half_width / 4.0)
        errors.push_back({t_entry->line, "[run] T: torus-horizon rule sqrt(T) <= L/4 violated"});

    // Kind-specific data requirements.
    auto require = [&](const InitialData& d, const std::string& sec, const std::string& key) {
        if (d.empty() && !entry(sec, key))
            errors.push_back({0, "[" + sec + "] " + key + " is required for kind '" +
                                     kind_name(cfg.kind) + "'"});
    };
    switch (cfg.kind) {
        case ExperimentKind::Duality:
        case ExperimentKind::MpCheck:
        case ExperimentKind::UniquenessProxy:
            require(cfg.u1, "initial", "u1");
            require(cfg.u2, "initial", "u2");
            require(cfg.phi, "test_functions", "phi");
            break;
        case ExperimentKind::SelfDuality:
            require(cfg.phi, "test_functions", "phi");
            require(cfg.psi, "test_functions", "psi");
            break;
        case ExperimentKind::HeatSuite:
            require(cfg.f, "initial", "f");
            break;
        case ExperimentKind::PamDecay:
            require(cfg.v0, "initial", "v0");
            require(cfg.g, "test_functions", "g");
            break;
        case ExperimentKind::GlobalExtinction:
            require(cfg.phi, "test_functions", "phi");
            require(cfg.psi, "test_functions", "psi");
            break;
        case ExperimentKind::LocalExtinction:
            require(cfg.phi, "test_functions", "phi");
            require(cfg.psi, "test_functions", "psi");
            require(cfg.g, "test_functions", "g");
            break;
    }

    // Descriptors must sample nonnegative (heat-suite f may be signed) and
    // tables must fit the grid; report at parse time with the key's line.
    if (errors.empty()) {
        const GridSpec grid = make_grid(cfg.half_width, cfg.points);
        auto check_nonneg = [&](const InitialData& d, const std::string& sec, const std::string& key) {
            if (d.empty()) return;
            const RawEntry* e = entry(sec, key);
            try {
                if (sample(grid, d).min_value() < 0.0)
                    errors.push_back({e ? e->line : 0, "[" + sec + "] " + key + ": must be nonnegative"});
            } catch (const std::exception& ex) {
                errors.push_back({e ? e->line : 0, "[" + sec + "] " + key + ": " + ex.what()});
            }
        };
        check_nonneg(cfg.u1, "initial", "u1");
        check_nonneg(cfg.u2, "initial", "u2");
        check_nonneg(cfg.v0, "initial", "v0");
        check_nonneg(cfg.phi, "test_functions", "phi");
        check_nonneg(cfg.psi, "test_functions", "psi");
        check_nonneg(cfg.g, "test_functions", "g");
        if (!cfg.f.empty()) {
            try {
                sample(grid, cfg.f);
            } catch (const std::exception& ex) {
                const RawEntry* e = entry("initial", "f");
                errors.push_back({e ? e->line : 0, std::string("[initial] f: ") + ex.what()});
            }
        }
    }

    if (cfg.kind == ExperimentKind::GlobalExtinction &&
        (!cfg.phi.integrable_like() || !cfg.psi.integrable_like()))
        errors.push_back({0, "global-extinction requires integrable-type initial descriptors"});
    if (cfg.kind == ExperimentKind::LocalExtinction && !cfg.g.integrable_like())
        errors.push_back({0, "local-extinction requires an integrable-type test function g"});

    if (errors.empty()) result.config = std::move(cfg);
    std::sort(errors.begin(), errors.end(),
              [](const ParseError& a, const ParseError& b) { return a.line < b.line; });
    return result;
}

}  // namespace sbm
