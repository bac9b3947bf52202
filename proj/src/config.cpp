#include "psmpm/config.hpp"

#include "psmpm/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace psmpm {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;)
        out.push_back(w);
    return out;
}

std::string format(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Value text could not be read; rethrown as ParseError with the line.
struct BadValue
{
    std::string message;
};

double to_double(const std::string& field, const std::string& text)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw BadValue{field + ": expected a number, got '" + text + "'"};
    return v;
}

long long to_integer(const std::string& field, const std::string& text)
{
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw BadValue{field + ": expected an integer, got '" + text + "'"};
    return v;
}

std::vector<double> to_doubles(const std::string& field, const std::string& text, std::size_t count)
{
    const auto w = words(text);
    if (count > 0 && w.size() != count)
        throw BadValue{field + ": expected " + std::to_string(count) + " numbers"};
    if (w.empty())
        throw BadValue{field + ": expected at least one number"};
    std::vector<double> out;
    for (const auto& s : w)
        out.push_back(to_double(field, s));
    return out;
}

/// Enum parsers report unknown names as ValidationError; re-label with the field.
template <class F>
auto named(const std::string& field, F&& parse)
{
    try {
        return parse();
    } catch (const ValidationError& e) {
        throw ValidationError(field + ": " + e.what());
    }
}

std::string join(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? " " : "") + format(v[i]);
    return s;
}

std::string to_string(LeavePolicy p) { return p == LeavePolicy::Clamp ? "clamp" : "abort"; }

LeavePolicy leave_policy_from_string(const std::string& s)
{
    if (s == "abort")
        return LeavePolicy::Abort;
    if (s == "clamp")
        return LeavePolicy::Clamp;
    throw ValidationError("leave policy must be abort or clamp, got '" + s + "'");
}

struct Field
{
    const char* section;
    const char* key;
    std::function<std::optional<std::string>(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

const std::vector<Field>& fields()
{
    using V = const std::string&;
    static const std::vector<Field> table = {
        {"run", "benchmark", [](const RunConfig& c) { return std::optional(c.benchmark); },
         [](RunConfig&, V) {}},
        {"run", "basis", [](const RunConfig& c) { return std::optional(to_string(c.spec.basis)); },
         [](RunConfig& c, V v) { c.spec.basis = named("run.basis", [&] { return basis_family_from_string(v); }); }},
        {"run", "mass_mode", [](const RunConfig& c) { return std::optional(to_string(c.spec.mass_mode)); },
         [](RunConfig& c, V v) {
             c.spec.mass_mode = named("run.mass_mode", [&] { return mass_mode_from_string(v); });
         }},
        {"run", "dt", [](const RunConfig& c) { return std::optional(format(c.spec.dt)); },
         [](RunConfig& c, V v) { c.spec.dt = to_double("run.dt", v); }},
        {"run", "t_end", [](const RunConfig& c) { return std::optional(format(c.spec.t_end)); },
         [](RunConfig& c, V v) { c.spec.t_end = to_double("run.t_end", v); }},
        {"run", "courant",
         [](const RunConfig& c) { return c.courant ? std::optional(format(*c.courant)) : std::nullopt; },
         [](RunConfig& c, V v) { c.courant = to_double("run.courant", v); }},
        {"run", "output_dir", [](const RunConfig& c) { return std::optional(c.output_dir.string()); },
         [](RunConfig& c, V v) { c.output_dir = v; }},
        {"run", "cadence", [](const RunConfig& c) { return std::optional(std::to_string(c.cadence)); },
         [](RunConfig& c, V v) { c.cadence = static_cast<int>(to_integer("run.cadence", v)); }},
        {"run", "seed", [](const RunConfig& c) { return std::optional(std::to_string(c.spec.seed)); },
         [](RunConfig& c, V v) {
             std::uint64_t s = 0;
             const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
             if (ec != std::errc() || ptr != v.data() + v.size())
                 throw BadValue{"run.seed: expected a non-negative integer, got '" + v + "'"};
             c.spec.seed = s;
         }},
        {"run", "leave_policy", [](const RunConfig& c) { return std::optional(to_string(c.spec.leave_policy)); },
         [](RunConfig& c, V v) {
             c.spec.leave_policy = named("run.leave_policy", [&] { return leave_policy_from_string(v); });
         }},

        {"mesh", "kind", [](const RunConfig& c) { return std::optional(to_string(c.spec.mesh_kind)); },
         [](RunConfig& c, V v) { c.spec.mesh_kind = named("mesh.kind", [&] { return mesh_kind_from_string(v); }); }},
        {"mesh", "h", [](const RunConfig& c) { return std::optional(format(c.spec.h)); },
         [](RunConfig& c, V v) { c.spec.h = to_double("mesh.h", v); }},
        {"mesh", "cells",
         [](const RunConfig& c) {
             return std::optional(std::to_string(c.spec.cells_x) + " " + std::to_string(c.spec.cells_y));
         },
         [](RunConfig& c, V v) {
             const auto w = words(v);
             if (w.size() != 2)
                 throw BadValue{"mesh.cells: expected two integers"};
             c.spec.cells_x = static_cast<int>(to_integer("mesh.cells", w[0]));
             c.spec.cells_y = static_cast<int>(to_integer("mesh.cells", w[1]));
         }},
        {"mesh", "domain",
         [](const RunConfig& c) {
             const Rect& r = c.spec.mesh_domain;
             return std::optional(join({r.lo.x(), r.lo.y(), r.hi.x(), r.hi.y()}));
         },
         [](RunConfig& c, V v) {
             const auto d = to_doubles("mesh.domain", v, 4);
             c.spec.mesh_domain = Rect{Vec2(d[0], d[1]), Vec2(d[2], d[3])};
         }},
        {"mesh", "file",
         [](const RunConfig& c) {
             return c.spec.mesh_file.empty() ? std::nullopt : std::optional(c.spec.mesh_file.string());
         },
         [](RunConfig& c, V v) { c.spec.mesh_file = v; }},

        {"material", "model", [](const RunConfig& c) { return std::optional(to_string(c.spec.material.kind)); },
         [](RunConfig& c, V v) {
             c.spec.material.kind = named("material.model", [&] { return material_kind_from_string(v); });
         }},
        {"material", "E", [](const RunConfig& c) { return std::optional(format(c.spec.material.youngs_modulus)); },
         [](RunConfig& c, V v) { c.spec.material.youngs_modulus = to_double("material.E", v); }},
        {"material", "nu", [](const RunConfig& c) { return std::optional(format(c.spec.material.poisson_ratio)); },
         [](RunConfig& c, V v) { c.spec.material.poisson_ratio = to_double("material.nu", v); }},
        {"material", "density", [](const RunConfig& c) { return std::optional(format(c.spec.density)); },
         [](RunConfig& c, V v) { c.spec.density = to_double("material.density", v); }},

        {"particles", "layout", [](const RunConfig& c) { return std::optional(to_string(c.spec.layout)); },
         [](RunConfig& c, V v) {
             c.spec.layout = named("particles.layout", [&] { return particle_layout_from_string(v); });
         }},
        {"particles", "ppe", [](const RunConfig& c) { return std::optional(std::to_string(c.spec.ppe)); },
         [](RunConfig& c, V v) { c.spec.ppe = static_cast<int>(to_integer("particles.ppe", v)); }},
        {"particles", "nx", [](const RunConfig& c) { return std::optional(std::to_string(c.spec.lattice_x)); },
         [](RunConfig& c, V v) { c.spec.lattice_x = static_cast<int>(to_integer("particles.nx", v)); }},
        {"particles", "ny", [](const RunConfig& c) { return std::optional(std::to_string(c.spec.lattice_y)); },
         [](RunConfig& c, V v) { c.spec.lattice_y = static_cast<int>(to_integer("particles.ny", v)); }},
        {"particles", "region",
         [](const RunConfig& c) {
             const Rect& r = c.spec.body;
             return std::optional(join({r.lo.x(), r.lo.y(), r.hi.x(), r.hi.y()}));
         },
         [](RunConfig& c, V v) {
             const auto d = to_doubles("particles.region", v, 4);
             c.spec.body = Rect{Vec2(d[0], d[1]), Vec2(d[2], d[3])};
         }},

        {"boundary", "left", [](const RunConfig& c) { return std::optional(to_string(c.spec.boundary.left)); },
         [](RunConfig& c, V v) {
             c.spec.boundary.left = named("boundary.left", [&] { return side_condition_from_string(v); });
         }},
        {"boundary", "right", [](const RunConfig& c) { return std::optional(to_string(c.spec.boundary.right)); },
         [](RunConfig& c, V v) {
             c.spec.boundary.right = named("boundary.right", [&] { return side_condition_from_string(v); });
         }},
        {"boundary", "bottom", [](const RunConfig& c) { return std::optional(to_string(c.spec.boundary.bottom)); },
         [](RunConfig& c, V v) {
             c.spec.boundary.bottom = named("boundary.bottom", [&] { return side_condition_from_string(v); });
         }},
        {"boundary", "top", [](const RunConfig& c) { return std::optional(to_string(c.spec.boundary.top)); },
         [](RunConfig& c, V v) {
             c.spec.boundary.top = named("boundary.top", [&] { return side_condition_from_string(v); });
         }},

        {"loading", "body_force", [](const RunConfig& c) { return std::optional(to_string(c.spec.body_force)); },
         [](RunConfig& c, V v) {
             c.spec.body_force = named("loading.body_force", [&] { return body_force_kind_from_string(v); });
         }},
        {"loading", "gravity",
         [](const RunConfig& c) { return std::optional(join({c.spec.gravity.x(), c.spec.gravity.y()})); },
         [](RunConfig& c, V v) {
             const auto g = to_doubles("loading.gravity", v, 2);
             c.spec.gravity = Vec2(g[0], g[1]);
         }},
        {"loading", "initial_velocity",
         [](const RunConfig& c) { return std::optional(to_string(c.spec.initial_velocity)); },
         [](RunConfig& c, V v) {
             c.spec.initial_velocity =
                 named("loading.initial_velocity", [&] { return initial_velocity_from_string(v); });
         }},
        {"loading", "v0", [](const RunConfig& c) { return std::optional(format(c.spec.v0)); },
         [](RunConfig& c, V v) { c.spec.v0 = to_double("loading.v0", v); }},

        {"convergence", "h", [](const RunConfig& c) { return std::optional(join(c.study.h)); },
         [](RunConfig& c, V v) { c.study.h = to_doubles("convergence.h", v, 0); }},
        {"convergence", "ppe",
         [](const RunConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.study.ppe.size(); ++i)
                 s += (i ? " " : "") + std::to_string(c.study.ppe[i]);
             return std::optional(s);
         },
         [](RunConfig& c, V v) {
             c.study.ppe.clear();
             for (const auto& w : words(v))
                 c.study.ppe.push_back(static_cast<int>(to_integer("convergence.ppe", w)));
             if (c.study.ppe.empty())
                 throw BadValue{"convergence.ppe: expected at least one integer"};
         }},
        {"convergence", "courant", [](const RunConfig& c) { return std::optional(format(c.study.courant)); },
         [](RunConfig& c, V v) { c.study.courant = to_double("convergence.courant", v); }},
        {"convergence", "layout", [](const RunConfig& c) { return std::optional(to_string(c.study.layout)); },
         [](RunConfig& c, V v) {
             c.study.layout = named("convergence.layout", [&] { return particle_layout_from_string(v); });
         }},
    };
    return table;
}

const Field* find_field(const std::string& section, const std::string& key)
{
    for (const auto& f : fields())
        if (section == f.section && key == f.key)
            return &f;
    return nullptr;
}

} // namespace

void RunConfig::validate() const
{
    spec.validate();
    if (cadence < 1)
        throw ValidationError("run.cadence must be at least 1");
    if (courant && !(*courant > 0.0))
        throw ValidationError("run.courant must be positive");
    if (output_dir.empty())
        throw ValidationError("run.output_dir must not be empty");
    if (study.h.empty() || study.ppe.empty())
        throw ValidationError("convergence.h and convergence.ppe must not be empty");
    for (double h : study.h)
        if (!(h > 0.0))
            throw ValidationError("convergence.h entries must be positive");
    for (int p : study.ppe)
        if (p < 1)
            throw ValidationError("convergence.ppe entries must be positive");
    if (!(study.courant > 0.0))
        throw ValidationError("convergence.courant must be positive");
}

RunConfig default_config(const std::string& benchmark)
{
    RunConfig c;
    c.benchmark = benchmark;
    if (benchmark == "mms") {
        c.spec = mms_spec(BasisFamily::PowellSabin, 0.125, 64);
        c.courant = 0.2;
    } else if (benchmark == "bar") {
        c.spec = vibrating_bar_spec();
    } else if (benchmark == "soil") {
        c.spec = soil_column_spec(MassMode::PartialLumped);
    } else if (benchmark != "custom") {
        throw ValidationError("run.benchmark must be mms, bar, soil or custom, got '" + benchmark + "'");
    }
    return c;
}

RunConfig parse_config(std::istream& in, std::vector<std::string>* warnings)
{
    struct Entry
    {
        int line;
        const Field* field;
        std::string value;
    };
    std::vector<Entry> entries;
    std::map<std::pair<std::string, std::string>, int> seen;
    std::string section;
    std::string benchmark = "custom";
    std::string raw;
    for (int line = 1; std::getline(in, raw); ++line) {
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty())
            continue;
        if (text.front() == '[') {
            if (text.back() != ']' || text.size() < 3)
                throw ParseError(line, "malformed section header '" + text + "'");
            section = trim(text.substr(1, text.size() - 2));
            bool known = false;
            for (const auto& f : fields())
                known = known || section == f.section;
            if (!known)
                throw ParseError(line, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ParseError(line, "expected 'key = value', got '" + text + "'");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (section.empty())
            throw ParseError(line, "key '" + key + "' appears before any [section]");
        const Field* field = find_field(section, key);
        if (!field)
            throw ParseError(line, "unknown key '" + key + "' in [" + section + "]");
        if (value.empty())
            throw ParseError(line, "missing value for " + section + "." + key);
        if (const auto [it, inserted] = seen.emplace(std::pair(section, key), line); !inserted)
            throw ParseError(line, "duplicate key " + section + "." + key + " (first on line " +
                                       std::to_string(it->second) + ")");
        if (section == "run" && key == "benchmark")
            benchmark = value;
        entries.push_back({line, field, value});
    }

    RunConfig config = default_config(benchmark);
    for (const auto& e : entries) {
        try {
            e.field->set(config, e.value);
        } catch (const BadValue& bad) {
            throw ParseError(e.line, bad.message);
        }
    }
    config.validate();
    if (warnings) {
        const double c = config_courant(config);
        if (c >= 1.0)
            warnings->push_back("Courant number " + format(c) + " is not below 1; the explicit scheme may be unstable");
    }
    return config;
}

RunConfig load_config(const std::filesystem::path& path, std::vector<std::string>* warnings)
{
    std::ifstream in(path);
    if (!in)
        throw IOError("cannot read config " + path.string());
    return parse_config(in, warnings);
}

std::string serialize_config(const RunConfig& config)
{
    std::ostringstream out;
    std::string section;
    for (const auto& f : fields()) {
        const auto value = f.get(config);
        if (!value)
            continue;
        if (section != f.section) {
            if (!section.empty())
                out << '\n';
            section = f.section;
            out << '[' << section << "]\n";
        }
        out << f.key << " = " << *value << '\n';
    }
    return out.str();
}

BenchmarkSpec resolve_spec(const RunConfig& config)
{
    BenchmarkSpec spec = config.spec;
    if (config.courant) {
        const auto basis = build_basis(spec.basis, build_mesh(spec));
        const double dt = *config.courant * characteristic_length(*basis) / spec.wave_speed();
        spec.dt = spec.t_end > 0.0 ? fit_dt_to_period(dt, spec.t_end) : dt;
    }
    return spec;
}

double config_courant(const RunConfig& config)
{
    const BenchmarkSpec spec = resolve_spec(config);
    const auto basis = build_basis(spec.basis, build_mesh(spec));
    return courant_number(spec, characteristic_length(*basis));
}

} // namespace psmpm
