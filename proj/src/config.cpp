#include "ftcl/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ftcl/csv.hpp"

namespace ftcl {

ConfigError::ConfigError(int line, std::string key, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? std::string() : "key '" + key + "': ") + message),
      line_(line),
      key_(std::move(key)) {}

namespace {

const std::vector<std::string> kSections = {"system", "basis", "run",   "domain", "filter", "excitation",
                                            "noise",  "gd",    "cl",    "ftcl1",  "ftcl2",  "bounds"};

struct Entry {
  int line = 0;
  std::string section;
  std::string key;
  std::string value;

  std::string full() const { return section + "." + key; }
};

std::string trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double to_double(const Entry& e, const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(e.line, e.full(), "expected a number, got '" + t + "'");
  }
  return v;
}

template <typename Int>
Int to_int(const Entry& e) {
  const std::string t = trim(e.value);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(e.line, e.full(), "expected an integer, got '" + t + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_list(const Entry& e) {
  std::vector<double> out;
  for (const auto& item : split_list(e.value)) out.push_back(to_double(e, item));
  return out;
}

bool to_bool(const Entry& e) {
  const std::string t = lower(trim(e.value));
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(e.line, e.full(), "expected true or false, got '" + t + "'");
}

std::vector<Entry> parse_entries(std::string_view text) {
  std::vector<Entry> out;
  std::string section;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "", "malformed section header '" + line + "'");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
        throw ConfigError(line_no, section, "unknown section");
      }
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "", "expected key = value, got '" + line + "'");
    if (section.empty()) throw ConfigError(line_no, trim(line.substr(0, eq)), "key outside of any section");
    out.push_back({line_no, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
  }
  return out;
}

Entry parse_override(const std::string& text) {
  const size_t eq = text.find('=');
  const std::string lhs = eq == std::string::npos ? text : trim(text.substr(0, eq));
  const size_t dot = lhs.find('.');
  if (eq == std::string::npos || dot == std::string::npos) {
    throw ConfigError(0, lhs, "override must look like section.key=value");
  }
  Entry e{0, lhs.substr(0, dot), lhs.substr(dot + 1), trim(text.substr(eq + 1))};
  if (std::find(kSections.begin(), kSections.end(), e.section) == kSections.end()) {
    throw ConfigError(0, e.full(), "unknown section '" + e.section + "'");
  }
  return e;
}

struct Builder {
  ExperimentConfig cfg;
  std::map<Method, MethodConfig> table;
  std::vector<Method> order;

  explicit Builder(const ExperimentConfig& base) : cfg(base) {
    for (Method m : {Method::GD, Method::CL, Method::FTCL1, Method::FTCL2}) {
      MethodConfig mc;
      mc.method = m;
      table[m] = mc;
    }
    for (const auto& mc : base.methods) {
      table[mc.method] = mc;
      order.push_back(mc.method);
    }
  }

  void gamma(Method m, const Entry& e) {
    if (lower(e.value) == "auto") {
      if (m == Method::GD) throw ConfigError(e.line, e.full(), "gd has no automatic rate");
      table[m].auto_gamma = true;
    } else {
      table[m].auto_gamma = false;
      table[m].hp.gamma = to_double(e, e.value);
    }
  }

  void apply(const Entry& e) {
    using Setter = std::function<void(const Entry&)>;
    const std::map<std::string, Setter> setters = {
        {"system.name", [&](const Entry& x) { cfg.system = x.value; }},
        {"basis.kind", [&](const Entry& x) { cfg.basis.kind = x.value; }},
        {"basis.centers", [&](const Entry& x) { cfg.basis.centers = to_int<int>(x); }},
        {"basis.lo", [&](const Entry& x) { cfg.basis.lo = to_double(x, x.value); }},
        {"basis.hi", [&](const Entry& x) { cfg.basis.hi = to_double(x, x.value); }},
        {"basis.spread", [&](const Entry& x) { cfg.basis.spread = to_double(x, x.value); }},
        {"run.k0", [&](const Entry& x) { cfg.k0 = to_int<long>(x); }},
        {"run.kf", [&](const Entry& x) { cfg.kf = to_int<long>(x); }},
        {"run.x0", [&](const Entry& x) { cfg.x0 = to_list(x); }},
        {"run.P", [&](const Entry& x) { cfg.P = to_int<int>(x); }},
        {"run.eta", [&](const Entry& x) { cfg.eta = to_double(x, x.value); }},
        {"run.seed", [&](const Entry& x) { cfg.seed = to_int<std::uint64_t>(x); }},
        {"run.out", [&](const Entry& x) { cfg.out_dir = x.value; }},
        {"run.methods",
         [&](const Entry& x) {
           order.clear();
           for (const auto& name : split_list(x.value)) {
             try {
               order.push_back(parse_method(name));
             } catch (const std::exception&) {
               throw ConfigError(x.line, x.full(), "unknown method '" + name + "'");
             }
           }
         }},
        {"domain.lo", [&](const Entry& x) { cfg.domain_lo = to_list(x); }},
        {"domain.hi", [&](const Entry& x) { cfg.domain_hi = to_list(x); }},
        {"domain.intervals", [&](const Entry& x) { cfg.intervals = to_int<int>(x); }},
        {"filter.c", [&](const Entry& x) { cfg.filter.c = to_double(x, x.value); }},
        {"excitation.amplitude", [&](const Entry& x) { cfg.excitation.amplitude = to_double(x, x.value); }},
        {"excitation.decay", [&](const Entry& x) { cfg.excitation.decay = to_double(x, x.value); }},
        {"excitation.frequencies", [&](const Entry& x) { cfg.excitation.frequencies = to_list(x); }},
        {"excitation.random_phase", [&](const Entry& x) { cfg.excitation.random_phase = to_bool(x); }},
        {"noise.b_eps_bar",
         [&](const Entry& x) {
           const std::string v = lower(x.value);
           if (v == "auto") {
             cfg.noise = {NoiseMode::Auto, 0.0};
           } else if (v == "unknown") {
             cfg.noise = {NoiseMode::Unknown, 0.0};
           } else {
             cfg.noise = {NoiseMode::Known, to_double(x, x.value)};
           }
         }},
        {"gd.gamma", [&](const Entry& x) { gamma(Method::GD, x); }},
        {"cl.gamma", [&](const Entry& x) { gamma(Method::CL, x); }},
        {"cl.sigma_G", [&](const Entry& x) { table[Method::CL].hp.xi_G = to_double(x, x.value); }},
        {"cl.sigma_C", [&](const Entry& x) { table[Method::CL].hp.xi_C = to_double(x, x.value); }},
        {"ftcl1.gamma", [&](const Entry& x) { gamma(Method::FTCL1, x); }},
        {"ftcl1.xi_G", [&](const Entry& x) { table[Method::FTCL1].hp.xi_G = to_double(x, x.value); }},
        {"ftcl1.xi_C", [&](const Entry& x) { table[Method::FTCL1].hp.xi_C = to_double(x, x.value); }},
        {"ftcl1.beta", [&](const Entry& x) { table[Method::FTCL1].hp.beta = to_double(x, x.value); }},
        {"ftcl2.gamma", [&](const Entry& x) { gamma(Method::FTCL2, x); }},
        {"ftcl2.xi_G", [&](const Entry& x) { table[Method::FTCL2].hp.xi_G = to_double(x, x.value); }},
        {"ftcl2.xi_C", [&](const Entry& x) { table[Method::FTCL2].hp.xi_C = to_double(x, x.value); }},
        {"ftcl2.gamma1", [&](const Entry& x) { table[Method::FTCL2].hp.gamma1 = to_double(x, x.value); }},
        {"bounds.lam_min", [&](const Entry& x) { cfg.bounds.lam_min = to_double(x, x.value); }},
        {"bounds.lam_max", [&](const Entry& x) { cfg.bounds.lam_max = to_double(x, x.value); }},
        {"bounds.n", [&](const Entry& x) { cfg.bounds.n = to_int<int>(x); }},
        {"bounds.V0", [&](const Entry& x) { cfg.bounds.V0 = to_double(x, x.value); }},
        {"bounds.theta0_norm", [&](const Entry& x) { cfg.bounds.theta0_norm = to_double(x, x.value); }},
    };
    const auto it = setters.find(e.full());
    if (it == setters.end()) throw ConfigError(e.line, e.full(), "unknown key");
    it->second(e);
  }

  ExperimentConfig finish() {
    cfg.methods.clear();
    for (Method m : order) cfg.methods.push_back(table[m]);
    try {
      cfg.validate();
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(0, "", ex.what());
    }
    return cfg;
  }
};

ExperimentConfig build(const std::vector<Entry>& entries) {
  std::string system = "example1";
  for (const auto& e : entries) {
    if (e.full() == "system.name") system = e.value;
  }
  ExperimentConfig base;
  try {
    base = preset_config(system);
  } catch (const std::invalid_argument&) {
    int line = 0;
    for (const auto& e : entries) {
      if (e.full() == "system.name") line = e.line;
    }
    throw ConfigError(line, "system.name", "unknown system '" + system + "'");
  }
  Builder b(base);
  for (const auto& e : entries) b.apply(e);
  return b.finish();
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

bool same_hp(const HyperParams& a, const HyperParams& b) {
  return a.gamma == b.gamma && a.xi_G == b.xi_G && a.xi_C == b.xi_C && a.beta == b.beta && a.gamma1 == b.gamma1;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
  std::vector<Entry> entries = parse_entries(text);
  for (const auto& o : overrides) entries.push_back(parse_override(o));
  return build(entries);
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(0, "", "cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), overrides);
}

ExperimentConfig preset_with_overrides(const std::string& name, const std::vector<std::string>& overrides) {
  std::vector<Entry> entries;
  entries.push_back({0, "system", "name", name});
  for (const auto& o : overrides) entries.push_back(parse_override(o));
  return build(entries);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto gamma = [&](const MethodConfig& mc) {
    return mc.auto_gamma ? std::string("auto") : format_double(mc.hp.gamma);
  };
  out << "[system]\nname = " << cfg.system << "\n\n";
  out << "[basis]\nkind = " << cfg.basis.kind << "\ncenters = " << cfg.basis.centers
      << "\nlo = " << format_double(cfg.basis.lo) << "\nhi = " << format_double(cfg.basis.hi)
      << "\nspread = " << format_double(cfg.basis.spread) << "\n\n";
  out << "[run]\nk0 = " << cfg.k0 << "\nkf = " << cfg.kf << "\nx0 = " << join(cfg.x0) << "\nP = " << cfg.P
      << "\neta = " << format_double(cfg.eta) << "\nseed = " << cfg.seed << "\nout = " << cfg.out_dir
      << "\nmethods = ";
  for (size_t i = 0; i < cfg.methods.size(); ++i) {
    std::string name(method_name(cfg.methods[i].method));
    out << (i > 0 ? ", " : "") << lower(name);
  }
  out << "\n\n";
  out << "[domain]\nlo = " << join(cfg.domain_lo) << "\nhi = " << join(cfg.domain_hi)
      << "\nintervals = " << cfg.intervals << "\n\n";
  out << "[filter]\nc = " << format_double(cfg.filter.c) << "\n\n";
  out << "[excitation]\namplitude = " << format_double(cfg.excitation.amplitude)
      << "\ndecay = " << format_double(cfg.excitation.decay) << "\nfrequencies = " << join(cfg.excitation.frequencies)
      << "\nrandom_phase = " << (cfg.excitation.random_phase ? "true" : "false") << "\n\n";
  out << "[noise]\nb_eps_bar = ";
  switch (cfg.noise.mode) {
    case NoiseMode::Known:
      out << format_double(cfg.noise.b_eps_bar);
      break;
    case NoiseMode::Auto:
      out << "auto";
      break;
    case NoiseMode::Unknown:
      out << "unknown";
      break;
  }
  out << "\n";
  for (const auto& mc : cfg.methods) {
    const HyperParams& hp = mc.hp;
    switch (mc.method) {
      case Method::GD:
        out << "\n[gd]\ngamma = " << gamma(mc) << "\n";
        break;
      case Method::CL:
        out << "\n[cl]\ngamma = " << gamma(mc) << "\nsigma_G = " << format_double(hp.xi_G)
            << "\nsigma_C = " << format_double(hp.xi_C) << "\n";
        break;
      case Method::FTCL1:
        out << "\n[ftcl1]\ngamma = " << gamma(mc) << "\nxi_G = " << format_double(hp.xi_G)
            << "\nxi_C = " << format_double(hp.xi_C) << "\nbeta = " << format_double(hp.beta) << "\n";
        break;
      case Method::FTCL2:
        out << "\n[ftcl2]\ngamma = " << gamma(mc) << "\nxi_G = " << format_double(hp.xi_G)
            << "\nxi_C = " << format_double(hp.xi_C) << "\ngamma1 = " << format_double(hp.gamma1) << "\n";
        break;
    }
  }
  out << "\n[bounds]\nlam_min = " << format_double(cfg.bounds.lam_min)
      << "\nlam_max = " << format_double(cfg.bounds.lam_max) << "\nn = " << cfg.bounds.n
      << "\nV0 = " << format_double(cfg.bounds.V0) << "\ntheta0_norm = " << format_double(cfg.bounds.theta0_norm)
      << "\n";
  return out.str();
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  if (a.methods.size() != b.methods.size()) return false;
  for (size_t i = 0; i < a.methods.size(); ++i) {
    const MethodConfig& x = a.methods[i];
    const MethodConfig& y = b.methods[i];
    if (x.method != y.method || x.auto_gamma != y.auto_gamma) return false;
    // The rate slot is a placeholder while auto_gamma is set.
    HyperParams hx = x.hp;
    HyperParams hy = y.hp;
    if (x.auto_gamma) hx.gamma = hy.gamma = 0.0;
    if (!same_hp(hx, hy)) return false;
  }
  return a.system == b.system && a.basis.kind == b.basis.kind && a.basis.centers == b.basis.centers &&
         a.basis.lo == b.basis.lo && a.basis.hi == b.basis.hi && a.basis.spread == b.basis.spread && a.k0 == b.k0 &&
         a.kf == b.kf && a.x0 == b.x0 && a.domain_lo == b.domain_lo && a.domain_hi == b.domain_hi &&
         a.intervals == b.intervals && a.filter.c == b.filter.c &&
         a.excitation.amplitude == b.excitation.amplitude && a.excitation.decay == b.excitation.decay &&
         a.excitation.frequencies == b.excitation.frequencies &&
         a.excitation.random_phase == b.excitation.random_phase && a.noise.mode == b.noise.mode &&
         a.noise.b_eps_bar == b.noise.b_eps_bar && a.P == b.P && a.eta == b.eta && a.seed == b.seed &&
         a.out_dir == b.out_dir && a.bounds.lam_min == b.bounds.lam_min && a.bounds.lam_max == b.bounds.lam_max &&
         a.bounds.n == b.bounds.n && a.bounds.V0 == b.bounds.V0 && a.bounds.theta0_norm == b.bounds.theta0_norm;
}

}  // namespace ftcl
