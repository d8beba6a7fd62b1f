#include "hdisp/config.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hdisp/common.hpp"

namespace hdisp {

std::vector<double> LogRange::values() const {
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {lo};
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) out.push_back(std::exp(a + (b - a) * i / (count - 1)));
  // pin the endpoints against exp/log rounding
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::string describe(const PhaseSpec& p) {
  if (p.family == PhaseFamily::fourth_order) return to_string(p.family);
  std::ostringstream os;
  os << to_string(p.family) << ':' << p.alpha;
  return os.str();
}

PhaseSpec parse_phase(const std::string& text) {
  std::string body = boost::trim_copy(text);
  PhaseSpec p;
  const auto colon = body.find(':');
  try {
    p.family = phase_family_from_string(boost::trim_copy(body.substr(0, colon)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (colon != std::string::npos) {
    try {
      p.alpha = std::stod(body.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad phase parameter in '" + text + "'");
    }
  } else if (p.family != PhaseFamily::fourth_order) {
    throw ConfigError("phase '" + text + "' needs a parameter, e.g. " + body + ":0.5");
  }
  return p;
}

namespace {

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  boost::split(parts, v, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(key + ": expected an integer");
  return static_cast<int>(x);
}

std::vector<int> to_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& p : split_list(v)) out.push_back(to_int(key, p));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

template <class T>
Setter number(T ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
    if constexpr (std::is_same_v<T, int>)
      c.*field = to_int(k, v);
    else
      c.*field = static_cast<T>(to_double(k, v));
  };
}

Setter int_list(std::vector<int> ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
    c.*field = to_ints(k, v);
  };
}

Setter phase_list(std::vector<PhaseSpec> ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string&, const std::string& v) {
    (c.*field).clear();
    for (const auto& p : split_list(v)) (c.*field).push_back(parse_phase(p));
  };
}

Setter single_phase(PhaseSpec ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string&, const std::string& v) {
    c.*field = parse_phase(v);
  };
}

void add_range(std::map<std::string, Setter>& t, const std::string& section,
               LogRange ExperimentConfig::*field) {
  t[section + ".t_min"] = [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
    (c.*field).lo = to_double(k, v);
  };
  t[section + ".t_max"] = [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
    (c.*field).hi = to_double(k, v);
  };
  t[section + ".t_count"] = [field](ExperimentConfig& c, const std::string& k,
                                    const std::string& v) { (c.*field).count = to_int(k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    using C = ExperimentConfig;
    t["group.n"] = number(&C::n);

    t["lemmas.oracle_m_max"] = number(&C::oracle_m_max);
    t["lemmas.oracle_d_max"] = number(&C::oracle_d_max);
    t["lemmas.growth_m"] = number(&C::growth_m);
    t["lemmas.growth_ref_m"] = number(&C::growth_ref_m);
    t["lemmas.growth_d_max"] = number(&C::growth_d_max);
    t["lemmas.vdc_phase"] = single_phase(&C::vdc_phase);
    add_range(t, "lemmas", &C::vdc_t);

    t["partition.points"] = number(&C::partition_points);
    t["partition.log2_min"] = number(&C::partition_log2_lo);
    t["partition.log2_max"] = number(&C::partition_log2_hi);

    t["kernel.j_list"] = int_list(&C::kernel_j);
    t["kernel.grid_points"] = number(&C::kernel_grid);
    t["kernel.r_extent"] = number(&C::kernel_r_extent);
    t["kernel.s_extent"] = number(&C::kernel_s_extent);
    t["kernel.roundtrip_modes"] = number(&C::roundtrip_modes);
    t["kernel.determinism_t"] = number(&C::determinism_t);

    t["decay.phases"] = phase_list(&C::decay_phases);
    t["decay.j"] = number(&C::decay_j);
    add_range(t, "decay", &C::decay_t);
    t["decay.scan"] = [](C& c, const std::string& k, const std::string& v) {
      c.scan_targets.clear();
      for (const auto& item : split_list(v)) {
        const auto at = item.find('@');
        if (at == std::string::npos) throw ConfigError(k + ": entries look like phase@t");
        c.scan_targets.push_back({parse_phase(item.substr(0, at)),
                                  to_double(k, boost::trim_copy(item.substr(at + 1)))});
      }
    };
    t["decay.scan_j"] = int_list(&C::scan_j);

    t["sharpness.phases"] = phase_list(&C::sharp_phases);
    t["sharpness.n_list"] = int_list(&C::sharp_n);
    add_range(t, "sharpness", &C::sharp_t);

    t["dispersive.phase"] = single_phase(&C::ratio_phase);
    t["dispersive.components"] = int_list(&C::ratio_components);
    add_range(t, "dispersive", &C::ratio_t);

    t["tolerances.quad_tol"] = number(&C::quad_tol);
    t["tolerances.tail_eps"] = number(&C::tail_eps);
    t["tolerances.transform_tol"] = number(&C::transform_tol);
    t["tolerances.oscillatory_tol"] = number(&C::osc_tol);
    t["tolerances.sup_grid_r"] = number(&C::sup_grid_r);
    t["tolerances.sup_grid_s"] = number(&C::sup_grid_s);

    t["output.dir"] = [](C& c, const std::string&, const std::string& v) { c.out_dir = v; };
    t["run.seed"] = [](C& c, const std::string& k, const std::string& v) {
      try {
        c.seed = std::stoull(v);
      } catch (const std::exception&) {
        throw ConfigError(k + ": expected an unsigned integer");
      }
    };
    return t;
  }();
  return table;
}

void check_range(const LogRange& r, const std::string& name) {
  if (r.count < 1) throw ConfigError(name + ": t-list is empty (t_count must be >= 1)");
  if (!(r.lo > 0.0) || !std::isfinite(r.hi)) throw ConfigError(name + ": times must be positive and finite");
  if (r.count > 1 && !(r.hi > r.lo))
    throw ConfigError(name + ": t-list must be strictly increasing (t_max > t_min)");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("group.n must be >= 1");
  for (double tol : {quad_tol, tail_eps, transform_tol, osc_tol})
    if (!(tol > 0.0) || !std::isfinite(tol)) throw ConfigError("tolerances must be > 0");
  if (sup_grid_r < 3 || sup_grid_s < 3) throw ConfigError("sup grid sizes must be >= 3");
  if (oracle_m_max < 0 || oracle_m_max > 25) throw ConfigError("lemmas.oracle_m_max must lie in [0, 25]");
  if (oracle_d_max < 1 || growth_d_max < 1) throw ConfigError("lemmas: d ranges start at 1");
  if (growth_ref_m < 1 || growth_m < growth_ref_m)
    throw ConfigError("lemmas: need 1 <= growth_ref_m <= growth_m");
  if (partition_points < 2 || !(partition_log2_hi > partition_log2_lo))
    throw ConfigError("partition: need >= 2 points on a nonempty range");
  if (kernel_j.empty() || kernel_grid < 2 || !(kernel_r_extent > 0.0) || !(kernel_s_extent > 0.0))
    throw ConfigError("kernel: need a j-list, grid_points >= 2 and positive extents");
  if (roundtrip_modes < 1) throw ConfigError("kernel.roundtrip_modes must be >= 1");
  if (decay_phases.empty()) throw ConfigError("decay.phases is empty");
  check_range(decay_t, "decay");
  if (decay_t.count < 6) throw ConfigError("decay: a time fit needs t_count >= 6");
  if (scan_j.size() < 5) throw ConfigError("decay.scan_j needs at least 5 scales");
  for (const auto& s : scan_targets)
    if (!(s.t > 0.0)) throw ConfigError("decay.scan: times must be positive");
  if (sharp_phases.empty() || sharp_n.empty()) throw ConfigError("sharpness: empty phase or n list");
  for (int v : sharp_n)
    if (v < 1) throw ConfigError("sharpness.n_list entries must be >= 1");
  check_range(sharp_t, "sharpness");
  check_range(vdc_t, "lemmas");
  if (ratio_components.empty()) throw ConfigError("dispersive.components is empty");
  check_range(ratio_t, "dispersive");
  if (out_dir.empty()) throw ConfigError("output.dir is empty");
  // admissible parameters are checked by constructing each phase once
  std::vector<PhaseSpec> all = decay_phases;
  all.insert(all.end(), sharp_phases.begin(), sharp_phases.end());
  all.push_back(vdc_phase);
  all.push_back(ratio_phase);
  for (const auto& s : scan_targets) all.push_back(s.phase);
  for (const auto& p : all) {
    try {
      builtin_phase(p);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("phase ") + describe(p) + ": " + e.what());
    }
  }
}

void ExperimentConfig::scale_tolerances(double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw ConfigError("--tol-scale must be > 0");
  quad_tol *= factor;
  tail_eps *= factor;
  transform_tol *= factor;
  osc_tol *= factor;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  apply_environment(c);
  return c;
}

void apply_environment(ExperimentConfig& cfg) {
  if (const char* out = std::getenv("HDISP_OUT"); out && *out) cfg.out_dir = out;
}

ExperimentConfig load_config(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("cannot read config: " + std::string(e.what()));
  }
  ExperimentConfig cfg;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      const auto it = table.find(name);
      if (it == table.end()) throw ConfigError("unknown config key '" + name + "'");
      it->second(cfg, name, boost::trim_copy(value.data()));
    }
  }
  apply_environment(cfg);
  cfg.validate();
  return cfg;
}

}  // namespace hdisp
