// config.hpp
// Flat key-value run configuration with dotted sections, e.g.
//   wave.sites    = 1 2
//   wave.actions  = 0.05 0.05
//   kam.k_max     = 3
// '#' starts a comment. Unknown keys are an error (diagnostic names the key).
#pragma once

#include <fstream>
#include <map>
#include <sstream>

#include "kamwave/kam.hpp"
#include "kamwave/wave.hpp"

namespace kamwave {

struct RunConfig {
  WaveConfig wave = WaveConfig::defaults();
  KamParams kam;
  std::vector<int> domain_counts{24, 24};
  bool domain_jitter = true;
  std::uint64_t seed = 20240817;
  int kam_k_max = 3;
  Real jet_tol = 1e-13;
  VecR rho_star;        // empty: pick the best-margin alive sample
  Real theta0 = 0.0;
  int residual_tsteps = 16;
  Real residual_tmax = 1.0;

  static RunConfig parse(std::istream& in);
  static RunConfig parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    return parse(f);
  }
  std::string echo() const;
};

namespace cfg_detail {

inline std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

inline VecR parse_vec(const std::vector<std::string>& toks) {
  VecR v(static_cast<int>(toks.size()));
  for (size_t i = 0; i < toks.size(); ++i) v[i] = std::stod(toks[i]);
  return v;
}

}  // namespace cfg_detail

inline RunConfig RunConfig::parse(std::istream& in) {
  RunConfig rc;
  rc.wave.g_poly.clear();
  bool g_seen = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (!cfg_detail::tokens(line).empty())
        throw std::runtime_error("config: bad line " + std::to_string(lineno));
      continue;
    }
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    const auto toks = cfg_detail::tokens(line.substr(eq + 1));
    if (toks.empty())
      throw std::runtime_error("config: empty value for " + key);
    auto num = [&](size_t i = 0) { return std::stod(toks[i]); };

    if (key == "wave.sites") {
      rc.wave.sites_A.clear();
      for (const auto& t : toks) rc.wave.sites_A.push_back(std::stoi(t));
    } else if (key == "wave.actions") {
      rc.wave.actions = cfg_detail::parse_vec(toks);
    } else if (key == "wave.eps") {
      rc.wave.eps = num();
    } else if (key == "wave.s_max") {
      rc.wave.s_max = std::stoi(toks[0]);
    } else if (key == "wave.k_theta") {
      rc.wave.k_theta = std::stoi(toks[0]);
    } else if (key == "wave.m_x") {
      rc.wave.m_x = std::stoi(toks[0]);
    } else if (key == "wave.vhat") {
      // pairs: mode value mode value ...
      for (size_t i = 0; i + 1 < toks.size(); i += 2)
        rc.wave.vhat_fixed[std::stoi(toks[i])] = std::stod(toks[i + 1]);
    } else if (key == "wave.g") {
      // triples: upow xmode coeff ...
      g_seen = true;
      for (size_t i = 0; i + 2 < toks.size(); i += 3)
        rc.wave.g_poly[std::stoi(toks[i])][std::stoi(toks[i + 1])] +=
            std::stod(toks[i + 2]);
    } else if (key == "wave.deg_r") {
      rc.wave.poly.deg_r_max = std::stoi(toks[0]);
    } else if (key == "wave.deg_z") {
      rc.wave.poly.deg_z_max = std::stoi(toks[0]);
    } else if (key == "domain.lo") {
      rc.wave.rho_lo = cfg_detail::parse_vec(toks);
    } else if (key == "domain.hi") {
      rc.wave.rho_hi = cfg_detail::parse_vec(toks);
    } else if (key == "domain.counts") {
      rc.domain_counts.clear();
      for (const auto& t : toks) rc.domain_counts.push_back(std::stoi(t));
    } else if (key == "domain.jitter") {
      rc.domain_jitter = (toks[0] == "true" || toks[0] == "1");
    } else if (key == "domain.rho_star") {
      rc.rho_star = cfg_detail::parse_vec(toks);
    } else if (key == "kam.k_max") {
      rc.kam_k_max = std::stoi(toks[0]);
    } else if (key == "kam.jet_tol") {
      rc.jet_tol = num();
    } else if (key == "kam.sigma") {
      rc.kam.sigma = num();
    } else if (key == "kam.mu") {
      rc.kam.mu = num();
    } else if (key == "kam.alpha") {
      rc.kam.alpha = num();
    } else if (key == "kam.beta") {
      rc.kam.beta = num();
    } else if (key == "kam.kappa_cap") {
      rc.kam.kappa_cap = num();
    } else if (key == "kam.kappa_tilde") {
      rc.kam.kappa_tilde_override = num();
    } else if (key == "kam.quad_nodes") {
      rc.kam.quad_nodes = std::stoi(toks[0]);
    } else if (key == "kam.plan_seed") {
      rc.kam.plan_seed = std::stoull(toks[0]);
    } else if (key == "kam.flow_tol") {
      rc.kam.flow_tol = num();
    } else if (key == "hypo.delta") {
      rc.wave.hypo.delta = num();
    } else if (key == "hypo.delta0") {
      rc.wave.hypo.delta0 = num();
    } else if (key == "run.seed") {
      rc.seed = std::stoull(toks[0]);
    } else if (key == "run.theta0") {
      rc.theta0 = num();
    } else if (key == "run.residual_tsteps") {
      rc.residual_tsteps = std::stoi(toks[0]);
    } else if (key == "run.residual_tmax") {
      rc.residual_tmax = num();
    } else {
      throw std::runtime_error("config: unknown key '" + key + "'");
    }
  }
  if (!g_seen) rc.wave.g_poly[3][0] = 4.0;  // default cubic nonlinearity
  if (rc.wave.rho_lo.size() == 0) rc.wave.rho_lo = VecR::Constant(rc.wave.n(), 1.0);
  if (rc.wave.rho_hi.size() == 0) rc.wave.rho_hi = VecR::Constant(rc.wave.n(), 2.0);
  if (rc.wave.actions.size() == 0)
    rc.wave.actions = VecR::Constant(rc.wave.n(), 0.05);
  if (rc.wave.vhat_fixed.find(0) == rc.wave.vhat_fixed.end())
    rc.wave.vhat_fixed[0] = 0.25;
  rc.wave.hypo.beta = rc.kam.beta;
  return rc;
}

inline std::string RunConfig::echo() const {
  std::ostringstream os;
  os << "wave.sites =";
  for (int a : wave.sites_A) os << " " << a;
  os << "\nwave.actions =";
  for (int a = 0; a < wave.actions.size(); ++a) os << " " << wave.actions[a];
  os << "\nwave.eps = " << wave.eps << "\nwave.s_max = " << wave.s_max
     << "\nwave.k_theta = " << wave.k_theta << "\nwave.m_x = " << wave.m_x;
  os << "\nwave.vhat =";
  for (const auto& [m, v] : wave.vhat_fixed) os << " " << m << " " << v;
  os << "\nwave.g =";
  for (const auto& [p, ms] : wave.g_poly)
    for (const auto& [xm, c] : ms) os << " " << p << " " << xm << " " << c.real();
  os << "\ndomain.lo =";
  for (int a = 0; a < wave.rho_lo.size(); ++a) os << " " << wave.rho_lo[a];
  os << "\ndomain.hi =";
  for (int a = 0; a < wave.rho_hi.size(); ++a) os << " " << wave.rho_hi[a];
  os << "\ndomain.counts =";
  for (int c : domain_counts) os << " " << c;
  os << "\ndomain.jitter = " << (domain_jitter ? "true" : "false");
  os << "\nkam.k_max = " << kam_k_max << "\nkam.sigma = " << kam.sigma
     << "\nkam.mu = " << kam.mu << "\nkam.alpha = " << kam.alpha
     << "\nkam.beta = " << kam.beta << "\nkam.kappa_cap = " << kam.kappa_cap
     << "\nhypo.delta = " << wave.hypo.delta
     << "\nhypo.delta0 = " << wave.hypo.delta0 << "\nrun.seed = " << seed
     << "\n";
  return os.str();
}

}  // namespace kamwave
