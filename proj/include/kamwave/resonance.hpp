// resonance.hpp
// Parameter-domain management: sampled boxes, Hypothesis A1 margins, the
// divisor-family margin scan behind the Melnikov exclusion, and the
// exclusion bookkeeping (alive masks, fractions, CSV).
//
// The four divisor families, per sample and 0 < |k|_1 ≤ N:
//   0: |k·ω|                      ≥ κ          (k with zero lattice momentum)
//   1: |k·ω ± λ_s|                ≥ κ <s>
//   2: |k·ω + λ_s + λ_{s'}|       ≥ κ (<s>+<s'>)
//   3: |k·ω + λ_s − λ_{s'}|       ≥ κ̃ (1+||s|−|s'||)
// Margins are stored normalized (value / unit threshold), so a sample is
// alive at (κ, κ̃) iff min(m0,m1,m2) ≥ κ and m3 ≥ κ̃ — exclusion
// monotonicity in κ and N is exact by construction.
#pragma once

#include <functional>
#include <sstream>

#include "kamwave/lattice.hpp"

namespace kamwave {

struct ParamDomain {
  VecR lo, hi;
  std::vector<int> counts;
  bool jitter = false;
  std::uint64_t seed = 0;
  std::vector<VecR> samples;
  std::vector<char> alive;

  static ParamDomain make(const VecR& lo, const VecR& hi,
                          const std::vector<int>& counts, bool jitter,
                          std::uint64_t seed) {
    ParamDomain d;
    d.lo = lo;
    d.hi = hi;
    d.counts = counts;
    d.jitter = jitter;
    d.seed = seed;
    const int n = static_cast<int>(counts.size());
    long total = 1;
    for (int c : counts) total *= c;
    Rng rng(seed);
    for (long idx = 0; idx < total; ++idx) {
      long rem = idx;
      VecR p(n);
      for (int a = 0; a < n; ++a) {
        const int ia = rem % counts[a];
        rem /= counts[a];
        const Real cell = (hi[a] - lo[a]) / counts[a];
        const Real off = jitter ? rng.uniform(0.0, 1.0) : 0.5;
        p[a] = lo[a] + cell * (ia + off);
      }
      d.samples.push_back(p);
    }
    d.alive.assign(d.samples.size(), 1);
    return d;
  }

  long alive_count() const {
    long c = 0;
    for (char a : alive) c += a;
    return c;
  }
  Real alive_fraction() const {
    return samples.empty() ? 0.0 : Real(alive_count()) / samples.size();
  }
};

// Hypothesis A1 margins on the truncation:
//   min_s λ_s/<s>  and  min_{|s|≠|s'|} |λ_s − λ_{s'}| / ||s|−|s'||
struct A1Report {
  Real c0_margin = 0, c1_margin = 0;
  bool pass = false;
};
inline A1Report check_a1(const SiteLattice& lat, const VecR& lambda, Real c0,
                         Real c1) {
  A1Report rep;
  rep.c0_margin = std::numeric_limits<Real>::infinity();
  rep.c1_margin = std::numeric_limits<Real>::infinity();
  for (int i = 0; i < lat.n_sites(); ++i) {
    rep.c0_margin =
        std::min(rep.c0_margin, lambda[i] / bracket_weight(lat.site(i)));
    for (int j = 0; j < lat.n_sites(); ++j) {
      const int ds = std::abs(std::abs(lat.site(i)) - std::abs(lat.site(j)));
      if (ds == 0) continue;
      rep.c1_margin =
          std::min(rep.c1_margin, std::abs(lambda[i] - lambda[j]) / ds);
    }
  }
  rep.pass = rep.c0_margin >= c0 - 1e-12 && rep.c1_margin >= c1 - 1e-12;
  return rep;
}

// z_k = k/|k| and the transversality derivative ⟨∂_ρ(k·ω), z_k⟩
inline VecR transversality_direction(const std::vector<int>& k) {
  Real nrm = 0;
  for (int x : k) nrm += Real(x) * x;
  if (nrm == 0) throw std::runtime_error("transversality_direction: k = 0");
  VecR z(static_cast<int>(k.size()));
  for (size_t a = 0; a < k.size(); ++a) z[a] = k[a] / std::sqrt(nrm);
  return z;
}
inline Real transversality_derivative(const std::vector<int>& k,
                                      const MatR& domega) {
  const VecR z = transversality_direction(k);
  VecR grad = VecR::Zero(domega.cols());
  for (int a = 0; a < domega.rows(); ++a) grad += Real(k[a]) * domega.row(a).transpose();
  return grad.dot(z);
}

struct SampleMargins {
  Real m[4] = {std::numeric_limits<Real>::infinity(),
               std::numeric_limits<Real>::infinity(),
               std::numeric_limits<Real>::infinity(),
               std::numeric_limits<Real>::infinity()};
  std::vector<int> worst_k;
  int worst_s = 0, worst_sp = 0;
  int worst_family = -1;

  Real overall(Real kappa_tilde_ratio = 1.0) const {
    // normalized: alive at κ iff overall ≥ κ (with m3 scaled by κ̃/κ)
    return std::min(std::min(m[0], m[1]),
                    std::min(m[2], m[3] / kappa_tilde_ratio));
  }
};

struct MarginScanOptions {
  int N = 6;
  bool momentum_filter = false;          // restrict to solver-reachable pairs
  std::vector<int> tangential;           // site values of A (for momentum)
};

// normalized worst margins per divisor family for one (ω, λ) sample
inline SampleMargins scan_margins(const SiteLattice& lat, const VecR& omega,
                                  const VecR& lambda,
                                  const MarginScanOptions& opt) {
  SampleMargins sm;
  const int n = static_cast<int>(omega.size());
  std::vector<int> k(n, -opt.N);
  const int L = lat.n_sites();

  Real global_worst = std::numeric_limits<Real>::infinity();
  auto consider = [&](int family, Real value, Real unit, const std::vector<int>& kk,
                      int s, int sp) {
    const Real ratio = value / unit;
    sm.m[family] = std::min(sm.m[family], ratio);
    if (ratio < global_worst) {
      global_worst = ratio;
      sm.worst_k = kk;
      sm.worst_s = s;
      sm.worst_sp = sp;
      sm.worst_family = family;
    }
  };

  std::function<void(int)> rec = [&](int pos) {
    if (pos == n) {
      int ord = 0;
      long mom = 0;
      for (int a = 0; a < n; ++a) {
        ord += std::abs(k[a]);
        if (!opt.tangential.empty()) mom += static_cast<long>(k[a]) * opt.tangential[a];
      }
      if (ord == 0 || ord > opt.N) return;
      Real kw = 0;
      for (int a = 0; a < n; ++a) kw += k[a] * omega[a];
      const bool filt = opt.momentum_filter && !opt.tangential.empty();
      if (!filt || mom == 0) consider(0, std::abs(kw), 1.0, k, 0, 0);
      for (int i = 0; i < L; ++i) {
        const int s = lat.site(i);
        if (!filt || mom + s == 0)
          consider(1, std::abs(kw + lambda[i]), bracket_weight(s), k, s, 0);
        if (!filt || mom - s == 0)
          consider(1, std::abs(kw - lambda[i]), bracket_weight(s), k, s, 0);
        for (int j = 0; j < L; ++j) {
          const int sp = lat.site(j);
          if (!filt || mom + s + sp == 0)
            consider(2, std::abs(kw + lambda[i] + lambda[j]),
                     bracket_weight(s) + bracket_weight(sp), k, s, sp);
          if (!filt || mom + s - sp == 0)
            consider(3, std::abs(kw + lambda[i] - lambda[j]),
                     1.0 + std::abs(std::abs(s) - std::abs(sp)), k, s, sp);
        }
      }
      return;
    }
    for (int v = -opt.N; v <= opt.N; ++v) {
      k[pos] = v;
      rec(pos + 1);
    }
  };
  rec(0);
  return sm;
}

struct ExclusionResult {
  std::vector<SampleMargins> margins;  // per sample (computed once)
  Real excluded_fraction = 0;
};

// Mark dead every alive sample violating a divisor condition at (κ, κ̃, N).
// κ̃ defaults to κ (Hypothesis A3 literally).
inline ExclusionResult melnikov_exclude(
    ParamDomain& dom, const std::function<VecR(const VecR&)>& omega_of,
    const std::function<VecR(const VecR&)>& lambda_of, const SiteLattice& lat,
    Real kappa, int N, Real kappa_tilde = -1,
    const MarginScanOptions* opt_in = nullptr) {
  if (kappa_tilde < 0) kappa_tilde = kappa;
  MarginScanOptions opt;
  if (opt_in) opt = *opt_in;
  opt.N = N;
  ExclusionResult out;
  long was_alive = dom.alive_count(), killed = 0;
  for (size_t i = 0; i < dom.samples.size(); ++i) {
    SampleMargins sm;
    if (N >= 1)
      sm = scan_margins(lat, omega_of(dom.samples[i]),
                        lambda_of(dom.samples[i]), opt);
    out.margins.push_back(sm);
    if (!dom.alive[i]) continue;
    const bool ok = sm.m[0] >= kappa && sm.m[1] >= kappa && sm.m[2] >= kappa &&
                    sm.m[3] >= kappa_tilde;
    if (!ok) {
      dom.alive[i] = 0;
      ++killed;
    }
  }
  out.excluded_fraction = was_alive > 0 ? Real(killed) / was_alive : 0.0;
  return out;
}

inline std::string exclusion_csv(const ParamDomain& dom,
                                 const std::vector<SampleMargins>& margins) {
  std::ostringstream os;
  os << "sample";
  for (int a = 0; a < dom.lo.size(); ++a) os << ",rho" << a;
  os << ",alive,worst_margin,worst_family,worst_k,worst_s,worst_s_prime\n";
  for (size_t i = 0; i < dom.samples.size(); ++i) {
    os << i;
    for (int a = 0; a < dom.lo.size(); ++a) os << "," << dom.samples[i][a];
    Real wm = std::numeric_limits<Real>::infinity();
    int wf = -1;
    if (i < margins.size()) {
      for (int f2 = 0; f2 < 4; ++f2)
        if (margins[i].m[f2] < wm) {
          wm = margins[i].m[f2];
          wf = f2;
        }
    }
    os << "," << int(dom.alive[i]) << "," << wm << "," << wf << ",\"(";
    if (i < margins.size())
      for (size_t j = 0; j < margins[i].worst_k.size(); ++j)
        os << margins[i].worst_k[j]
           << (j + 1 < margins[i].worst_k.size() ? " " : "");
    os << ")\"," << (i < margins.size() ? margins[i].worst_s : 0) << ","
       << (i < margins.size() ? margins[i].worst_sp : 0) << "\n";
  }
  return os.str();
}

}  // namespace kamwave
