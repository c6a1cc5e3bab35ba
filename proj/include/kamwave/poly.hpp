// poly.hpp
// Sparse polynomial Hamiltonians: monomials e^{ik·θ} r^m ζ^J with θ-modes
// capped at |k|_1 ≤ K_θ, r-degree ≤ deg_r_max, ζ-degree ≤ deg_z_max. The
// weight grading (r counts 2, ζ counts 1) makes the jet exactly the terms
// of weight ≤ 2; those are never dropped. Higher-weight debris produced by
// brackets and compositions is re-truncated by magnitude against a term
// budget, and the discarded l1 mass is recorded.
#pragma once

#include <algorithm>
#include <unordered_map>

#include "kamwave/jet.hpp"

namespace kamwave {

struct MonoKey {
  std::uint64_t a = 0;  // mode (32 bits) | rexp 4x4 bits
  std::uint64_t b = 0;  // four slot entries, 16 bits each, value slot+1, sorted desc

  static MonoKey make(int mode, const std::array<int, 4>& rexp,
                      const std::array<int, 4>& slots, int nslots) {
    MonoKey k;
    k.a = (static_cast<std::uint64_t>(mode) << 16);
    for (int j = 0; j < 4; ++j)
      k.a |= (static_cast<std::uint64_t>(rexp[j] & 0xF) << (4 * j));
    std::array<int, 4> s{};
    for (int j = 0; j < nslots; ++j) s[j] = slots[j] + 1;
    std::sort(s.begin(), s.begin() + nslots, std::greater<int>());
    for (int j = 0; j < nslots; ++j)
      k.b |= (static_cast<std::uint64_t>(s[j] & 0xFFFF) << (16 * j));
    return k;
  }
  int mode() const { return static_cast<int>(a >> 16); }
  int rexp(int j) const { return static_cast<int>((a >> (4 * j)) & 0xF); }
  int rdeg() const { return rexp(0) + rexp(1) + rexp(2) + rexp(3); }
  int slot(int j) const { return static_cast<int>((b >> (16 * j)) & 0xFFFF) - 1; }
  int zdeg() const {
    int d = 0;
    for (int j = 0; j < 4; ++j) d += (slot(j) >= 0);
    return d;
  }
  int weight() const { return 2 * rdeg() + zdeg(); }
  bool operator==(const MonoKey& o) const { return a == o.a && b == o.b; }
  bool operator<(const MonoKey& o) const {
    return a != o.a ? a < o.a : b < o.b;
  }
};

struct MonoKeyHash {
  std::size_t operator()(const MonoKey& k) const {
    std::uint64_t h = k.a * 0x9E3779B97F4A7C15ull;
    h ^= k.b + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    h *= 0xBF58476D1CE4E5B9ull;
    return static_cast<std::size_t>(h ^ (h >> 31));
  }
};

struct PolyOptions {
  int deg_r_max = 2;
  int deg_z_max = 4;
  std::size_t term_budget = 300000;  // weight ≥ 3 terms only
  Real prune_rel = 1e-12;            // pairwise generation cutoff (relative)
};

class PolyHamiltonian {
 public:
  ModesPtr modes;
  LatticePtr lattice;
  int n = 0;
  Convention conv = Convention::Complex;
  PolyOptions opts;
  Real dropped_mass = 0;  // accumulated l1 coefficient mass discarded

  PolyHamiltonian() = default;
  PolyHamiltonian(ModesPtr m, LatticePtr lat, int n_, Convention cv,
                  PolyOptions o = {})
      : modes(m), lattice(lat), n(n_), conv(cv), opts(o) {}

  const std::unordered_map<MonoKey, Cplx, MonoKeyHash>& terms() const {
    return terms_;
  }
  std::size_t size() const { return terms_.size(); }

  void add_term(const MonoKey& key, Cplx c) {
    if (c == Cplx(0)) return;
    if (key.rdeg() > opts.deg_r_max || key.zdeg() > opts.deg_z_max) {
      dropped_mass += std::abs(c);
      return;
    }
    auto [it, inserted] = terms_.try_emplace(key, c);
    if (!inserted) {
      it->second += c;
      if (it->second == Cplx(0)) terms_.erase(it);
    }
  }

  void add_term(int mode, std::initializer_list<int> rexp_list,
                std::initializer_list<int> slot_list, Cplx c) {
    std::array<int, 4> re{}, sl{};
    int j = 0;
    for (int e : rexp_list) re[j++] = e;
    int ns = 0;
    for (int s : slot_list) sl[ns++] = s;
    add_term(MonoKey::make(mode, re, sl, ns), c);
  }

  PolyHamiltonian& operator+=(const PolyHamiltonian& o) {
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    dropped_mass += o.dropped_mass;
    return *this;
  }
  PolyHamiltonian& operator*=(Cplx a) {
    for (auto& [k, c] : terms_) c *= a;
    return *this;
  }

  Real max_abs_coeff() const {
    Real m = 0;
    for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }
  Real l1_mass() const {
    Real m = 0;
    for (const auto& [k, c] : terms_) m += std::abs(c);
    return m;
  }

  // exact jet: the weight ≤ 2 terms
  Jet jet() const {
    Jet out(modes, lattice, n, conv);
    for (const auto& [k, c] : terms_) {
      if (k.weight() > 2) continue;
      const int zd = k.zdeg();
      if (zd == 0 && k.rdeg() == 0) {
        out.f0.c[k.mode()] += c;
      } else if (zd == 0) {  // r-linear
        for (int j = 0; j < n; ++j)
          if (k.rexp(j) == 1) out.fr.c[k.mode()][j] += c;
      } else if (zd == 1) {
        out.fz.c[k.mode()][k.slot(0)] += c;
      } else {  // zd == 2
        const int u = k.slot(0), v = k.slot(1);
        if (u == v) {
          out.fzz.c[k.mode()](u, u) += 2.0 * c;
        } else {
          out.fzz.c[k.mode()](u, v) += c;
          out.fzz.c[k.mode()](v, u) += c;
        }
      }
    }
    return out;
  }

  static PolyHamiltonian from_jet(const Jet& j, PolyOptions o = {}) {
    PolyHamiltonian out(j.modes, j.lattice, j.n, j.conv, o);
    const int dim = j.lattice->dim();
    for (int m = 0; m < j.modes->count(); ++m) {
      if (j.f0.c[m] != Cplx(0)) out.add_term(m, {}, {}, j.f0.c[m]);
      for (int a = 0; a < j.n; ++a)
        if (j.fr.c[m][a] != Cplx(0)) {
          std::array<int, 4> re{}, sl{};
          re[a] = 1;
          out.add_term(MonoKey::make(m, re, sl, 0), j.fr.c[m][a]);
        }
      for (int u = 0; u < dim; ++u)
        if (j.fz.c[m][u] != Cplx(0)) out.add_term(m, {}, {u}, j.fz.c[m][u]);
      for (int u = 0; u < dim; ++u) {
        if (j.fzz.c[m](u, u) != Cplx(0))
          out.add_term(m, {}, {u, u}, 0.5 * j.fzz.c[m](u, u));
        for (int v = u + 1; v < dim; ++v)
          if (j.fzz.c[m](u, v) != Cplx(0))
            out.add_term(m, {}, {u, v},
                         0.5 * (j.fzz.c[m](u, v) + j.fzz.c[m](v, u)));
      }
    }
    return out;
  }

  // f - f^T: drop the weight ≤ 2 terms (exact)
  PolyHamiltonian minus_jet() const {
    PolyHamiltonian out(modes, lattice, n, conv, opts);
    for (const auto& [k, c] : terms_)
      if (k.weight() > 2) out.terms_.emplace(k, c);
    return out;
  }

  // magnitude re-truncation of the weight ≥ 3 terms down to the budget
  void compact() {
    std::size_t heavy = 0;
    for (const auto& [k, c] : terms_) heavy += (k.weight() > 2);
    if (heavy <= opts.term_budget) return;
    std::vector<std::pair<MonoKey, Cplx>> hi;
    hi.reserve(heavy);
    for (const auto& [k, c] : terms_)
      if (k.weight() > 2) hi.emplace_back(k, c);
    std::nth_element(hi.begin(), hi.begin() + opts.term_budget, hi.end(),
                     [](const auto& x, const auto& y) {
                       const Real ax = std::abs(x.second), ay = std::abs(y.second);
                       return ax != ay ? ax > ay : x.first < y.first;
                     });
    for (std::size_t i = opts.term_budget; i < hi.size(); ++i) {
      dropped_mass += std::abs(hi[i].second);
      terms_.erase(hi[i].first);
    }
  }

  // ---- point evaluation -----------------------------------------------
  struct FullData {
    Cplx value{0, 0};
    VecC grad_r, grad_z;
    MatC hess_zz, hess_rz;
    MatC hess_rr;
  };

  Cplx eval(const VecC& theta, const VecC& r, const VecC& z) const {
    Cplx acc = 0;
    for (const auto& [k, c] : terms_) acc += c * mono_value(k, theta, r, z);
    return acc;
  }

  FullData eval_full(const VecC& theta, const VecC& r, const VecC& z) const {
    FullData d;
    const int dim = lattice->dim();
    d.grad_r = VecC::Zero(n);
    d.grad_z = VecC::Zero(dim);
    d.hess_zz = MatC::Zero(dim, dim);
    d.hess_rz = MatC::Zero(n, dim);
    d.hess_rr = MatC::Zero(n, n);
    for (const auto& [k, c] : terms_) {
      const Cplx ph = c * phase(k, theta);
      // r factors and z factors with removal products
      std::array<int, 4> sl{-1, -1, -1, -1};
      int ns = 0;
      for (int j = 0; j < 4; ++j)
        if (k.slot(j) >= 0) sl[ns++] = k.slot(j);
      Cplx rprod = 1.0;
      for (int a = 0; a < n; ++a)
        for (int e = 0; e < k.rexp(a); ++e) rprod *= r[a];
      Cplx zprod = 1.0;
      for (int j = 0; j < ns; ++j) zprod *= z[sl[j]];
      d.value += ph * rprod * zprod;
      // z-gradient / z-hessian
      for (int j = 0; j < ns; ++j) {
        Cplx pj = 1.0;
        for (int l = 0; l < ns; ++l)
          if (l != j) pj *= z[sl[l]];
        d.grad_z[sl[j]] += ph * rprod * pj;
        for (int l = j + 1; l < ns; ++l) {
          Cplx pjl = 1.0;
          for (int q = 0; q < ns; ++q)
            if (q != j && q != l) pjl *= z[sl[q]];
          d.hess_zz(sl[j], sl[l]) += ph * rprod * pjl;
          d.hess_zz(sl[l], sl[j]) += ph * rprod * pjl;
        }
      }
      // r-gradient / mixed / r-hessian
      for (int a = 0; a < n; ++a) {
        const int ea = k.rexp(a);
        if (ea == 0) continue;
        Cplx ra = Real(ea);
        for (int b2 = 0; b2 < n; ++b2) {
          int e = k.rexp(b2) - (b2 == a ? 1 : 0);
          for (int q = 0; q < e; ++q) ra *= r[b2];
        }
        d.grad_r[a] += ph * ra * zprod;
        for (int j = 0; j < ns; ++j) {
          Cplx pj = 1.0;
          for (int l = 0; l < ns; ++l)
            if (l != j) pj *= z[sl[l]];
          d.hess_rz(a, sl[j]) += ph * ra * pj;
        }
        for (int b2 = 0; b2 < n; ++b2) {
          int eb = k.rexp(b2) - (b2 == a ? 1 : 0);
          if (eb <= 0) continue;
          Cplx rab = Real(ea) * Real(eb);
          for (int q2 = 0; q2 < n; ++q2) {
            int e = k.rexp(q2) - (q2 == a ? 1 : 0) - (q2 == b2 ? 1 : 0);
            for (int q = 0; q < e; ++q) rab *= r[q2];
          }
          d.hess_rr(a, b2) += ph * rab * zprod;
        }
      }
    }
    return d;
  }

  Cplx phase(const MonoKey& k, const VecC& theta) const {
    Cplx e = 0;
    const auto& kk = modes->k(k.mode());
    for (int a = 0; a < modes->n(); ++a) e += Real(kk[a]) * theta[a];
    return std::exp(kI * e);
  }

  Cplx mono_value(const MonoKey& k, const VecC& theta, const VecC& r,
                  const VecC& z) const {
    Cplx v = phase(k, theta);
    for (int a = 0; a < n; ++a)
      for (int e = 0; e < k.rexp(a); ++e) v *= r[a];
    for (int j = 0; j < 4; ++j)
      if (k.slot(j) >= 0) v *= z[k.slot(j)];
    return v;
  }

  // coordinate changes: per-slot linear substitution with 2 targets
  PolyHamiltonian convert(Convention target) const {
    if (target == conv) return *this;
    PolyHamiltonian out(modes, lattice, n, target, opts);
    out.dropped_mass = dropped_mass;
    const Real is2 = 1.0 / std::sqrt(2.0);
    for (const auto& [k, c] : terms_) {
      std::array<int, 4> sl{};
      int ns = 0;
      for (int j = 0; j < 4; ++j)
        if (k.slot(j) >= 0) sl[ns++] = k.slot(j);
      // expand the product over slots
      std::vector<std::pair<std::array<int, 4>, Cplx>> acc{{{}, c}};
      for (int j = 0; j < ns; ++j) {
        const int site2 = sl[j] & ~1;
        const int comp = sl[j] & 1;
        // real->complex: p=(ξ+η)/√2, q=-i(ξ-η)/√2
        // complex->real: ξ=(p+iq)/√2, η=(p-iq)/√2
        Cplx c0, c1;
        if (target == Convention::Complex) {
          c0 = comp == 0 ? is2 : -kI * is2;
          c1 = comp == 0 ? is2 : kI * is2;
        } else {
          c0 = is2;
          c1 = comp == 0 ? kI * is2 : -kI * is2;
        }
        std::vector<std::pair<std::array<int, 4>, Cplx>> next;
        next.reserve(acc.size() * 2);
        for (auto& [slots, coeff] : acc) {
          auto s0 = slots; s0[j] = site2;
          next.emplace_back(s0, coeff * c0);
          auto s1 = slots; s1[j] = site2 + 1;
          next.emplace_back(s1, coeff * c1);
        }
        acc = std::move(next);
      }
      std::array<int, 4> re{};
      for (int a = 0; a < 4; ++a) re[a] = k.rexp(a);
      for (auto& [slots, coeff] : acc)
        out.add_term(MonoKey::make(k.mode(), re, slots, ns), coeff);
    }
    return out;
  }

  friend PolyHamiltonian poisson_bracket(const PolyHamiltonian& F,
                                         const PolyHamiltonian& G);

 private:
  std::unordered_map<MonoKey, Cplx, MonoKeyHash> terms_;
};

namespace detail {

struct DerivTerm {
  MonoKey key;  // with the differentiated factor removed
  Cplx coeff;   // includes multiplicity / ik factors
};

inline MonoKey reduce_r(const MonoKey& k, int axis) {
  std::array<int, 4> re{}, sl{};
  for (int a = 0; a < 4; ++a) re[a] = k.rexp(a);
  re[axis] -= 1;
  int ns = 0;
  for (int j = 0; j < 4; ++j)
    if (k.slot(j) >= 0) sl[ns++] = k.slot(j);
  return MonoKey::make(k.mode(), re, sl, ns);
}

inline MonoKey reduce_slot(const MonoKey& k, int slot) {
  std::array<int, 4> re{}, sl{};
  for (int a = 0; a < 4; ++a) re[a] = k.rexp(a);
  int ns = 0;
  bool removed = false;
  for (int j = 0; j < 4; ++j) {
    const int s = k.slot(j);
    if (s < 0) continue;
    if (!removed && s == slot) {
      removed = true;
      continue;
    }
    sl[ns++] = s;
  }
  return MonoKey::make(k.mode(), re, sl, ns);
}

inline void sort_terms(std::vector<DerivTerm>& v) {
  std::sort(v.begin(), v.end(), [](const DerivTerm& x, const DerivTerm& y) {
    const Real ax = std::abs(x.coeff), ay = std::abs(y.coeff);
    return ax != ay ? ax > ay : x.key < y.key;
  });
}

}  // namespace detail

// {F,G} = ∇_r F·∇_θ G − ∇_θ F·∇_r G + symplectic ζ-pairing.
// Pairwise products below the relative cutoff are skipped with their l1
// mass bounded into dropped_mass; the result is compacted to the budget.
inline PolyHamiltonian poisson_bracket(const PolyHamiltonian& F,
                                       const PolyHamiltonian& G) {
  if (F.conv != G.conv) throw DimensionError("poisson_bracket: convention mismatch");
  PolyHamiltonian out(F.modes, F.lattice, F.n, F.conv, F.opts);
  const auto& modes = *F.modes;

  auto multiply_into = [&](const MonoKey& ka, const MonoKey& kb, Cplx c) {
    const int m = modes.index_sum(ka.mode(), kb.mode());
    if (m < 0) {
      out.dropped_mass += std::abs(c);
      return;
    }
    std::array<int, 4> re{}, sl{};
    for (int a = 0; a < 4; ++a) re[a] = ka.rexp(a) + kb.rexp(a);
    int ns = 0;
    for (int j = 0; j < 4; ++j)
      if (ka.slot(j) >= 0) {
        if (ns == 4) { out.dropped_mass += std::abs(c); return; }
        sl[ns++] = ka.slot(j);
      }
    for (int j = 0; j < 4; ++j)
      if (kb.slot(j) >= 0) {
        if (ns == 4) { out.dropped_mass += std::abs(c); return; }
        sl[ns++] = kb.slot(j);
      }
    out.add_term(MonoKey::make(m, re, sl, ns), c);
  };

  // pruned list-product: lists sorted by |coeff| descending, with suffix sums
  auto product_lists = [&](const std::vector<detail::DerivTerm>& A,
                           const std::vector<detail::DerivTerm>& B, Cplx sign) {
    if (A.empty() || B.empty()) return;
    Real maxB = std::abs(B.front().coeff);
    std::vector<Real> suffix(B.size() + 1, 0.0);
    for (int i = static_cast<int>(B.size()) - 1; i >= 0; --i)
      suffix[i] = suffix[i + 1] + std::abs(B[i].coeff);
    Real maxA = 0;
    for (const auto& t : A) maxA = std::max(maxA, std::abs(t.coeff));
    const Real cutoff = F.opts.prune_rel * maxA * maxB;
    for (const auto& ta : A) {
      const Real am = std::abs(ta.coeff);
      std::size_t i = 0;
      for (; i < B.size(); ++i) {
        if (am * std::abs(B[i].coeff) < cutoff) break;
        multiply_into(ta.key, B[i].key, sign * ta.coeff * B[i].coeff);
      }
      if (i < B.size()) out.dropped_mass += am * suffix[i];
    }
  };

  // θ/r part
  for (int axis = 0; axis < F.n; ++axis) {
    std::vector<detail::DerivTerm> Fr, Gt, Ft, Gr;
    for (const auto& [k, c] : F.terms()) {
      if (k.rexp(axis) > 0)
        Fr.push_back({detail::reduce_r(k, axis), c * Real(k.rexp(axis))});
      const int kk = modes.k(k.mode())[axis];
      if (kk != 0) Ft.push_back({k, c * (kI * Real(kk))});
    }
    for (const auto& [k, c] : G.terms()) {
      if (k.rexp(axis) > 0)
        Gr.push_back({detail::reduce_r(k, axis), c * Real(k.rexp(axis))});
      const int kk = modes.k(k.mode())[axis];
      if (kk != 0) Gt.push_back({k, c * (kI * Real(kk))});
    }
    detail::sort_terms(Fr); detail::sort_terms(Gt);
    detail::sort_terms(Ft); detail::sort_terms(Gr);
    product_lists(Fr, Gt, Cplx(1));
    product_lists(Ft, Gr, Cplx(-1));
  }

  // ζ-pairing: real (p,q): Σ_s ∂_q F ∂_p G − ∂_p F ∂_q G
  //            complex (ξ,η): i Σ_s (∂_ξ F ∂_η G − ∂_η F ∂_ξ G)
  const int dim = F.lattice->dim();
  std::vector<std::vector<detail::DerivTerm>> Gslot(dim);
  for (const auto& [k, c] : G.terms()) {
    int seen[4] = {-1, -1, -1, -1};
    for (int j = 0; j < 4; ++j) {
      const int s = k.slot(j);
      if (s < 0) continue;
      bool dup = false;
      for (int q = 0; q < j; ++q) dup = dup || (seen[q] == s);
      seen[j] = s;
      if (dup) continue;
      int mult = 0;
      for (int q = 0; q < 4; ++q) mult += (k.slot(q) == s);
      Gslot[s].push_back({detail::reduce_slot(k, s), c * Real(mult)});
    }
  }
  for (auto& v : Gslot) detail::sort_terms(v);

  std::vector<std::vector<detail::DerivTerm>> Fslot(dim);
  for (const auto& [k, c] : F.terms()) {
    int seen[4] = {-1, -1, -1, -1};
    for (int j = 0; j < 4; ++j) {
      const int s = k.slot(j);
      if (s < 0) continue;
      bool dup = false;
      for (int q = 0; q < j; ++q) dup = dup || (seen[q] == s);
      seen[j] = s;
      if (dup) continue;
      int mult = 0;
      for (int q = 0; q < 4; ++q) mult += (k.slot(q) == s);
      Fslot[s].push_back({detail::reduce_slot(k, s), c * Real(mult)});
    }
  }
  for (auto& v : Fslot) detail::sort_terms(v);

  for (int site = 0; site < F.lattice->n_sites(); ++site) {
    const int u0 = 2 * site, u1 = 2 * site + 1;
    if (F.conv == Convention::Real) {
      product_lists(Fslot[u1], Gslot[u0], Cplx(1));   // ∂_q F ∂_p G
      product_lists(Fslot[u0], Gslot[u1], Cplx(-1));  // -∂_p F ∂_q G
    } else {
      product_lists(Fslot[u0], Gslot[u1], kI);        // +i ∂_ξ F ∂_η G
      product_lists(Fslot[u1], Gslot[u0], -kI);       // -i ∂_η F ∂_ξ G
    }
  }

  out.compact();
  return out;
}

// sampled ⟦·⟧ norm of a full polynomial (same plan as for jets)
inline Real jet_norm(const PolyHamiltonian& f, const NormSamples& plan,
                     bool beta_plus = false) {
  return sampled_jet_norm(
      *f.lattice, plan,
      [&](const NormSamples::Point& p) {
        auto d = f.eval_full(p.theta, p.r, p.z);
        JetData jd;
        jd.value = d.value;
        jd.grad_z = d.grad_z;
        jd.hess_z = d.hess_zz;
        return jd;
      },
      beta_plus);
}

}  // namespace kamwave
