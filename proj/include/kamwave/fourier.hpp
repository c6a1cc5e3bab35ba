// fourier.hpp
// θ-Fourier series over T^n truncated to |k|_1 ≤ K, with a shared mode table
// and a tensor collocation grid sized so products re-truncated to the cap
// are alias-free (M > 3K per axis). Coefficient types are generic: scalars,
// 2L-vectors, 2L x 2L matrices. Convention: f(θ) = Σ_k c_k e^{i k·θ}.
#pragma once

#include <map>
#include <memory>
#include <vector>

#include "kamwave/core.hpp"

namespace kamwave {

class ThetaModes {
 public:
  ThetaModes(int n, int kmax) : n_(n), kmax_(kmax) {
    std::vector<int> k(n, -kmax);
    enumerate(k, 0);
    neg_.resize(modes_.size());
    for (size_t m = 0; m < modes_.size(); ++m) {
      std::vector<int> nk = modes_[m];
      for (int& x : nk) x = -x;
      neg_[m] = index(nk);
    }
    grid_m_ = 3 * kmax + 2;
    grid_total_ = 1;
    for (int a = 0; a < n; ++a) grid_total_ *= grid_m_;
  }

  int n() const { return n_; }
  int kmax() const { return kmax_; }
  int count() const { return static_cast<int>(modes_.size()); }
  const std::vector<int>& k(int m) const { return modes_[m]; }
  int order1(int m) const {  // |k|_1
    int s = 0;
    for (int x : modes_[m]) s += std::abs(x);
    return s;
  }
  int zero_mode() const { return zero_; }
  int neg(int m) const { return neg_[m]; }

  // -1 if out of the cap
  int index(const std::vector<int>& k) const {
    auto it = lookup_.find(pack(k));
    return it == lookup_.end() ? -1 : it->second;
  }
  int index_sum(int m1, int m2) const {  // mode of the product, -1 if outside
    std::vector<int> k = modes_[m1];
    for (int a = 0; a < n_; ++a) k[a] += modes_[m2][a];
    return index(k);
  }

  int grid_m() const { return grid_m_; }
  int grid_total() const { return grid_total_; }
  VecR grid_point(int g) const {
    VecR th(n_);
    for (int a = 0; a < n_; ++a) {
      th[a] = 2.0 * kPi * (g % grid_m_) / grid_m_;
      g /= grid_m_;
    }
    return th;
  }

  // e^{i k_m · θ_g}
  Cplx phase(int m, int g) const {
    Cplx p = 1.0;
    for (int a = 0; a < n_; ++a) {
      const int ga = g % grid_m_;
      g /= grid_m_;
      p *= twiddle(modes_[m][a] * ga);
    }
    return p;
  }

 private:
  void enumerate(std::vector<int>& k, int pos) {
    if (pos == n_) {
      int o = 0;
      for (int x : k) o += std::abs(x);
      if (o <= kmax_) {
        lookup_[pack(k)] = static_cast<int>(modes_.size());
        if (o == 0) zero_ = static_cast<int>(modes_.size());
        modes_.push_back(k);
      }
      return;
    }
    for (int v = -kmax_; v <= kmax_; ++v) {
      k[pos] = v;
      enumerate(k, pos + 1);
    }
  }
  Cplx twiddle(long phase_units) const {
    long r = phase_units % grid_m_;
    if (r < 0) r += grid_m_;
    ensure_twiddles();
    return tw_[static_cast<size_t>(r)];
  }
  void ensure_twiddles() const {
    if (!tw_.empty()) return;
    tw_.resize(grid_m_);
    for (int r = 0; r < grid_m_; ++r)
      tw_[r] = std::exp(kI * (2.0 * kPi * r / grid_m_));
  }
  static long pack(const std::vector<int>& k) {
    long key = 0;
    for (int x : k) key = key * 4096 + (x + 2048);
    return key;
  }

  int n_, kmax_, zero_ = 0, grid_m_ = 0, grid_total_ = 0;
  std::vector<std::vector<int>> modes_;
  std::vector<int> neg_;
  std::map<long, int> lookup_;
  mutable std::vector<Cplx> tw_;
};

using ModesPtr = std::shared_ptr<const ThetaModes>;

template <typename T>
struct FourierSeries {
  ModesPtr modes;
  std::vector<T> c;

  FourierSeries() = default;
  FourierSeries(ModesPtr m, const T& zero) : modes(std::move(m)) {
    c.assign(modes->count(), zero);
  }

  T& at_mode(int m) { return c[m]; }
  const T& at_mode(int m) const { return c[m]; }
  const T& mean() const { return c[modes->zero_mode()]; }

  // f(θ) for complex θ (used by sampled sup-norms over |Im θ| shifts)
  T eval(const VecC& theta) const {
    T acc = c[0] * phase_at(0, theta);
    for (int m = 1; m < modes->count(); ++m) acc += c[m] * phase_at(m, theta);
    return acc;
  }

  Cplx phase_at(int m, const VecC& theta) const {
    Cplx e = 0;
    const auto& k = modes->k(m);
    for (int a = 0; a < modes->n(); ++a) e += Real(k[a]) * theta[a];
    return std::exp(kI * e);
  }

  FourierSeries<T> deriv(int axis) const {
    FourierSeries<T> d = *this;
    for (int m = 0; m < modes->count(); ++m)
      d.c[m] = c[m] * (kI * Real(modes->k(m)[axis]));
    return d;
  }

  // directional θ-derivative ∇_θ f · w
  FourierSeries<T> deriv_dot(const VecR& w) const {
    FourierSeries<T> d = *this;
    for (int m = 0; m < modes->count(); ++m) {
      Real kw = 0;
      for (int a = 0; a < modes->n(); ++a) kw += modes->k(m)[a] * w[a];
      d.c[m] = c[m] * (kI * kw);
    }
    return d;
  }

  std::vector<T> to_grid() const {
    std::vector<T> vals(modes->grid_total(), c[0] * Cplx(0));
    for (int g = 0; g < modes->grid_total(); ++g) {
      T acc = c[0] * modes->phase(0, g);
      for (int m = 1; m < modes->count(); ++m) acc += c[m] * modes->phase(m, g);
      vals[g] = acc;
    }
    return vals;
  }

  static FourierSeries<T> from_grid(const ModesPtr& modes,
                                    const std::vector<T>& vals, const T& zero) {
    FourierSeries<T> f(modes, zero);
    const Real inv = 1.0 / modes->grid_total();
    for (int m = 0; m < modes->count(); ++m) {
      T acc = zero;
      for (int g = 0; g < modes->grid_total(); ++g)
        acc += vals[g] * std::conj(modes->phase(m, g));
      f.c[m] = acc * inv;
    }
    return f;
  }

  FourierSeries<T>& operator+=(const FourierSeries<T>& o) {
    for (int m = 0; m < modes->count(); ++m) c[m] += o.c[m];
    return *this;
  }
  FourierSeries<T>& operator*=(Cplx a) {
    for (auto& x : c) x = x * a;
    return *this;
  }
};

using ScalarSeries = FourierSeries<Cplx>;
using VecSeries = FourierSeries<VecC>;
using MatSeries = FourierSeries<MatC>;

// coefficient-level reality symmetrization of a scalar series:
// c_k -> (c_k + conj(c_{-k}))/2, i.e. ½(f(θ) + conj(f(conj θ))).
inline ScalarSeries realify(const ScalarSeries& f) {
  ScalarSeries out = f;
  for (int m = 0; m < f.modes->count(); ++m)
    out.c[m] = 0.5 * (f.c[m] + std::conj(f.c[f.modes->neg(m)]));
  return out;
}

// product of scalar series, re-truncated to the cap (exact within it)
inline ScalarSeries product(const ScalarSeries& a, const ScalarSeries& b) {
  ScalarSeries out(a.modes, Cplx(0));
  for (int m1 = 0; m1 < a.modes->count(); ++m1) {
    if (a.c[m1] == Cplx(0)) continue;
    for (int m2 = 0; m2 < b.modes->count(); ++m2) {
      if (b.c[m2] == Cplx(0)) continue;
      const int m = a.modes->index_sum(m1, m2);
      if (m >= 0) out.c[m] += a.c[m1] * b.c[m2];
    }
  }
  return out;
}

// sampled sup over the strip |Im θ|_1 ≤ y using the real grid plus the given
// imaginary shifts (deterministic surrogate for the analytic sup-norm)
template <typename T>
Real strip_sup(const FourierSeries<T>& f, const std::vector<VecR>& im_shifts,
               int real_pts, const std::function<Real(const T&)>& magnitude) {
  Real best = 0;
  const int n = f.modes->n();
  for (int g = 0; g < real_pts; ++g) {
    VecR th(n);
    for (int a = 0; a < n; ++a)
      th[a] = 2.0 * kPi * ((g * 37 + 11 * a) % real_pts) / real_pts;
    for (const auto& y : im_shifts) {
      VecC thc(n);
      for (int a = 0; a < n; ++a) thc[a] = Cplx(th[a], y[a]);
      best = std::max(best, magnitude(f.eval(thc)));
    }
  }
  return best;
}

}  // namespace kamwave
