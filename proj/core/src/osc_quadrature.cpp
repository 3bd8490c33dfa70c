#include "uaosc/osc_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uaosc {

namespace {

constexpr double kPruneRel = 1e-15;

bool is_conj_symmetric(const std::map<int, cplx>& c) {
  double scale = 0.0;
  for (const auto& [k, v] : c) scale = std::max(scale, std::abs(v));
  for (const auto& [k, v] : c) {
    auto it = c.find(-k);
    cplx partner = it == c.end() ? cplx{} : it->second;
    if (std::abs(partner - std::conj(v)) > 1e-13 * std::max(scale, 1e-300)) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------- profile

PeriodicProfile::PeriodicProfile(double period, std::map<int, cplx> coeffs) : period_(period) {
  if (!(period > 0.0)) throw InvalidArgument("profile period must be positive");
  if (!is_conj_symmetric(coeffs)) throw InvalidArgument("profile coefficients must satisfy C_{-k} = conj(C_k)");
  for (auto& [k, v] : coeffs) {
    if (v != cplx{}) coeffs_[k] = v;
  }
  if (auto it = coeffs_.find(0); it != coeffs_.end()) it->second = it->second.real();
}

PeriodicProfile PeriodicProfile::constant(double c, double period) {
  return PeriodicProfile(period, {{0, c}});
}

PeriodicProfile PeriodicProfile::cosine(double amp, double offset) {
  return PeriodicProfile(kTwoPi, {{-1, 0.5 * amp}, {0, offset}, {1, 0.5 * amp}});
}

PeriodicProfile PeriodicProfile::from_function(const std::function<double(double)>& f, double period,
                                               int cutoff, int samples) {
  if (cutoff < 0) throw InvalidArgument("cutoff must be non-negative");
  const int n = samples > 0 ? samples : std::max(64, 8 * cutoff + 8);
  if (n < 2 * cutoff + 1) throw InvalidArgument("too few samples for the requested cutoff");
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) vals[i] = f(period * i / n);
  std::map<int, cplx> c;
  for (int k = 0; k <= cutoff; ++k) {
    cplx acc{};
    for (int i = 0; i < n; ++i) acc += vals[i] * std::polar(1.0, -kTwoPi * k * i / n);
    acc /= double(n);
    if (k == 0) {
      c[0] = acc.real();
    } else {
      c[k] = acc;
      c[-k] = std::conj(acc);
    }
  }
  return PeriodicProfile(period, std::move(c));
}

PeriodicProfile PeriodicProfile::from_id(std::string_view id) {
  if (id == "cos") return cosine(1.0, 0.0);
  if (id == "1+cos") return cosine(1.0, 1.0);
  if (id == "2+0.5cos2") return PeriodicProfile(kTwoPi, {{-2, 0.125}, {0, 2.25}, {2, 0.125}});
  if (id == "zero") return PeriodicProfile(kTwoPi, {});
  if (id == "one") return constant(1.0);
  throw InvalidArgument("unknown profile id: " + std::string(id));
}

int PeriodicProfile::cutoff() const {
  int K = 0;
  for (const auto& [k, v] : coeffs_) K = std::max(K, std::abs(k));
  return K;
}

cplx PeriodicProfile::coeff(int k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? cplx{} : it->second;
}

double PeriodicProfile::operator()(double s) const {
  double acc = 0.0;
  for (const auto& [k, v] : coeffs_) {
    if (k < 0) continue;
    const double ph = kTwoPi * k * s / period_;
    const double re = v.real() * std::cos(ph) - v.imag() * std::sin(ph);
    acc += (k == 0) ? v.real() : 2.0 * re;
  }
  return acc;
}

PeriodicProfile PeriodicProfile::scaled(double factor) const {
  std::map<int, cplx> c;
  for (const auto& [k, v] : coeffs_) c[k] = v * factor;
  return PeriodicProfile(period_, std::move(c));
}

PeriodicProfile PeriodicProfile::power(int m) const {
  if (m < 0) throw InvalidArgument("negative profile power");
  std::map<int, cplx> acc{{0, 1.0}};
  for (int i = 0; i < m; ++i) {
    std::map<int, cplx> next;
    for (const auto& [ka, va] : acc)
      for (const auto& [kb, vb] : coeffs_) next[ka + kb] += va * vb;
    acc.clear();
    for (const auto& [k, v] : next)
      if (v != cplx{}) acc[k] = v;
  }
  // Restore exact conjugate symmetry lost to rounding.
  for (auto& [k, v] : acc) {
    if (k > 0) {
      auto it = acc.find(-k);
      const cplx avg = 0.5 * (v + (it == acc.end() ? cplx{} : std::conj(it->second)));
      v = avg;
      acc[-k] = std::conj(avg);
    }
  }
  return PeriodicProfile(period_, std::move(acc));
}

double power_average(const PeriodicProfile& profile, int m) {
  if (m < 1) throw InvalidArgument("power_average requires m >= 1");
  return profile.power(m).coeff(0).real();
}

// ---------------------------------------------------------------- OscPoly

OscPoly OscPoly::constant(double omega, cplx c) {
  OscPoly p(omega);
  p.add_term(c, 0, 0);
  return p;
}

OscPoly OscPoly::term(double omega, cplx c, int degree, int mode) {
  OscPoly p(omega);
  p.add_term(c, degree, mode);
  return p;
}

std::vector<OscTerm> OscPoly::terms() const {
  std::vector<OscTerm> out;
  out.reserve(terms_.size());
  for (const auto& [key, c] : terms_) out.push_back({c, key.first, key.second});
  return out;
}

int OscPoly::max_degree() const {
  int d = 0;
  for (const auto& [key, c] : terms_) d = std::max(d, key.first);
  return d;
}

int OscPoly::max_abs_mode() const {
  int k = 0;
  for (const auto& [key, c] : terms_) k = std::max(k, std::abs(key.second));
  return k;
}

cplx OscPoly::coeff(int degree, int mode) const {
  auto it = terms_.find({degree, mode});
  return it == terms_.end() ? cplx{} : it->second;
}

cplx OscPoly::operator()(double t) const {
  cplx acc{};
  for (const auto& [key, c] : terms_) {
    acc += c * std::pow(t, key.first) * std::polar(1.0, key.second * omega_ * t);
  }
  return acc;
}

OscPoly& OscPoly::add_term(cplx c, int degree, int mode) {
  if (degree < 0) throw InvalidArgument("negative polynomial degree");
  if (c != cplx{}) terms_[{degree, mode}] += c;
  return *this;
}

OscPoly& OscPoly::operator+=(const OscPoly& o) {
  for (const auto& [key, c] : o.terms_) terms_[key] += c;
  canonicalize();
  return *this;
}

OscPoly& OscPoly::operator-=(const OscPoly& o) {
  for (const auto& [key, c] : o.terms_) terms_[key] -= c;
  canonicalize();
  return *this;
}

OscPoly& OscPoly::operator*=(cplx s) {
  for (auto& [key, c] : terms_) c *= s;
  canonicalize();
  return *this;
}

OscPoly operator*(const OscPoly& a, const OscPoly& b) {
  OscPoly out(a.omega_);
  for (const auto& [ka, ca] : a.terms_)
    for (const auto& [kb, cb] : b.terms_) out.terms_[{ka.first + kb.first, ka.second + kb.second}] += ca * cb;
  out.canonicalize();
  return out;
}

void OscPoly::canonicalize() {
  double mx = 0.0;
  for (const auto& [key, c] : terms_) mx = std::max(mx, std::abs(c));
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) == 0.0 || std::abs(it->second) < kPruneRel * mx)
      it = terms_.erase(it);
    else
      ++it;
  }
}

OscPoly OscPoly::derivative() const {
  OscPoly out(omega_);
  for (const auto& [key, c] : terms_) {
    const auto [j, k] = key;
    if (j > 0) out.terms_[{j - 1, k}] += c * double(j);
    if (k != 0) out.terms_[{j, k}] += c * cplx(0.0, k * omega_);
  }
  out.canonicalize();
  return out;
}

OscPoly OscPoly::shifted(double t0) const {
  OscPoly out(omega_);
  for (const auto& [key, c] : terms_) {
    const auto [j, k] = key;
    const cplx base = c * std::polar(1.0, k * omega_ * t0);
    double binom = 1.0;  // C(j, l)
    for (int l = 0; l <= j; ++l) {
      if (l > 0) binom = binom * (j - l + 1) / l;
      out.terms_[{l, k}] += base * binom * std::pow(t0, j - l);
    }
  }
  out.canonicalize();
  return out;
}

OscPoly OscPoly::rescaled(double h) const {
  OscPoly out(omega_ * h);
  for (const auto& [key, c] : terms_) out.terms_[key] = c * std::pow(h, key.first);
  out.canonicalize();
  return out;
}

OscPoly antiderivative(const OscPoly& p) {
  OscPoly out(p.omega());
  for (const auto& t : p.terms()) {
    if (t.mode == 0) {
      out.add_term(t.coeff / double(t.degree + 1), t.degree + 1, 0);
      continue;
    }
    // int t^j e^{iWt} = e^{iWt} sum_m (-1)^m j!/(j-m)! t^{j-m} / (iW)^{m+1}
    const cplx iw(0.0, t.mode * p.omega());
    cplx factor = t.coeff / iw;
    for (int m = 0; m <= t.degree; ++m) {
      out.add_term(factor, t.degree - m, t.mode);
      factor *= -double(t.degree - m) / iw;
    }
  }
  out.canonicalize();
  return out;
}

cplx definite_integral(const OscPoly& p, double a, double b) {
  if (b < a) throw InvalidArgument("definite_integral requires a <= b");
  if (b == a) return {};
  std::vector<OscPoly> one{p};
  return nested_integral(one, a, b - a);
}

// ---------------------------------------------------------------- nested integrals

namespace {

using Table = std::vector<std::vector<cplx>>;  // T[i][j]: contiguous run seq[i..j)

constexpr double kTaylorPhase = 2.0;  // total phase excursion handled by series expansion
constexpr int kTaylorExtra = 44;

using Dense = std::vector<cplx>;

Dense to_dense(const OscPoly& q, int cap) {
  Dense out(cap + 1, cplx{});
  for (const auto& t : q.terms()) {
    const double w = t.mode * q.omega();
    cplx c = t.coeff;
    for (int n = 0; t.degree + n <= cap; ++n) {
      out[t.degree + n] += c;
      c *= cplx(0.0, w) / double(n + 1);
      if (std::abs(c) < 1e-300) break;
    }
  }
  return out;
}

Dense mul_trunc(const Dense& a, const Dense& b, int cap) {
  Dense out(cap + 1, cplx{});
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == cplx{}) continue;
    for (std::size_t j = 0; j < b.size() && i + j <= std::size_t(cap); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// Integral from 0, truncated to `cap`.
Dense integrate0(const Dense& a, int cap) {
  Dense out(cap + 1, cplx{});
  for (std::size_t i = 0; i + 1 <= std::size_t(cap) && i < a.size(); ++i) out[i + 1] = a[i] / double(i + 1);
  return out;
}

cplx sum_coeffs(const Dense& a) {
  cplx s{};
  for (auto it = a.rbegin(); it != a.rend(); ++it) s += *it;
  return s;
}

Table make_table(std::size_t n) {
  Table t(n + 1, std::vector<cplx>(n + 1, cplx{}));
  for (std::size_t i = 0; i <= n; ++i) t[i][i] = 1.0;
  return t;
}

Table taylor_table(const std::vector<OscPoly>& seq) {
  const std::size_t n = seq.size();
  int deg = 0;
  for (const auto& q : seq) deg += q.max_degree();
  const int cap = deg + int(n) + kTaylorExtra;
  std::vector<Dense> dense;
  dense.reserve(n);
  for (const auto& q : seq) dense.push_back(to_dense(q, cap));
  Table T = make_table(n);
  for (std::size_t j = 1; j <= n; ++j) {
    Dense F{1.0};
    for (std::size_t i = j; i-- > 0;) {
      F = integrate0(mul_trunc(dense[i], F, cap), cap);
      T[i][j] = sum_coeffs(F);
    }
  }
  return T;
}

OscPoly antiderivative_from_zero(const OscPoly& p) {
  OscPoly P = antiderivative(p);
  const cplx at0 = P(0.0);
  P.add_term(-at0, 0, 0);
  P.canonicalize();
  return P;
}

Table byparts_table(const std::vector<OscPoly>& seq) {
  const std::size_t n = seq.size();
  Table T = make_table(n);
  const double omega = seq.front().omega();
  for (std::size_t j = 1; j <= n; ++j) {
    OscPoly F = OscPoly::constant(omega, 1.0);
    for (std::size_t i = j; i-- > 0;) {
      F = antiderivative_from_zero(seq[i] * F);
      T[i][j] = F(1.0);
    }
  }
  return T;
}

// seq is expressed on [0,1]; returns the table for the sub-interval [a, a+h].
Table nested_table(const std::vector<OscPoly>& seq, double a, double h, int depth) {
  const std::size_t n = seq.size();
  std::vector<OscPoly> local;
  local.reserve(n);
  for (const auto& q : seq) local.push_back(q.shifted(a).rescaled(h));

  const double w = std::abs(local.front().omega());
  int sum_k = 0;
  int J = int(n);
  for (const auto& q : local) {
    sum_k += q.max_abs_mode();
    J += q.max_degree();
  }

  Table T;
  if (w * sum_k <= kTaylorPhase) {
    T = taylor_table(local);
  } else if (w >= 2.0 * (J + 1) || depth > 40) {
    T = byparts_table(local);
  } else {
    const Table L = nested_table(seq, a, 0.5 * h, depth + 1);
    const Table R = nested_table(seq, a + 0.5 * h, 0.5 * h, depth + 1);
    T = make_table(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j <= n; ++j) {
        cplx acc{};
        for (std::size_t m = i; m <= j; ++m) acc += R[i][m] * L[m][j];
        T[i][j] = acc;
      }
    return T;  // already in the coordinates of `seq`
  }
  // Undo the rescaling: a run of length r picks up h^r.
  for (std::size_t i = 0; i < n; ++i) {
    double hp = 1.0;
    for (std::size_t j = i + 1; j <= n; ++j) {
      hp *= h;
      T[i][j] *= hp;
    }
  }
  return T;
}

}  // namespace

cplx nested_integral(std::span<const OscPoly> seq, double t_n, double dt) {
  if (seq.empty()) throw InvalidArgument("nested_integral needs at least one factor");
  if (!(dt > 0.0)) throw InvalidArgument("nested_integral requires dt > 0");
  std::vector<OscPoly> unit;
  unit.reserve(seq.size());
  const double omega = seq.front().omega();
  for (const auto& p : seq) {
    OscPoly q = p;
    if (q.omega() != omega) {
      if (q.max_abs_mode() != 0) throw InvalidArgument("nested_integral factors must share a frequency");
      q = OscPoly(omega) + p;  // pure polynomial; frequency irrelevant
    }
    unit.push_back(q.shifted(t_n).rescaled(dt));
  }
  const Table T = nested_table(unit, 0.0, 1.0, 0);
  return T[0][seq.size()] * std::pow(dt, double(seq.size()));
}

OscPoly profile_as_oscpoly(const PeriodicProfile& profile, int m, double eps) {
  if (m <= 0) throw InvalidArgument("profile_as_oscpoly requires m >= 1");
  if (!(eps > 0.0)) throw InvalidArgument("epsilon must be positive");
  OscPoly out(OscPoly::omega_for(eps, profile.period()));
  const PeriodicProfile pm = profile.power(m);
  for (const auto& [k, c] : pm.coeffs()) out.add_term(c, 0, k);
  out.canonicalize();
  return out;
}

}  // namespace uaosc
