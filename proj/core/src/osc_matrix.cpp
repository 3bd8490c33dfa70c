#include "uaosc/osc_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "uaosc/osc_quadrature.hpp"

namespace uaosc {

OscMatrix OscMatrix::constant(double omega, const MatX& m) {
  OscMatrix out;
  out.omega = omega;
  out.rows = int(m.rows());
  out.cols = int(m.cols());
  out.modes[0] = m.cast<cplx>();
  return out;
}

MatX OscMatrix::evaluate(double t) const {
  MatX out = MatX::Zero(rows, cols);
  for (const auto& [k, m] : modes) {
    const cplx ph = std::polar(1.0, k * omega * t);
    out += (m * ph).real();
  }
  return out;
}

double OscMatrix::imag_norm(double t) const {
  MatX im = MatX::Zero(rows, cols);
  for (const auto& [k, m] : modes) im += (m * std::polar(1.0, k * omega * t)).imag();
  return im.norm();
}

OscMatrix& OscMatrix::operator+=(const OscMatrix& o) {
  if (modes.empty()) {
    rows = o.rows;
    cols = o.cols;
    omega = o.omega;
  }
  for (const auto& [k, m] : o.modes) {
    auto it = modes.find(k);
    if (it == modes.end())
      modes.emplace(k, m);
    else
      it->second += m;
  }
  return *this;
}

OscMatrix OscMatrix::scaled(cplx s) const {
  OscMatrix out = *this;
  for (auto& [k, m] : out.modes) m *= s;
  return out;
}

namespace {

struct TupleIntegrals {
  double omega;
  double dt;
  std::map<std::vector<int>, cplx> memo;

  cplx get(const std::vector<int>& ks) {
    auto it = memo.find(ks);
    if (it != memo.end()) return it->second;
    std::vector<OscPoly> seq;
    seq.reserve(ks.size());
    for (int k : ks) seq.push_back(OscPoly::term(omega, 1.0, 0, k));
    const cplx v = nested_integral(seq, 0.0, dt);
    memo.emplace(ks, v);
    return v;
  }
};

void accumulate(std::span<const OscMatrix> seq, std::size_t level, std::vector<int>& ks, const MatXc& prefix,
                Ordering order, TupleIntegrals& ti, OscMatrix& out) {
  if (level == seq.size()) {
    std::vector<int> key = ks;
    if (order == Ordering::backward) std::reverse(key.begin(), key.end());
    const cplx w = ti.get(key);
    int K = 0;
    for (int k : ks) K += k;
    auto it = out.modes.find(K);
    if (it == out.modes.end())
      out.modes.emplace(K, prefix * w);
    else
      it->second += prefix * w;
    return;
  }
  for (const auto& [k, m] : seq[level].modes) {
    ks.push_back(k);
    accumulate(seq, level + 1, ks, prefix * m, order, ti, out);
    ks.pop_back();
  }
}

}  // namespace

OscMatrix nested_modes(std::span<const OscMatrix> seq, double dt, Ordering order) {
  if (seq.empty()) throw InvalidArgument("nested_modes needs at least one factor");
  const double omega = seq.front().omega;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (seq[i].cols && seq[i - 1].cols != seq[i].rows) throw InvalidArgument("nested_modes: shape mismatch");
  }
  OscMatrix out;
  out.omega = omega;
  out.rows = seq.front().rows;
  out.cols = seq.back().cols;
  TupleIntegrals ti{omega, dt, {}};
  std::vector<int> ks;
  accumulate(seq, 0, ks, MatXc::Identity(out.rows, out.rows), order, ti, out);
  return out;
}

}  // namespace uaosc
