#include "afdm/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace afdm {

// ------------------------------------------------------------ codewords

CodewordOperator::CodewordOperator(const ImpairedLink& link)
    : n_(link.N()),
      m_(link.M()),
      j_(link.J()),
      p_(link.channel.P),
      rho1_(link.iqi.rho1),
      rho2_(link.iqi.rho2),
      dc_(link.pa.gain * link.dco) {
  const CMatrix& A = link.daft;
  const CMatrix A_h = A.adjoint();
  const CMatrix A_t = A.transpose();
  const double scale = link.linear_scale();
  const auto count = static_cast<std::size_t>(L());
  y1_.resize(count);
  y1c_.resize(count);
  y2_.resize(count);
  for (int j = 0; j < j_; ++j) {
    const CVector rx = link.mult.cfo.segment(j * n_, n_).cwiseProduct(link.mult.phi_r.segment(j * n_, n_));
    for (int m = 0; m < m_; ++m) {
      const CVector tx = link.mult.phi_t.segment(m * n_, n_);
      const auto taps = link.channel.taps_for(j, m);
      for (int p = 0; p < p_; ++p) {
        const auto idx = static_cast<std::size_t>(column(j, m, p));
        CMatrix y2 = A * (rx.asDiagonal() * build_path_matrix(taps[static_cast<std::size_t>(p)], link.channel.params));
        y1_[idx] = scale * (y2 * tx.asDiagonal()) * A_h;
        y1c_[idx] = scale * (y2 * tx.conjugate().asDiagonal()) * A_t;
        y2_[idx] = std::move(y2);
      }
    }
  }
}

CMatrix CodewordOperator::matrix(const CVector& x, const CVector& u) const {
  const Index nm = static_cast<Index>(n_) * m_;
  if (x.size() != nm) throw std::invalid_argument("CodewordOperator::matrix: x must have length N M");
  if (u.size() != 0 && u.size() != nm) throw std::invalid_argument("CodewordOperator::matrix: u must have length N M");
  CMatrix xi = CMatrix::Zero(static_cast<Index>(n_) * j_, L());
  for (int j = 0; j < j_; ++j)
    for (int m = 0; m < m_; ++m) {
      const auto xm = x.segment(m * n_, n_);
      CVector drive = CVector::Constant(n_, dc_);
      if (u.size() != 0) drive += u.segment(m * n_, n_);
      for (int p = 0; p < p_; ++p) {
        const Index c = column(j, m, p);
        const auto idx = static_cast<std::size_t>(c);
        xi.col(c).segment(j * n_, n_) =
            rho1_ * (y1_[idx] * xm) + rho2_ * (y1c_[idx] * xm.conjugate()) + y2_[idx] * drive;
      }
    }
  return xi;
}

CMatrix CodewordOperator::difference(const CVector& e) const {
  const Index nm = static_cast<Index>(n_) * m_;
  if (e.size() != nm) throw std::invalid_argument("CodewordOperator::difference: e must have length N M");
  CMatrix xi = CMatrix::Zero(static_cast<Index>(n_) * j_, L());
  for (Index c = 0; c < nm; ++c) {
    if (e(c) == cd(0.0, 0.0)) continue;
    const int m = static_cast<int>(c / n_);
    const Index n = c % n_;
    const cd a = rho1_ * e(c);
    const cd b = rho2_ * std::conj(e(c));
    for (int j = 0; j < j_; ++j)
      for (int p = 0; p < p_; ++p) {
        const Index col = column(j, m, p);
        const auto idx = static_cast<std::size_t>(col);
        auto target = xi.col(col).segment(j * n_, n_);
        target += a * y1_[idx].col(n);
        if (b != cd(0.0, 0.0)) target += b * y1c_[idx].col(n);
      }
  }
  return xi;
}

CMatrix CodewordOperator::omega(const CVector& e) const {
  const CMatrix xi = difference(e);
  const Index mp = static_cast<Index>(m_) * p_;
  CMatrix om = CMatrix::Zero(L(), L());
  for (int j = 0; j < j_; ++j) {
    const auto block = xi.block(j * n_, j * mp, n_, mp);
    om.block(j * mp, j * mp, mp, mp).noalias() = block.adjoint() * block;
  }
  return om;
}

// ------------------------------------------------------------------ PEP

PepContext PepContext::iid(int P, Index L, double sigma2, double sigma_h2) {
  if (P < 1 || L < 1) throw std::invalid_argument("PepContext::iid: P and L must be positive");
  PepContext ctx;
  ctx.gamma = CMatrix::Identity(L, L) / static_cast<double>(P);
  ctx.sigma2 = sigma2;
  ctx.sigma_h2 = sigma_h2;
  return ctx;
}

RVector pep_eigenvalues(const CMatrix& gamma, const CMatrix& omega) {
  if (gamma.rows() != omega.rows() || gamma.cols() != omega.cols())
    throw std::invalid_argument("pep_eigenvalues: Gamma and Omega sizes differ");
  Eigen::SelfAdjointEigenSolver<CMatrix> g(gamma);
  const CMatrix root = g.operatorSqrt();
  const CMatrix k = root * omega * root;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (k + k.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseMax(0.0);
}

double upep_from_eigenvalues(const RVector& mu, double a, double b) {
  double da = 1.0;
  double db = 1.0;
  for (Index i = 0; i < mu.size(); ++i) {
    da *= 1.0 + a * mu(i);
    db *= 1.0 + b * mu(i);
  }
  return 1.0 / (12.0 * da) + 1.0 / (4.0 * db);
}

double upep(const CMatrix& omega, const PepContext& ctx) {
  return upep_from_eigenvalues(pep_eigenvalues(ctx.gamma, omega), ctx.gamma1(), ctx.gamma2());
}

double upep_imperfect_csi(const CMatrix& omega, const PepContext& ctx) {
  const CMatrix gamma = ctx.gamma + ctx.sigma_h2 * CMatrix::Identity(ctx.gamma.rows(), ctx.gamma.cols());
  return upep_from_eigenvalues(pep_eigenvalues(gamma, omega), ctx.kappa1(), ctx.kappa2());
}

double upep(const CVector& xc, const CVector& xe, const PepContext& ctx, const CodewordOperator& codewords) {
  return upep(codewords.omega(xc - xe), ctx);
}

double upep_imperfect_csi(const CVector& xc, const CVector& xe, const PepContext& ctx,
                          const CodewordOperator& codewords) {
  return upep_imperfect_csi(codewords.omega(xc - xe), ctx);
}

// ---------------------------------------------------------- union bound

namespace {

// Scalar multiple of the identity, or nullopt.
std::optional<double> scalar_identity(const CMatrix& g) {
  if (g.rows() != g.cols() || g.rows() == 0) return std::nullopt;
  const cd d = g(0, 0);
  const CMatrix diff = g - d * CMatrix::Identity(g.rows(), g.cols());
  if (diff.cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, std::abs(d)) || std::abs(d.imag()) > 0.0) return std::nullopt;
  return d.real();
}

std::vector<int> labels_from_bits(std::uint64_t word, int total_bits, int bps, Index symbols) {
  std::vector<int> labels(static_cast<std::size_t>(symbols));
  const std::uint64_t mask = (std::uint64_t{1} << bps) - 1;
  for (Index c = 0; c < symbols; ++c) {
    const int shift = total_bits - static_cast<int>(c + 1) * bps;
    labels[static_cast<std::size_t>(c)] = static_cast<int>((word >> shift) & mask);
  }
  return labels;
}

}  // namespace

UnionBoundResult aber_union_bound(const CodewordOperator& codewords, const Constellation& constellation,
                                  const CMatrix& gamma, const std::vector<double>& sigma2_grid, double sigma_h2,
                                  const UnionBoundOptions& options, Rng& rng) {
  const Index nm = static_cast<Index>(codewords.N()) * codewords.M();
  const int bps = constellation.bits_per_symbol();
  const int lb = static_cast<int>(nm) * bps;
  if (gamma.rows() != codewords.L() || gamma.cols() != codewords.L())
    throw std::invalid_argument("aber_union_bound: Gamma must be L x L");
  if (sigma_h2 < 0.0) throw std::invalid_argument("aber_union_bound: negative sigma_h2");
  for (double s : sigma2_grid)
    if (!(s > 0.0)) throw std::invalid_argument("aber_union_bound: noise variances must be positive");
  if (lb > 63) throw std::invalid_argument("aber_union_bound: bit-vector length above 63");

  const bool imperfect = sigma_h2 > 0.0;
  const CMatrix eff_gamma = imperfect ? CMatrix(gamma + sigma_h2 * CMatrix::Identity(gamma.rows(), gamma.cols())) : gamma;
  const std::optional<double> scalar = scalar_identity(eff_gamma);
  const Index mp = static_cast<Index>(codewords.M()) * codewords.P();

  std::vector<double> a(sigma2_grid.size()), b(sigma2_grid.size());
  for (std::size_t s = 0; s < sigma2_grid.size(); ++s) {
    const double denom = sigma2_grid[s] + (imperfect ? sigma_h2 : 0.0);
    a[s] = 1.0 / (4.0 * denom);
    b[s] = 1.0 / (3.0 * denom);
  }

  auto eigenvalues = [&](const CVector& e) -> RVector {
    const CMatrix om = codewords.omega(e);
    if (!scalar) return pep_eigenvalues(eff_gamma, om);
    RVector mu(om.rows());
    Eigen::SelfAdjointEigenSolver<CMatrix> es;
    for (int j = 0; j < codewords.J(); ++j) {
      es.compute(om.block(j * mp, j * mp, mp, mp), Eigen::EigenvaluesOnly);
      mu.segment(j * mp, mp) = es.eigenvalues().cwiseMax(0.0) * *scalar;
    }
    return mu;
  };

  UnionBoundResult out;
  out.ber.assign(sigma2_grid.size(), 0.0);
  std::vector<double> acc(sigma2_grid.size(), 0.0);
  auto accumulate = [&](const CVector& e, int distance, double weight) {
    const RVector mu = eigenvalues(e);
    for (std::size_t s = 0; s < sigma2_grid.size(); ++s)
      acc[s] += weight * distance * upep_from_eigenvalues(mu, a[s], b[s]);
  };

  if (lb <= options.max_enumerated_bits) {
    const std::uint64_t words = std::uint64_t{1} << lb;
    std::vector<CVector> symbols;
    symbols.reserve(words);
    for (std::uint64_t w = 0; w < words; ++w)
      symbols.push_back(constellation.symbols_from_labels(labels_from_bits(w, lb, bps, nm)));
    // P(x_c, x_e) depends on x_c - x_e only through Omega, which is even in e
    for (std::uint64_t c = 0; c < words; ++c)
      for (std::uint64_t e = c + 1; e < words; ++e)
        accumulate(symbols[c] - symbols[e], std::popcount(c ^ e), 2.0);
    const double norm = static_cast<double>(words) * lb;
    for (std::size_t s = 0; s < acc.size(); ++s) out.ber[s] = acc[s] / norm;
    out.pairs = words * (words - 1);
    return out;
  }

  out.sampled = true;
  const std::uint64_t words_mask = (std::uint64_t{1} << lb) - 1;
  std::uniform_int_distribution<std::uint64_t> word_dist(0, words_mask);
  for (std::uint64_t i = 0; i < options.sampled_pairs; ++i) {
    const std::uint64_t c = word_dist(rng);
    std::uint64_t e = word_dist(rng);
    while (e == c) e = word_dist(rng);
    const CVector xc = constellation.symbols_from_labels(labels_from_bits(c, lb, bps, nm));
    const CVector xe = constellation.symbols_from_labels(labels_from_bits(e, lb, bps, nm));
    accumulate(xc - xe, std::popcount(c ^ e), 1.0);
  }
  // (1 / (2^Lb Lb)) * 2^Lb (2^Lb - 1) * mean = (2^Lb - 1) / Lb * mean
  const double scale = (std::ldexp(1.0, lb) - 1.0) / lb / static_cast<double>(std::max<std::uint64_t>(1, options.sampled_pairs));
  for (std::size_t s = 0; s < acc.size(); ++s) out.ber[s] = acc[s] * scale;
  out.pairs = options.sampled_pairs;
  return out;
}

// ------------------------------------------------------------ diversity

int numerical_rank(const CMatrix& X, double rel_tol) {
  if (X.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(X);
  const RVector s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return static_cast<int>((s.array() > rel_tol * s(0)).count());
}

DiversityProbeResult diversity_probe(const DiversityProbeConfig& config, int n_error_vectors, Rng& rng) {
  if (config.n_links < 1 || n_error_vectors < 1)
    throw std::invalid_argument("diversity_probe: need at least one link and one error vector");
  const Constellation constellation(config.order);
  const Index nm = static_cast<Index>(config.params.N) * config.M;
  const Index L = static_cast<Index>(config.P) * config.M * config.J;
  const CMatrix gamma = CMatrix::Identity(L, L) / static_cast<double>(config.P);

  DiversityProbeResult r;
  r.gamma_rank = numerical_rank(gamma, config.rank_tolerance);
  r.min_rank_omega = std::numeric_limits<int>::max();
  r.diversity = std::numeric_limits<int>::max();

  std::uniform_int_distribution<int> label_dist(0, config.order - 1);
  std::uniform_int_distribution<int> offset_dist(1, config.order - 1);
  std::uniform_int_distribution<Index> count_dist(1, nm);
  for (int link_idx = 0; link_idx < config.n_links; ++link_idx) {
    const ChannelRealization ch =
        sample_channel(config.M, config.J, config.P, config.params, config.max_doppler, config.doppler_model, rng);
    const ImpairedLink link = realize_link(ch, config.hwi, 0.0, rng);
    const CodewordOperator cw(link);
    for (int v = 0; v < n_error_vectors; ++v) {
      std::vector<int> lc(static_cast<std::size_t>(nm));
      for (auto& l : lc) l = label_dist(rng);
      std::vector<int> le = lc;
      const Index flips = v == 0 ? 1 : count_dist(rng);
      std::vector<Index> positions(static_cast<std::size_t>(nm));
      for (Index i = 0; i < nm; ++i) positions[static_cast<std::size_t>(i)] = i;
      std::shuffle(positions.begin(), positions.end(), rng);
      for (Index i = 0; i < flips; ++i) {
        auto& l = le[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])];
        l = (l + offset_dist(rng)) % config.order;
      }
      const CVector e = constellation.symbols_from_labels(lc) - constellation.symbols_from_labels(le);
      const CMatrix om = cw.omega(e);
      r.min_rank_omega = std::min(r.min_rank_omega, numerical_rank(om, config.rank_tolerance));
      r.diversity = std::min(r.diversity, numerical_rank(gamma * om, config.rank_tolerance));
    }
  }
  return r;
}

// ---------------------------------------------------------------- LMMSE

LmmseBerCoefficients lmmse_ber_coefficients(const Constellation& constellation) {
  const int order = constellation.order();
  if (order == 2) return {1.0, 2.0};
  return {(4.0 / constellation.bits_per_symbol()) * (1.0 - 1.0 / std::sqrt(static_cast<double>(order))),
          3.0 / (order - 1.0)};
}

double lmmse_ber_approx(const RVector& sinr, const Constellation& constellation) {
  if (sinr.size() == 0) throw std::invalid_argument("lmmse_ber_approx: empty SINR vector");
  const auto [u1, u2] = lmmse_ber_coefficients(constellation);
  double acc = 0.0;
  for (Index c = 0; c < sinr.size(); ++c) acc += std::isinf(sinr(c)) ? 0.0 : u1 * q_function(std::sqrt(u2 * sinr(c)));
  return acc / static_cast<double>(sinr.size());
}

double lmmse_ber_approx(const EqualizerReport& report, const Constellation& constellation) {
  return lmmse_ber_approx(report.sinr, constellation);
}

double lmmse_ber_lower_bound(const EqualizerReport& report, const Constellation& constellation) {
  const Index nm = report.T.cols();
  if (nm == 0) throw std::invalid_argument("lmmse_ber_lower_bound: empty report");
  const auto [u1, u2] = lmmse_ber_coefficients(constellation);
  const double t = report.T.diagonal().real().mean();
  if (t >= 1.0) return 0.0;
  return u1 * q_function(std::sqrt(u2 * t / (1.0 - t)));
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double q_approx(double x) { return std::exp(-x * x / 2.0) / 12.0 + std::exp(-2.0 * x * x / 3.0) / 4.0; }

}  // namespace afdm
