#include "afdm/detectors.hpp"

#include <Eigen/Cholesky>

#include <limits>
#include <stdexcept>

namespace afdm {

namespace {

// Precompute the hypothesis table below this many complex entries.
constexpr std::uint64_t kModelTableLimit = std::uint64_t{1} << 24;

}  // namespace

void CsiModel::validate() const {
  if (sigma_h2 < 0.0 || sigma_h2 > 1.0) throw std::invalid_argument("CsiModel: sigma_h2 outside [0, 1]");
  if (mode == CsiMode::Perfect && sigma_h2 != 0.0)
    throw std::invalid_argument("CsiModel: perfect CSI requires sigma_h2 = 0");
}

CVector inject_gain_error(const CVector& h, const CsiModel& csi, Rng& rng) {
  csi.validate();
  if (csi.is_perfect()) return h;
  return h + complex_normal_vector(rng, h.size(), csi.sigma_h2);
}

MatrixEstimate inject_matrix_error(const CMatrix& H, const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& support,
                                   const CsiModel& csi, Rng& rng) {
  csi.validate();
  if (support.rows() != H.rows() || support.cols() != H.cols())
    throw std::invalid_argument("inject_matrix_error: support mask size mismatch");
  MatrixEstimate out{H, CMatrix::Zero(H.rows(), H.cols())};
  if (csi.is_perfect()) return out;
  for (Index c = 0; c < H.cols(); ++c)
    for (Index r = 0; r < H.rows(); ++r)
      if (support(r, c)) {
        const cd e = complex_normal(rng, csi.sigma_h2);
        out.estimate(r, c) += e;
        out.error(r, c) = -e;
      }
  return out;
}

ImpairedLink estimated_link(const ImpairedLink& link, const CsiModel& csi, Rng& rng) {
  if (csi.is_perfect()) return link;
  return with_gains(link, inject_gain_error(link.channel.gains(), csi, rng));
}

// ----------------------------------------------------------------------- ML

std::uint64_t ml_search_space(int order, Index nm) {
  std::uint64_t count = 1;
  for (Index i = 0; i < nm; ++i) {
    if (count > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(order))
      return std::numeric_limits<std::uint64_t>::max();
    count *= static_cast<std::uint64_t>(order);
  }
  return count;
}

MlDetector::MlDetector(const ImpairedLink& receiver, const Constellation& constellation, std::uint64_t cap)
    : constellation_(constellation),
      nm_(receiver.h_eff.cols()),
      count_(ml_search_space(constellation.order(), receiver.h_eff.cols())),
      h_(receiver.h_eff),
      mirror_(receiver.mirror_op),
      v_di_(receiver.v_di) {
  if (count_ > cap) throw std::invalid_argument("MlDetector: search space exceeds the hypothesis cap");
  if (count_ * static_cast<std::uint64_t>(h_.rows()) <= kModelTableLimit) {
    const auto count = static_cast<Index>(count_);
    const auto order = static_cast<std::uint64_t>(constellation_.order());
    // real form: rows of XT are [Re x^T | Im x^T] per hypothesis
    RMatrix XT(count, 2 * nm_);
    for (Index i = 0; i < count; ++i) {
      auto index = static_cast<std::uint64_t>(i);
      for (Index c = nm_ - 1; c >= 0; --c) {
        const cd s = constellation_.point(static_cast<int>(index % order));
        index /= order;
        XT(i, c) = s.real();
        XT(i, nm_ + c) = s.imag();
      }
    }
    // [Yr; Yi] = K [Xr; Xi] with K = [[Hr + Mr, Mi - Hi], [Hi + Mi, Hr - Mr]]
    const Index rows = h_.rows();
    const RMatrix Hr = h_.real(), Hi = h_.imag(), Mr = mirror_.real(), Mi = mirror_.imag();
    RMatrix K(2 * rows, 2 * nm_);
    K.topLeftCorner(rows, nm_) = Hr + Mr;
    K.topRightCorner(rows, nm_) = Mi - Hi;
    K.bottomLeftCorner(rows, nm_) = Hi + Mi;
    K.bottomRightCorner(rows, nm_) = Hr - Mr;
    models_.noalias() = XT * K.transpose();
    RVector offset(2 * rows);
    offset << v_di_.real(), v_di_.imag();
    models_.rowwise() += offset.transpose();
    model_norms_ = models_.rowwise().squaredNorm();
  }
}

std::vector<int> MlDetector::labels_of(std::uint64_t index) const {
  std::vector<int> labels(static_cast<std::size_t>(nm_));
  const auto order = static_cast<std::uint64_t>(constellation_.order());
  for (Index c = nm_ - 1; c >= 0; --c) {
    labels[static_cast<std::size_t>(c)] = static_cast<int>(index % order);
    index /= order;
  }
  return labels;
}

MlDecision MlDetector::detect(const CVector& y) const {
  if (y.size() != h_.rows()) throw std::invalid_argument("MlDetector::detect: y has the wrong length");
  std::uint64_t best = 0;
  double best_metric = std::numeric_limits<double>::infinity();
  if (models_.size() > 0) {
    // ||y - m||^2 = ||y||^2 - 2 Re(m^H y) + ||m||^2; the first term is common
    RVector yr(2 * y.size());
    yr << y.real(), y.imag();
    const RVector corr = models_ * yr;
    for (std::uint64_t i = 0; i < count_; ++i) {
      const auto k = static_cast<Index>(i);
      const double metric = model_norms_(k) - 2.0 * corr(k);
      if (metric < best_metric) {
        best_metric = metric;
        best = i;
      }
    }
  } else {
    for (std::uint64_t i = 0; i < count_; ++i) {
      const CVector x = constellation_.symbols_from_labels(labels_of(i));
      const double metric = (y - h_ * x - mirror_ * x.conjugate() - v_di_).squaredNorm();
      if (metric < best_metric) {
        best_metric = metric;
        best = i;
      }
    }
  }
  MlDecision d;
  d.hypothesis = best;
  d.labels = labels_of(best);
  d.symbols = constellation_.symbols_from_labels(d.labels);
  d.bits = constellation_.bits_from_labels(d.labels);
  return d;
}

MlDecision ml_detect(const CVector& y, const ImpairedLink& receiver, const Constellation& constellation,
                     std::uint64_t cap) {
  return MlDetector(receiver, constellation, cap).detect(y);
}

// -------------------------------------------------------------------- LMMSE

EqualizerReport lmmse_equalize(const CVector& y, const CMatrix& H_hat, const CMatrix& error_gram, const CMatrix& Rv,
                               const Constellation* constellation) {
  const Index rows = H_hat.rows();
  if (error_gram.rows() != rows || error_gram.cols() != rows || Rv.rows() != rows || Rv.cols() != rows)
    throw std::invalid_argument("lmmse_equalize: covariance size mismatch");
  if (y.size() != 0 && y.size() != rows) throw std::invalid_argument("lmmse_equalize: y has the wrong length");

  CMatrix W = H_hat * H_hat.adjoint() + error_gram + Rv;
  W = 0.5 * (W + W.adjoint()).eval();

  EqualizerReport r;
  Eigen::LLT<CMatrix> llt(W);
  if (llt.info() != Eigen::Success) {
    r.regularized = true;
    const double jitter = 1e-12 * std::max(1.0, W.diagonal().real().maxCoeff());
    llt.compute(W + jitter * CMatrix::Identity(rows, rows));
    if (llt.info() != Eigen::Success) throw std::runtime_error("lmmse_equalize: W is not positive definite");
  }
  // G = H^H W^{-1} = (W^{-1} H)^H since W is Hermitian
  r.G = llt.solve(H_hat).adjoint();
  r.T = r.G * H_hat;
  const Index nm = H_hat.cols();
  r.sinr.resize(nm);
  for (Index c = 0; c < nm; ++c) {
    const double t = r.T(c, c).real();
    r.sinr(c) = t >= 1.0 ? std::numeric_limits<double>::infinity() : t / (1.0 - t);
  }
  if (y.size() != 0) {
    r.x_soft = r.G * y;
    if (constellation != nullptr) {
      r.labels.resize(static_cast<std::size_t>(nm));
      // remove the T(c,c) shrinkage before slicing
      for (Index c = 0; c < nm; ++c) {
        const double t = r.T(c, c).real();
        r.labels[static_cast<std::size_t>(c)] = constellation->nearest(t > 0.0 ? r.x_soft(c) / t : r.x_soft(c));
      }
    }
  }
  return r;
}

CMatrix expected_error_gram(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& support, double sigma_h2) {
  RVector counts(support.rows());
  for (Index r = 0; r < support.rows(); ++r) counts(r) = static_cast<double>(support.row(r).count());
  return (sigma_h2 * counts).cast<cd>().asDiagonal();
}

EqualizerReport lmmse_detect(const CVector& y, const CMatrix& H_hat,
                             const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& support, double sigma_h2,
                             const CMatrix& Rv, const Constellation& constellation) {
  return lmmse_equalize(y, H_hat, expected_error_gram(support, sigma_h2), Rv, &constellation);
}

RVector lmmse_sinr_ratio_form(const CMatrix& G, const CMatrix& H_hat, const CMatrix& W) {
  const CMatrix GH = G * H_hat;
  const CMatrix residual = W - H_hat * H_hat.adjoint();
  RVector out(G.rows());
  for (Index c = 0; c < G.rows(); ++c) {
    const double signal = std::norm(GH(c, c));
    const double interference = GH.row(c).cwiseAbs2().sum() - signal;
    const double noise = (G.row(c) * residual * G.row(c).adjoint())(0, 0).real();
    out(c) = signal / (interference + noise);
  }
  return out;
}

// ----------------------------------------------------------- R_v estimation

CMatrix estimate_rv_covariance(const ImpairedLink& link, const Constellation& constellation, int n_frames, Rng& rng) {
  if (n_frames < 1) throw std::invalid_argument("estimate_rv_covariance: need at least one frame");
  const Index nm = link.h_eff.cols();
  const Index nj = link.h_eff.rows();
  std::uniform_int_distribution<int> label_dist(0, constellation.order() - 1);
  CMatrix acc = CMatrix::Zero(nj, nj);
  std::vector<int> labels(static_cast<std::size_t>(nm));
  for (int f = 0; f < n_frames; ++f) {
    for (auto& l : labels) l = label_dist(rng);
    const FrameTranscript t = transmit_frame(link, constellation.symbols_from_labels(labels), rng);
    const CVector v = t.mirror + t.dc + t.distortion + t.noise;
    acc.noalias() += v * v.adjoint();
  }
  acc /= static_cast<double>(n_frames);
  return 0.5 * (acc + acc.adjoint());
}

CMatrix expected_rv_covariance(const ImpairedLink& link) {
  const double k = link.pa.gain;
  const double nonlinear = k * k * link.eta + link.pa.distortion_var;
  CMatrix R = link.mirror_op * link.mirror_op.adjoint();
  R.noalias() += link.v_di * link.v_di.adjoint();
  if (nonlinear > 0.0) R.noalias() += nonlinear * (link.receive_op * link.receive_op.adjoint());
  R.diagonal().array() += link.noise_var;
  return 0.5 * (R + R.adjoint());
}

}  // namespace afdm
