#include "spoofres/observer.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "spoofres/error.hpp"

namespace spoofres {

double closed_loop_radius(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& c_bar_d,
                          const Eigen::MatrixXd& gain) {
  if (lambda.size() == 0) return 0.0;
  const Eigen::MatrixXd closed = Eigen::MatrixXd(lambda.asDiagonal()) - gain * c_bar_d;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(closed, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

void check_shapes(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& c_bar_d) {
  if (c_bar_d.cols() != lambda.size()) {
    throw Error(ErrorCode::DimensionMismatch, "measurement block has wrong column count");
  }
}

// Single-output placement with c = w^T C: for distinct lambda the closed
// loop polynomial at s = lambda_j reduces to c_j l_j prod_{m != j}(lambda_j - lambda_m).
std::optional<Eigen::MatrixXd> place_with_weights(const Eigen::VectorXd& lambda,
                                                  const Eigen::MatrixXd& c_bar_d,
                                                  const Eigen::VectorXd& w, double pole) {
  const Eigen::Index rho = lambda.size();
  const Eigen::RowVectorXd c = w.transpose() * c_bar_d;
  const double scale = c_bar_d.cwiseAbs().maxCoeff();
  Eigen::VectorXd l(rho);
  for (Eigen::Index j = 0; j < rho; ++j) {
    if (std::abs(c[j]) <= 1e-9 * scale) return std::nullopt;
    double denom = c[j];
    for (Eigen::Index m = 0; m < rho; ++m) {
      if (m != j) denom *= lambda[j] - lambda[m];
    }
    l[j] = std::pow(lambda[j] - pole, static_cast<double>(rho)) / denom;
  }
  return Eigen::MatrixXd(l * w.transpose());
}

}  // namespace

Eigen::MatrixXd design_gain(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& c_bar_d,
                            double pole_target, const std::optional<Eigen::MatrixXd>& explicit_gain) {
  check_shapes(lambda, c_bar_d);
  const Eigen::Index rho = lambda.size();
  const Eigen::Index r = c_bar_d.rows();
  if (explicit_gain) {
    if (explicit_gain->rows() != rho || explicit_gain->cols() != r) {
      throw Error(ErrorCode::DimensionMismatch, "gain must be rho x r");
    }
    const double radius = closed_loop_radius(lambda, c_bar_d, *explicit_gain);
    if (!(radius < 1.0)) {
      std::ostringstream os;
      os << "closed-loop spectral radius " << radius << " >= 1";
      throw Error(ErrorCode::NotSchurStable, os.str());
    }
    return *explicit_gain;
  }
  if (!(pole_target >= 0.0 && pole_target < 1.0)) {
    throw Error(ErrorCode::PlacementFailed, "pole target must lie in [0, 1)");
  }
  if (rho == 0) return Eigen::MatrixXd::Zero(0, r);
  // Deterministic output weightings w = (1, t, t^2, ...).
  for (double t : {1.0, 2.0, 0.5, 3.0, -1.0, 1.7, -2.3, 0.3}) {
    Eigen::VectorXd w(r);
    double p = 1.0;
    for (Eigen::Index k = 0; k < r; ++k, p *= t) w[k] = p;
    auto gain = place_with_weights(lambda, c_bar_d, w, pole_target);
    if (gain && closed_loop_radius(lambda, c_bar_d, *gain) < 1.0) return *gain;
  }
  throw Error(ErrorCode::PlacementFailed, "no output weighting reaches every mode");
}

LuenbergerObserver::LuenbergerObserver(NodeId node, std::vector<ModeIndex> modes,
                                       Eigen::VectorXd lambda, Eigen::MatrixXd c_bar_d,
                                       Eigen::MatrixXd gain, Eigen::VectorXd initial)
    : node_(node),
      modes_(std::move(modes)),
      lambda_(std::move(lambda)),
      c_bar_d_(std::move(c_bar_d)),
      gain_(std::move(gain)),
      estimate_(std::move(initial)) {
  check_shapes(lambda_, c_bar_d_);
  if (static_cast<Eigen::Index>(modes_.size()) != lambda_.size() || estimate_.size() != lambda_.size() ||
      gain_.rows() != lambda_.size() || gain_.cols() != c_bar_d_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "observer blocks disagree in size");
  }
  radius_ = closed_loop_radius(lambda_, c_bar_d_, gain_);
  if (!(radius_ < 1.0)) throw Error(ErrorCode::NotSchurStable, "observer closed loop is not Schur stable");
}

const Eigen::VectorXd& LuenbergerObserver::step(const Eigen::VectorXd& y) {
  if (y.size() != c_bar_d_.rows()) throw Error(ErrorCode::DimensionMismatch, "measurement length");
  const Eigen::VectorXd innovation = y - c_bar_d_ * estimate_;
  estimate_ = lambda_.cwiseProduct(estimate_) + gain_ * innovation;
  return estimate_;
}

}  // namespace spoofres
