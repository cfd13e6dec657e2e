#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spoofres/types.hpp"

namespace spoofres {

/// Spectral radius of (diag(lambda) - gain * c_bar_d).
double closed_loop_radius(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& c_bar_d,
                          const Eigen::MatrixXd& gain);

/// Validates an explicit gain, or places every closed-loop pole at
/// `pole_target` when none is given. Throws NotSchurStable / PlacementFailed.
Eigen::MatrixXd design_gain(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& c_bar_d,
                            double pole_target,
                            const std::optional<Eigen::MatrixXd>& explicit_gain = std::nullopt);

/// Observer for the detectable part of one node's modal state.
class LuenbergerObserver {
 public:
  LuenbergerObserver(NodeId node, std::vector<ModeIndex> modes, Eigen::VectorXd lambda,
                     Eigen::MatrixXd c_bar_d, Eigen::MatrixXd gain, Eigen::VectorXd initial);

  /// One recursion with measurement y = C_i x[k]. Returns the new estimate.
  const Eigen::VectorXd& step(const Eigen::VectorXd& y);

  NodeId node() const { return node_; }
  const std::vector<ModeIndex>& modes() const { return modes_; }
  const Eigen::VectorXd& estimate() const { return estimate_; }
  const Eigen::MatrixXd& gain() const { return gain_; }
  double radius() const { return radius_; }

 private:
  NodeId node_;
  std::vector<ModeIndex> modes_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd c_bar_d_;
  Eigen::MatrixXd gain_;
  Eigen::VectorXd estimate_;
  double radius_ = 0.0;
};

}  // namespace spoofres
