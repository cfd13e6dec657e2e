#pragma once

#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spoofres/types.hpp"

namespace spoofres {

struct LtiSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd x0;

  int dimension() const { return static_cast<int>(a.rows()); }
};

/// Modal form of an LtiSystem with real, simple eigenvalues.
struct DiagonalizedSystem {
  Eigen::MatrixXd psi;
  Eigen::MatrixXd psi_inv;
  Eigen::VectorXd eigenvalues;
  /// Modes with |lambda| >= 1, ascending.
  std::vector<ModeIndex> unstable_modes;
  Eigen::VectorXd z0;

  int dimension() const { return static_cast<int>(eigenvalues.size()); }
  bool is_unstable(ModeIndex j) const;
  Eigen::MatrixXd a_bar() const { return eigenvalues.asDiagonal(); }
};

struct SpectrumTolerances {
  double eig = 1e-9;   // minimum separation between eigenvalues, relative to spectral scale
  double diag = 1e-9;  // max off-diagonal of psi_inv*A*psi, relative to ||A||
};

/// Diagonalizes sys.a. A supplied psi is validated; otherwise a real
/// eigendecomposition is computed and eigenvalues are sorted ascending.
DiagonalizedSystem diagonalize(const LtiSystem& sys,
                               const std::optional<Eigen::MatrixXd>& psi = std::nullopt,
                               const SpectrumTolerances& tol = {});

Eigen::VectorXd transform_initial(const LtiSystem& sys, const DiagonalizedSystem& diag);

struct ObservationModel {
  NodeId node = 0;
  Eigen::MatrixXd c;
  Eigen::MatrixXd c_bar;
};

ObservationModel make_observation(NodeId node, Eigen::MatrixXd c, const DiagonalizedSystem& diag);

struct ModeSplit {
  std::vector<ModeIndex> detectable;
  std::vector<ModeIndex> undetectable;

  bool detects(ModeIndex j) const;
};

/// PBH test specialised to the diagonal form: mode j is detectable iff
/// column j of c_bar has norm above rel_tol * max|c_bar|.
ModeSplit detectable_modes(const ObservationModel& obs, double rel_tol = 1e-9);

/// S_j for each mode in `modes`. Empty sets are kept in the map.
std::map<ModeIndex, NodeSet> source_sets(const std::map<NodeId, ModeSplit>& splits,
                                         const std::vector<ModeIndex>& modes);

Eigen::VectorXd step_truth(const Eigen::VectorXd& z, const DiagonalizedSystem& diag);

}  // namespace spoofres
