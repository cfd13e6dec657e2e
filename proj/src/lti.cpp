#include "spoofres/lti.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "spoofres/error.hpp"

namespace spoofres {

namespace {

void require_finite_square(const Eigen::MatrixXd& a) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "A must be a non-empty square matrix");
  }
  if (!a.allFinite()) {
    throw Error(ErrorCode::DimensionMismatch, "A contains non-finite entries");
  }
}

void require_simple(const Eigen::VectorXd& eig, double tol) {
  const double scale = std::max(1.0, eig.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    for (Eigen::Index j = i + 1; j < eig.size(); ++j) {
      if (std::abs(eig[i] - eig[j]) <= tol * scale) {
        std::ostringstream os;
        os << "eigenvalues " << i << " and " << j << " coincide (" << eig[i] << ")";
        throw Error(ErrorCode::NonSimpleSpectrum, os.str());
      }
    }
  }
}

}  // namespace

bool DiagonalizedSystem::is_unstable(ModeIndex j) const {
  return std::binary_search(unstable_modes.begin(), unstable_modes.end(), j);
}

DiagonalizedSystem diagonalize(const LtiSystem& sys, const std::optional<Eigen::MatrixXd>& psi,
                               const SpectrumTolerances& tol) {
  require_finite_square(sys.a);
  const Eigen::Index n = sys.a.rows();
  if (sys.x0.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "x0 length does not match A");
  }

  DiagonalizedSystem out;
  if (psi) {
    if (psi->rows() != n || psi->cols() != n) {
      throw Error(ErrorCode::DimensionMismatch, "psi must be n x n");
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(*psi);
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::SingularPsi, "supplied psi is singular");
    }
    out.psi = *psi;
    out.psi_inv = lu.inverse();
    const Eigen::MatrixXd a_bar = out.psi_inv * sys.a * out.psi;
    const double scale = std::max(1.0, sys.a.cwiseAbs().maxCoeff());
    Eigen::MatrixXd off = a_bar;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() > tol.diag * scale) {
      throw Error(ErrorCode::PsiNotDiagonalizing, "psi_inv * A * psi is not diagonal");
    }
    out.eigenvalues = a_bar.diagonal();
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(sys.a);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::ComplexSpectrum, "eigendecomposition did not converge");
    }
    const auto& values = solver.eigenvalues();
    const auto& vectors = solver.eigenvectors();
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(values[i].imag()) > tol.eig * scale) {
        throw Error(ErrorCode::ComplexSpectrum, "A has a complex eigenvalue");
      }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index l, Eigen::Index r) { return values[l].real() < values[r].real(); });
    out.eigenvalues.resize(n);
    out.psi.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      out.eigenvalues[k] = values[order[static_cast<std::size_t>(k)]].real();
      Eigen::VectorXd v = vectors.col(order[static_cast<std::size_t>(k)]).real();
      // Sign convention: largest-magnitude entry positive.
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      if (v[arg] < 0) v = -v;
      out.psi.col(k) = v / v.norm();
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(out.psi);
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::NonSimpleSpectrum, "eigenvectors are linearly dependent");
    }
    out.psi_inv = lu.inverse();
  }

  require_simple(out.eigenvalues, tol.eig);
  for (Eigen::Index j = 0; j < n; ++j) {
    // Strict test on computed values: borderline systems are the caller's concern.
    if (std::abs(out.eigenvalues[j]) >= 1.0) {
      out.unstable_modes.push_back(static_cast<ModeIndex>(j));
    }
  }
  out.z0 = out.psi_inv * sys.x0;
  return out;
}

Eigen::VectorXd transform_initial(const LtiSystem& sys, const DiagonalizedSystem& diag) {
  if (sys.x0.size() != diag.psi.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "x0 length does not match psi");
  }
  return diag.psi.fullPivLu().solve(sys.x0);
}

ObservationModel make_observation(NodeId node, Eigen::MatrixXd c, const DiagonalizedSystem& diag) {
  if (c.cols() != diag.psi.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "observation matrix has wrong column count");
  }
  ObservationModel obs;
  obs.node = node;
  obs.c_bar = c * diag.psi;
  obs.c = std::move(c);
  return obs;
}

bool ModeSplit::detects(ModeIndex j) const {
  return std::find(detectable.begin(), detectable.end(), j) != detectable.end();
}

ModeSplit detectable_modes(const ObservationModel& obs, double rel_tol) {
  ModeSplit split;
  const auto n = obs.c_bar.cols();
  const double scale = obs.c_bar.size() == 0 ? 0.0 : obs.c_bar.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < n; ++j) {
    const bool seen = scale > 0.0 && obs.c_bar.col(j).norm() > rel_tol * scale;
    (seen ? split.detectable : split.undetectable).push_back(static_cast<ModeIndex>(j));
  }
  return split;
}

std::map<ModeIndex, NodeSet> source_sets(const std::map<NodeId, ModeSplit>& splits,
                                         const std::vector<ModeIndex>& modes) {
  std::map<ModeIndex, NodeSet> out;
  for (ModeIndex j : modes) {
    auto& set = out[j];
    for (const auto& [node, split] : splits) {
      if (split.detects(j)) set.insert(node);
    }
  }
  return out;
}

Eigen::VectorXd step_truth(const Eigen::VectorXd& z, const DiagonalizedSystem& diag) {
  return diag.eigenvalues.cwiseProduct(z);
}

}  // namespace spoofres
